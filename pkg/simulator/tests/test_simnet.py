"""
Simulator Tests

Test run configuration loading, the slot driver, adversary strategies,
trace metrics and trace export.
"""

from dataclasses import replace

import numpy as np
import pytest

from core.exceptions import ConfigError
from core.repositories.base import META_COLUMNS, create_repository
from core.simnet.config import load_config
from core.simnet.engine import ADVERSARY, HONEST, run, trial_configs
from core.simnet.export import TRACE_COLUMNS, export_metrics, export_trace
from core.simnet.metrics import chain_quality, measure
from core.simnet.strategies import get_strategy


class TestLoadConfig:
    """Test KEY=VALUE run configuration files"""

    def test_full_file(self, write_config):
        """Test every section parses into the dataclass tree"""
        path = write_config([
            '# private fork run',
            'stakes.honest=0.35,0.35',
            'stakes.adversary=0.3',
            'adversary.strategy=private_fork',
            'adversary.fork_depth=4',
            'params.confirm_depth=4',
            'sim.horizon_slots=50',
            'sim.activity=1.0,0.5',
            'sim.rng_seed=7',
        ])
        config = load_config(path)

        assert config.honest_stakes == (0.35, 0.35)
        assert config.adversary.strategy == 'private_fork'
        assert config.fork_depth == 4
        assert config.params.confirm_depth == 4
        assert config.activity_at(2) == 0.5
        assert config.activity_at(3) == 1.0

    def test_overrides(self, write_config):
        """Test override strings win over the file"""
        path = write_config(['stakes.honest=1.0', 'sim.rng_seed=7'])

        assert load_config(path, {'sim.rng_seed': '9'}).rng_seed == 9

    def test_missing_required_key(self, write_config):
        """Test a file without honest stakes names the key"""
        with pytest.raises(ConfigError, match='missing required key') as exc:
            load_config(write_config(['stakes.adversary=0.1']))
        assert exc.value.field == 'stakes.honest'

    def test_unknown_key(self, write_config):
        """Test an unknown key reports its line"""
        with pytest.raises(ConfigError, match='unknown key') as exc:
            load_config(write_config(['stakes.honest=1.0', 'sim.bogus=1']))
        assert exc.value.field == 'sim.bogus'
        assert exc.value.line == 2

    def test_invalid_value(self, write_config):
        """Test an unparsable value reports key and line"""
        with pytest.raises(ConfigError, match='invalid value') as exc:
            load_config(write_config(['stakes.honest=half,half']))
        assert exc.value.diagnostic().startswith('line 1: stakes.honest: invalid value')

    def test_honest_majority(self, write_config):
        """Test honest stake below 1/2 is refused"""
        with pytest.raises(ConfigError, match='honest majority violated') as exc:
            load_config(write_config(['stakes.honest=0.2,0.2', 'stakes.adversary=0.6']))
        assert exc.value.field == 'stakes.adversary'
        assert exc.value.line == 2

    def test_dishonest_majority_allowed(self, write_config):
        """Test the explicit opt-out accepts an adversarial majority"""
        path = write_config([
            'stakes.honest=0.2,0.2',
            'stakes.adversary=0.6',
            'sim.allow_dishonest_majority=true',
        ])

        assert load_config(path).adversary_stake == 0.6

    def test_strategy_needs_stake(self, write_config):
        """Test an adversary strategy without adversary stake is refused"""
        with pytest.raises(ConfigError, match='strategy needs adversary stake'):
            load_config(write_config(['stakes.honest=0.5,0.5', 'adversary.strategy=private_fork']))

    def test_checkpoint_below_confirm_depth(self, write_config):
        """Test a checkpoint shallower than k is refused"""
        with pytest.raises(ConfigError) as exc:
            load_config(write_config([
                'stakes.honest=1.0',
                'params.confirm_depth=5',
                'sim.checkpoint_depth=3',
            ]))
        assert exc.value.field == 'sim.checkpoint_depth'

    def test_unreadable_file(self, tmp_path):
        """Test a missing file is a config error"""
        with pytest.raises(ConfigError, match='cannot read config file'):
            load_config(tmp_path / 'missing.env')

    def test_unknown_strategy(self, sim_config):
        """Test strategy lookup by name"""
        with pytest.raises(LookupError):
            get_strategy('selfish_mining')
        with pytest.raises(ConfigError):
            run(sim_config(adversary_stake=0.2, strategy='selfish_mining'))


class TestHonestRuns:
    """Test runs without an adversary"""

    def test_one_block_per_slot(self, sim_config):
        """Test chain growth 1 and 50 TPS at 2000 tx per 40 s slot"""
        trace = run(sim_config(horizon=30))
        report = measure(trace, 3)

        assert len(trace.records) == 30
        assert report.zeta == 1.0
        assert report.tps_observed == pytest.approx(50.0)
        assert report.upsilon_worst == 1.0
        assert report.cp_violations == 0
        assert report.eta_hat is None
        assert all(r.unanimous for r in trace.records)

    def test_low_activity_keeps_growth(self, sim_config):
        """Test 5% active stake still produces a block every slot"""
        trace = run(sim_config(nodes=20, horizon=20, activity=(0.05,)))

        assert measure(trace, 3).zeta == 1.0
        assert all(r.active_stake == pytest.approx(0.05) for r in trace.records)

    def test_confirmation_advances(self, sim_config):
        """Test every node confirms all but the last k blocks"""
        trace = run(sim_config(horizon=20))

        assert trace.records[-1].confirmed == 17

    def test_deterministic(self, sim_config):
        """Test equal configs give identical traces"""
        config = sim_config(horizon=15)

        first, second = run(config), run(config)

        assert first.records == second.records
        assert first.final_chain == second.final_chain

    def test_seed_changes_run(self, sim_config):
        """Test another seed gives another chain"""
        config = sim_config(horizon=10)

        assert run(config).final_chain != run(replace(config, rng_seed=1)).final_chain

    def test_trial_configs(self, sim_config):
        """Test trials get distinct, reproducible seeds"""
        config = sim_config()
        seeds = [c.rng_seed for c in trial_configs(config, 3)]

        assert len(set(seeds)) == 3
        assert seeds == [c.rng_seed for c in trial_configs(config, 3)]
        with pytest.raises(ValueError):
            trial_configs(config, 0)

    @pytest.mark.slow
    def test_long_run_growth(self, sim_config):
        """Test chain growth stays 1 over ten thousand slots"""
        trace = run(sim_config(nodes=3, horizon=10_000))

        assert measure(trace, 15).zeta == 1.0


class TestAdversaryRuns:
    """Test the adversary strategies inside the driver"""

    def test_sybil_split_keeps_unanimity(self, sim_config):
        """Test publishing on the common chain never splits honest nodes"""
        trace = run(sim_config(nodes=4, adversary_stake=0.2, strategy='sybil_split', parts=4, horizon=40))

        assert all(r.unanimous for r in trace.records)
        assert len(trace.adversary_keys) == 4
        assert set(trace.publisher_classes) <= {HONEST, ADVERSARY}
        assert measure(trace, 3).zeta == 1.0

    def test_missing_data_makes_null_blocks(self, sim_config):
        """Test withheld data leaves null blocks that still grow the chain"""
        trace = run(sim_config(adversary_stake=0.3, strategy='missing_data', horizon=60))
        report = measure(trace, 3)

        assert report.null_blocks > 0
        assert report.zeta == 1.0
        assert report.null_blocks == report.adversary_blocks

    def test_released_data_fills_null_blocks(self, sim_config):
        """Test data released two slots late back-fills the chain"""
        withheld = measure(run(sim_config(adversary_stake=0.3, strategy='missing_data', horizon=60)), 3)
        delayed = measure(run(sim_config(
            adversary_stake=0.3, strategy='missing_data', horizon=60, release_delay=2,
        )), 3)

        assert delayed.null_blocks <= 2
        assert delayed.null_blocks < withheld.null_blocks

    def test_split_reconverges(self, sim_config):
        """Test split reveals reconverge within one slot"""
        trace = run(sim_config(nodes=6, adversary_stake=0.3, strategy='split_n', subsets=2, horizon=120))
        report = measure(trace, 3)

        assert report.split_slots > 0
        assert report.split_divergences == 0
        assert any(not r.unanimous for r in trace.records if r.split)

    @pytest.mark.parametrize('rng_seed', [1, 2, 3, 4, 5])
    def test_split_reconverges_across_seeds(self, sim_config, rng_seed):
        """Test reconvergence holds for every seed"""
        config = sim_config(nodes=4, adversary_stake=0.3, strategy='split_n', subsets=2, horizon=60, rng_seed=rng_seed)

        assert measure(run(config), 3).split_divergences == 0

    def test_split_into_every_node_reconverges(self, sim_config):
        """Test one subset per honest node still reconverges"""
        trace = run(sim_config(nodes=4, adversary_stake=0.3, strategy='split_n', subsets=4, horizon=80))
        report = measure(trace, 3)

        assert report.split_slots > 0
        assert report.split_divergences == 0

    @pytest.mark.slow
    def test_split_reconverges_over_many_episodes(self, sim_config):
        """Test hundreds of split episodes all reconverge within one slot"""
        trace = run(sim_config(nodes=6, adversary_stake=0.3, strategy='split_n', subsets=3, horizon=4000))
        report = measure(trace, 3)

        assert report.split_slots > 100
        assert report.split_divergences == 0

    def test_weak_private_fork_never_succeeds(self, sim_config):
        """Test 1% adversary stake never wins a depth-3 race"""
        trace = run(sim_config(adversary_stake=0.01, strategy='private_fork', horizon=60))
        report = measure(trace, 3)

        assert report.attempts_succeeded == 0
        assert report.attempts_resolved > 0
        assert report.eta_hat == 0.0
        assert report.cp_violations == 0

    def test_shallow_private_fork_succeeds(self, sim_config):
        """Test 30% adversary stake breaks k = 1"""
        trace = run(sim_config(
            adversary_stake=0.3, strategy='private_fork', horizon=60, confirm_depth=1, fork_depth=1,
        ))
        report = measure(trace, 1)

        assert report.attempts_succeeded > 0
        assert report.cp_violations > 0
        assert report.adversary_blocks > 0
        assert 0.0 < report.eta_hat <= 1.0

    def test_reveals_are_one_deeper_than_k(self, sim_config):
        """Test every private fork shown is at least k + 1 blocks deep"""
        trace = run(sim_config(
            adversary_stake=0.3, strategy='private_fork', horizon=60, confirm_depth=1, fork_depth=1,
        ))
        reveals = [r.adversary_published for r in trace.records if r.adversary_published]

        assert reveals
        assert min(reveals) >= 2

    def test_checkpoint_refuses_deep_forks(self, sim_config):
        """Test a moving checkpoint turns deep reveals into rejections"""
        trace = run(sim_config(
            adversary_stake=0.3, strategy='private_fork', horizon=80,
            confirm_depth=1, fork_depth=2, checkpoint_depth=1,
        ))
        report = measure(trace, 1)

        assert report.checkpoint_rejections > 0
        assert report.cp_violations == 0

    @pytest.mark.slow
    def test_borrow_power_runs(self, sim_config):
        """Test the borrow-power strategy completes and reports attempts"""
        trace = run(sim_config(adversary_stake=0.3, strategy='borrow_power', horizon=30, fork_depth=2))
        report = measure(trace, 3)

        assert report.attempts_opened > 0
        assert report.zeta == 1.0


class TestMetrics:
    """Test chain quality and report edge cases"""

    def test_chain_quality_windows(self):
        """Test the worst window of honest blocks"""
        flags = np.array([1, 1, 0, 0, 1, 1], dtype=bool)

        assert chain_quality(flags, 2) == 0.0
        assert chain_quality(flags, 3) == pytest.approx(1 / 3)
        assert chain_quality(flags, 10) == pytest.approx(4 / 6)

    def test_chain_quality_edges(self):
        """Test an empty chain and a bad k"""
        assert chain_quality(np.array([], dtype=bool), 3) == 1.0
        with pytest.raises(ValueError):
            chain_quality(np.array([True]), 0)

    def test_measure_needs_positive_k(self, sim_config):
        """Test k below 1 is rejected"""
        with pytest.raises(ValueError):
            measure(run(sim_config(horizon=3)), 0)


class TestExport:
    """Test trace and metrics files"""

    def test_trace_csv(self, sim_config, tmp_path):
        """Test one row per slot with the metadata columns first"""
        trace = run(sim_config(horizon=8))
        store = create_repository(tmp_path, 4242, {'command': 'simulate'})

        export_trace(trace, store, 'csv')
        rows = store['read_csv']('trace.csv')

        assert len(rows) == 8
        assert list(rows[0]) == list(META_COLUMNS) + TRACE_COLUMNS
        assert rows[0]['seed'] == '4242'
        assert rows[-1]['slot'] == '8'

    def test_trace_json(self, sim_config, tmp_path):
        """Test the JSON trace carries the final chain"""
        trace = run(sim_config(horizon=5))
        store = create_repository(tmp_path, 4242, {'command': 'simulate'})

        export_trace(trace, store, 'json')
        document = store['read_json']('trace.json')

        assert document['meta'] == store['meta']
        assert document['data']['final_chain']['length'] == 5
        assert len(document['data']['records']) == 5

    def test_metrics_files(self, sim_config, tmp_path):
        """Test metrics.json always, metrics.csv only for csv output"""
        report = measure(run(sim_config(horizon=5)), 3)
        store = create_repository(tmp_path, 4242, {'command': 'simulate'})

        paths = export_metrics(report, store, 'csv')

        assert [p.name for p in paths] == ['metrics.json', 'metrics.csv']
        assert store['read_json']('metrics.json')['data']['zeta'] == 1.0
        assert store['read_csv']('metrics.csv')[0]['eta_hat'] == ''
