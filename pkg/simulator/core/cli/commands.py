"""
Command handlers.

One handler per command, looked up by name. A handler takes a
RunManifest, writes its outputs through an output store and returns the
exit code; exceptions are mapped to exit codes by core.cli.main.
"""

import logging
import sys
from dataclasses import replace
from functools import lru_cache
from typing import Any, Callable, Dict

from config import settings
from core.analysis.borrow_power import borrow_power_effect, gain_surface_cv, gain_surface_vt
from core.analysis.bounds import (
    bound_params,
    chain_quality_bound,
    epsilon_cp,
    epsilon_lp,
    eta_bound,
    finality_minutes,
    solve_k,
)
from core.analysis.montecarlo import sybil_check
from core.analysis.tables import bound_vs_monte_carlo, eta_curve, finality_table, s_sweep, tps_table
from core.cli.manifest import (
    BorrowGrid,
    BoundQuery,
    CurveGrid,
    FinalityGrid,
    RunManifest,
    SweepGrid,
    SybilGrid,
    TpsGrid,
    load_grid,
)
from core.exceptions import ConfigError
from core.repositories.base import create_repository, to_plain
from core.schema.introspection import get_all_schemas, get_dataclass_schema, get_schema_by_name
from core.simnet.config import load_config
from core.simnet.engine import run, run_trials
from core.simnet.export import export_metrics, export_trace
from core.simnet.metrics import measure

logger = logging.getLogger(__name__)

Handler = Callable[[RunManifest], int]


def _store(manifest: RunManifest, parameters: Any):
    return create_repository(
        manifest.output_dir,
        manifest.effective_seed,
        {'command': manifest.command, 'parameters': to_plain(parameters)},
    )


def _first_k(manifest: RunManifest):
    return manifest.k[0] if manifest.k else None


def _emit(values: Dict[str, Any]) -> None:
    """key=value lines on stdout, one per value."""
    for key, value in values.items():
        sys.stdout.write(f'{key}={"" if value is None else value}\n')


def cmd_simulate(manifest: RunManifest) -> int:
    """
    Run the simulator on a config file.

    Writes trace.csv|json and metrics.json (plus metrics.csv); with
    --trials N > 1 each trial goes to trial_<i>/ and trials.csv sums up.
    """
    if manifest.config_path is None:
        raise ConfigError('--config is required for simulate', field='--config')

    overrides = {} if manifest.seed is None else {'sim.rng_seed': str(manifest.seed)}
    config = load_config(manifest.config_path, overrides)
    manifest = replace(manifest, seed=config.rng_seed)
    k = _first_k(manifest) or config.fork_depth
    store = _store(manifest, {'config': config, 'k': k, 'trials': manifest.trials or 1})

    if not manifest.trials or manifest.trials == 1:
        trace = run(config)
        report = measure(trace, k)
        export_trace(trace, store, manifest.format)
        export_metrics(report, store, manifest.format)
        _emit({'zeta': report.zeta, 'cp_violations': report.cp_violations, 'eta_hat': report.eta_hat})
        return 0

    traces = run_trials(config, manifest.trials, manifest.workers)
    reports = []
    for index, trace in enumerate(traces):
        sub = create_repository(
            store['path'](f'trial_{index}'),
            trace.config.rng_seed,
            {'command': manifest.command, 'parameters': to_plain({'config': trace.config, 'k': k})},
        )
        report = measure(trace, k)
        export_trace(trace, sub, manifest.format)
        export_metrics(report, sub, manifest.format)
        reports.append({'trial': index, 'rng_seed': trace.config.rng_seed, **report.as_dict()})
    store['write']('trials', reports, manifest.format)
    return 0


def cmd_finality_table(manifest: RunManifest) -> int:
    """Time to finality per (r_a, confidence); table.compare adds the bound vs Monte Carlo rows."""
    grid = load_grid(FinalityGrid, manifest.config_path)
    if manifest.r_a is not None:
        grid = replace(grid, r_a=(manifest.r_a,))
    if manifest.eta is not None:
        grid = replace(grid, confidence=(1.0 - manifest.eta,))
    if manifest.s is not None:
        grid = replace(grid, scale_factor=manifest.s)

    try:
        rows = finality_table(
            grid.r_a, grid.confidence, grid.scale_factor, grid.slot_length_seconds,
            grid.method, manifest.trials, manifest.effective_seed, manifest.deep, manifest.workers,
        )
    except ValueError as exc:
        if str(exc) == 'empty grid':
            raise ConfigError('empty grid', field='table.r_a') from exc
        raise

    store = _store(manifest, {'grid': grid, 'trials': manifest.trials, 'deep': manifest.deep})
    store['write']('finality_table', rows, manifest.format)

    if grid.compare:
        r_a_list = sorted({row['r_a'] for row in rows})
        comparison = bound_vs_monte_carlo(
            r_a_list, grid.confidence, grid.scale_factor, grid.slot_length_seconds,
            manifest.trials, manifest.effective_seed, manifest.workers,
        )
        store['write']('bound_vs_monte_carlo', comparison, manifest.format)
    return 0


def cmd_s_sweep(manifest: RunManifest) -> int:
    """Monte Carlo k* across scale factors."""
    grid = load_grid(SweepGrid, manifest.config_path)
    if manifest.r_a is not None:
        grid = replace(grid, r_a=manifest.r_a)
    if manifest.eta is not None:
        grid = replace(grid, eta=manifest.eta)
    if manifest.s is not None:
        grid = replace(grid, s_values=(manifest.s,))

    result = s_sweep(grid.r_a, grid.eta, grid.s_values, manifest.trials, manifest.effective_seed, manifest.workers)
    store = _store(manifest, {'grid': grid, 'trials': manifest.trials})
    store['write']('s_sweep', result.rows, manifest.format)
    store['write_json']('s_sweep_summary.json', {
        'non_increasing': result.non_increasing,
        'elbow_improvement': result.elbow_improvement,
    })
    return 0


def cmd_borrow_power(manifest: RunManifest) -> int:
    """Violation rate with and without borrowing power, plus the gain surfaces."""
    grid = load_grid(BorrowGrid, manifest.config_path)
    if manifest.r_a is not None:
        grid = replace(grid, r_a=manifest.r_a)
    if manifest.s is not None:
        grid = replace(grid, scale_factor=manifest.s)
    if manifest.k:
        grid = replace(grid, k_values=manifest.k)

    trials = manifest.trials or settings.MC_DEFAULT_TRIALS
    store = _store(manifest, {'grid': grid, 'trials': trials})
    rows = borrow_power_effect(
        grid.r_a, grid.scale_factor, grid.k_values, trials, manifest.effective_seed,
        grid.grid_points, manifest.workers,
    )
    store['write']('borrow_power', rows, manifest.format)

    if grid.surfaces:
        alpha_h = grid.scale_factor * (1.0 - grid.r_a)
        store['write']('gain_surface_vt', gain_surface_vt(alpha_h, grid.v_grid, grid.t_grid), manifest.format)
        c_grid = [f * alpha_h for f in grid.c_fractions]
        store['write']('gain_surface_cv', gain_surface_cv(alpha_h, c_grid, grid.v_grid, 0.0), manifest.format)
    return 0


def cmd_sybil_check(manifest: RunManifest) -> int:
    """KS distances of split against unsplit effective power."""
    grid = load_grid(SybilGrid, manifest.config_path)
    samples = manifest.trials or grid.samples
    rows = sybil_check(grid.alpha, grid.parts, samples, manifest.effective_seed)
    store = _store(manifest, {'grid': grid, 'samples': samples})
    store['write']('sybil_check', rows, manifest.format)
    return 0


def cmd_bound(manifest: RunManifest) -> int:
    """
    Print the bound parameters, and eta(k) and/or k*(eta) when asked.

    Raises:
        AnalysisError: 'no honest advantage' for r_a >= 1/2
    """
    query = load_grid(BoundQuery, manifest.config_path)
    if manifest.r_a is not None:
        query = replace(query, r_a=manifest.r_a)
    if manifest.s is not None:
        query = replace(query, scale_factor=manifest.s)
    if manifest.k:
        query = replace(query, k=manifest.k[0])
    if manifest.eta is not None:
        query = replace(query, eta=manifest.eta)

    bp = bound_params(query.r_a, query.scale_factor)
    values = {
        'r_a': query.r_a,
        's': query.scale_factor,
        'alpha_a': bp.alpha_a,
        'alpha_h': bp.alpha_h,
        'lambda': bp.lam,
        'K': bp.k_bound,
        'sigma_sq': bp.sigma_sq,
        'c': bp.c_exponent,
    }
    if query.k is not None:
        values['k'] = query.k
        values['eta'] = eta_bound(bp, query.k)
        values['epsilon_cp'] = epsilon_cp(bp, query.k, query.lifetime_slots)
        values['epsilon_lp'] = epsilon_lp(bp, query.k, query.lifetime_slots)
        values['chain_quality_failure'] = chain_quality_bound(bp, query.k, query.lifetime_slots)
    if query.eta is not None:
        k_star = solve_k(bp, query.eta)
        values['eta_target'] = query.eta
        values['k_star'] = k_star
        values['minutes'] = finality_minutes(k_star, settings.SLOT_LENGTH_SECONDS)

    _emit(values)
    store = _store(manifest, query)
    store['write']('bound', [values], manifest.format)
    return 0


def cmd_eta_curve(manifest: RunManifest) -> int:
    """Empirical eta against k next to the analytic bound."""
    grid = load_grid(CurveGrid, manifest.config_path)
    if manifest.r_a is not None:
        grid = replace(grid, r_a=manifest.r_a)
    if manifest.s is not None:
        grid = replace(grid, scale_factor=manifest.s)
    if manifest.k:
        grid = replace(grid, k_values=manifest.k)

    curve = eta_curve(grid.r_a, grid.scale_factor, grid.k_values, manifest.trials, manifest.effective_seed,
                      manifest.workers)
    store = _store(manifest, {'grid': grid, 'trials': manifest.trials})
    store['write']('eta_curve', curve.rows, manifest.format)
    store['write_json']('eta_curve_summary.json', {
        'c_exponent': curve.c_exponent,
        'fitted_slope': curve.fitted_slope,
    })
    return 0


def cmd_tps_table(manifest: RunManifest) -> int:
    """Throughput comparison rows."""
    grid = load_grid(TpsGrid, manifest.config_path)
    rows = tps_table(grid.tpb, grid.slot_length_seconds, grid.r_active)
    store = _store(manifest, grid)
    store['write']('tps_table', rows, manifest.format)
    return 0


def cmd_schema(manifest: RunManifest) -> int:
    """
    Print the documented keys and columns of every schema, or of one
    (--name). Nothing is written to the output directory.

    Raises:
        LookupError: Unknown schema name
    """
    if manifest.name is None:
        schemas = get_all_schemas()
    else:
        cls = get_schema_by_name(manifest.name)
        if cls is None:
            raise LookupError(f'Schema "{manifest.name}" not found')
        schemas = {manifest.name: get_dataclass_schema(cls)}

    for name, schema in schemas.items():
        sys.stdout.write(f'{name}: {schema["doc"]}\n')
        for f in schema['fields']:
            default = f' (default {f["default"]!r})' if 'default' in f else ''
            sys.stdout.write(f'  {f["name"]}: {f["type"]}{default}  {f["help_text"]}\n')
    return 0


COMMANDS: Dict[str, Handler] = {
    'simulate': cmd_simulate,
    'finality-table': cmd_finality_table,
    's-sweep': cmd_s_sweep,
    'borrow-power': cmd_borrow_power,
    'sybil-check': cmd_sybil_check,
    'bound': cmd_bound,
    'eta-curve': cmd_eta_curve,
    'tps-table': cmd_tps_table,
    'schema': cmd_schema,
}


@lru_cache(maxsize=32)
def get_command(name: str) -> Handler:
    """
    Handler for a command name.

    Raises:
        LookupError: If the command doesn't exist
    """
    handler = COMMANDS.get(name)
    if handler is None:
        raise LookupError(f'Command "{name}" not found')
    return handler
