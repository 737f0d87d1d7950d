"""
Run configuration (SimConfig) and its file format.

Config files are KEY=VALUE text read with python-dotenv. Keys are dotted
paths derived from the dataclasses below (see core.schema.introspection):

    stakes.honest=0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1
    stakes.adversary=0.1
    adversary.strategy=private_fork
    adversary.fork_depth=5
    params.scale_factor=8
    sim.horizon_slots=1000
    sim.activity=1.0
    sim.rng_seed=7

Lists are comma separated; empty values mean "unset" for optional keys.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Set, Tuple

from dotenv import dotenv_values

from config import settings
from core.chain.models import ProtocolParams
from core.exceptions import ConfigError
from core.schema.introspection import build_dataclass, flat_fields, parse_value, register_schema

logger = logging.getLogger(__name__)

STRATEGY_NAMES = ('none', 'private_fork', 'split_n', 'borrow_power', 'missing_data', 'sybil_split')
STAKE_SUM_TOLERANCE = 1e-12


@register_schema
@dataclass(frozen=True)
class AdversaryConfig:
    """Adversary strategy and its knobs."""

    strategy: str = field(default='none', metadata={'choices': STRATEGY_NAMES, 'help': 'adversary strategy'})
    fork_depth: Optional[int] = field(
        default=None, metadata={'help': 'target depth k for private_fork / borrow_power (default params.confirm_depth)'},
    )
    parts: int = field(default=1, metadata={'help': 'identities for sybil_split'})
    subsets: int = field(default=2, metadata={'help': 'honest subsets for split_n'})
    release_delay: Optional[int] = field(
        default=None, metadata={'help': 'slots before withheld data is sent (missing_data; empty = never)'},
    )


@register_schema
@dataclass(frozen=True)
class SimConfig:
    """One simulator run."""

    honest_stakes: Tuple[float, ...] = field(metadata={'key': 'stakes.honest', 'help': 'relative stakes of honest nodes'})
    adversary_stake: float = field(default=0.0, metadata={'key': 'stakes.adversary', 'help': 'r_a'})
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    params: ProtocolParams = field(default_factory=ProtocolParams)
    horizon_slots: int = field(default=1000, metadata={'key': 'sim.horizon_slots', 'help': 'slots to simulate'})
    activity: Tuple[float, ...] = field(
        default=(1.0,), metadata={'key': 'sim.activity', 'help': 'active honest stake fraction per slot (cycled)'},
    )
    rng_seed: int = field(default=settings.SIMULATION_SEED, metadata={'key': 'sim.rng_seed', 'help': 'run seed'})
    allow_dishonest_majority: bool = field(
        default=False, metadata={'key': 'sim.allow_dishonest_majority', 'help': 'skip the r_h >= 1/2 check'},
    )
    checkpoint_depth: Optional[int] = field(
        default=None, metadata={'key': 'sim.checkpoint_depth', 'help': 'moving checkpoint depth (empty = off)'},
    )
    tx_payloads_per_block: int = field(
        default=2, metadata={'key': 'sim.tx_payloads_per_block', 'help': 'opaque payloads carried per block'},
    )
    tpb: int = field(default=settings.TPB, metadata={'key': 'sim.tpb', 'help': 'nominal transactions per block'})

    @property
    def honest_stake(self) -> float:
        return math.fsum(self.honest_stakes)

    @property
    def fork_depth(self) -> int:
        return self.adversary.fork_depth or self.params.confirm_depth

    def activity_at(self, slot: int) -> float:
        return self.activity[(slot - 1) % len(self.activity)]

    def validate(self) -> 'SimConfig':
        """
        Check run invariants.

        Raises:
            ConfigError: Naming the offending field
        """
        if not self.honest_stakes or any(not r > 0 for r in self.honest_stakes):
            raise ConfigError('honest stakes must be positive', field='stakes.honest')
        if not 0.0 <= self.adversary_stake < 1.0:
            raise ConfigError('adversary stake must lie in [0, 1)', field='stakes.adversary')
        if abs(math.fsum(self.honest_stakes + (self.adversary_stake,)) - 1.0) > STAKE_SUM_TOLERANCE:
            raise ConfigError('stakes must sum to 1', field='stakes.honest')
        if self.honest_stake < 0.5 and not self.allow_dishonest_majority:
            raise ConfigError('honest majority violated', field='stakes.adversary')
        if self.horizon_slots < 1:
            raise ConfigError('horizon must be at least 1 slot', field='sim.horizon_slots')
        if any(not 0.0 < a <= 1.0 for a in self.activity):
            raise ConfigError('activity must lie in (0, 1]', field='sim.activity')
        if self.tx_payloads_per_block < 0:
            raise ConfigError('payload count must be non-negative', field='sim.tx_payloads_per_block')
        if self.tpb < 1:
            raise ConfigError('tpb must be positive', field='sim.tpb')
        if self.rng_seed < 0:
            raise ConfigError('seed must be non-negative', field='sim.rng_seed')

        adversary = self.adversary
        if adversary.strategy not in STRATEGY_NAMES:
            raise ConfigError(f'unknown strategy {adversary.strategy!r}', field='adversary.strategy')
        if adversary.strategy != 'none' and not self.adversary_stake > 0:
            raise ConfigError('strategy needs adversary stake', field='stakes.adversary')
        if adversary.fork_depth is not None and adversary.fork_depth < 1:
            raise ConfigError('fork depth must be at least 1', field='adversary.fork_depth')
        if adversary.parts < 1:
            raise ConfigError('parts must be at least 1', field='adversary.parts')
        if not 1 <= adversary.subsets <= len(self.honest_stakes):
            raise ConfigError('subsets must lie in [1, number of honest nodes]', field='adversary.subsets')
        if adversary.release_delay is not None and adversary.release_delay < 1:
            raise ConfigError('release delay must be at least 1', field='adversary.release_delay')
        if self.checkpoint_depth is not None and self.checkpoint_depth < self.params.confirm_depth:
            raise ConfigError('checkpoint depth must be at least the confirm depth', field='sim.checkpoint_depth')
        return self


CONFIG_KEYS = flat_fields(SimConfig)


def _line_numbers(path: Path) -> Dict[str, int]:
    lines = {}
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith('export '):
            stripped = stripped[len('export '):]
        if '=' in stripped and not stripped.startswith('#'):
            lines.setdefault(stripped.split('=', 1)[0].strip(), number)
    return lines


def parse_config_values(raw: Dict[str, Optional[str]], lines: Dict[str, int] = None, known=None) -> Dict:
    """
    Parse raw KEY=VALUE strings against a key schema.

    Raises:
        ConfigError: For unknown keys and unparsable values
    """
    lines = lines or {}
    known = CONFIG_KEYS if known is None else known
    values = {}
    for key, text in raw.items():
        if key not in known:
            raise ConfigError('unknown key', field=key, line=lines.get(key))
        tp, _ = known[key]
        try:
            values[key] = parse_value(text, tp)
        except ValueError as exc:
            raise ConfigError(f'invalid value: {exc}', field=key, line=lines.get(key)) from exc
    return values


def read_config_file(
    path,
    known,
    overrides: Optional[Dict[str, str]] = None,
    sections: Optional[Set[str]] = None,
) -> Tuple[Dict, Dict[str, int]]:
    """
    Read a KEY=VALUE file and parse it against a key schema.

    Args:
        path: Config file path
        known: Dotted key -> (type, field), see flat_fields()
        overrides: Raw KEY=VALUE strings applied on top (e.g. the --seed flag)
        sections: When given, keys outside these sections are skipped

    Returns:
        (parsed values, key -> line number)

    Raises:
        ConfigError: Unreadable file, unknown key or bad value
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f'cannot read config file {path}')

    raw = dict(dotenv_values(path))
    raw.update(overrides or {})
    if sections is not None:
        raw = {k: v for k, v in raw.items() if k.split('.', 1)[0] in sections}
    lines = _line_numbers(path)
    return parse_config_values(raw, lines, known), lines


def build_config(cls, values: Dict, lines: Optional[Dict[str, int]] = None):
    """
    Build a (nested) config dataclass and run its validate(), if any.

    Raises:
        ConfigError: Construction or validation failed
    """
    lines = lines or {}
    try:
        config = build_dataclass(cls, values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    if hasattr(config, 'validate'):
        try:
            config.validate()
        except ConfigError as exc:
            exc.line = exc.line or lines.get(exc.field)
            raise
    return config


def load_config(path, overrides: Optional[Dict[str, str]] = None) -> SimConfig:
    """
    Read and validate a SimConfig file.

    Args:
        path: Config file path
        overrides: Raw KEY=VALUE strings applied on top (e.g. the --seed flag)

    Raises:
        ConfigError: Unreadable file, unknown key, bad value or a violated
            invariant, with field and line when known
    """
    values, lines = read_config_file(path, CONFIG_KEYS, overrides)
    if 'stakes.honest' not in values:
        raise ConfigError('missing required key', field='stakes.honest')

    config = build_config(SimConfig, values, lines)
    logger.info(
        'loaded %s: %d honest nodes, r_a=%s, strategy=%s, %d slots',
        path, len(config.honest_stakes), config.adversary_stake,
        config.adversary.strategy, config.horizon_slots,
    )
    return config
