"""
Run manifests and the parameter grids of the report commands.

Grid files use the same KEY=VALUE format as simulator configs, with one
section per command (table.*, sweep.*, borrow.*, sybil.*, curve.*,
tps.*, bound.*). Every key is optional.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

from config import settings
from core.analysis.tables import DEFAULT_CONFIDENCE, DEFAULT_R_A, METHOD_MONTE_CARLO, METHODS
from core.exceptions import ConfigError
from core.schema.introspection import flat_fields, register_schema
from core.simnet.config import build_config, read_config_file

COMMAND_NAMES = (
    'simulate', 'finality-table', 's-sweep', 'borrow-power', 'sybil-check', 'bound', 'eta-curve', 'tps-table',
    'schema',
)
FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class RunManifest:
    """
    One CLI invocation.

    Attributes:
        command: Command name
        config_path: Config or grid file (required for simulate)
        output_dir: Directory receiving every output file
        seed: Root seed recorded in every output (settings default when unset)
        format: 'csv' or 'json'
        trials: Monte Carlo trials / simulator trials override
        deep: Allow report cells that need far more trials
        workers: Process-pool size for Monte Carlo
        r_a, s, k, eta: Flag overrides of grid values
        name: Schema name for the schema command
    """

    command: str
    config_path: Optional[str] = None
    output_dir: str = settings.OUTPUT_DIR
    seed: Optional[int] = None
    format: str = 'csv'
    trials: Optional[int] = None
    deep: bool = False
    workers: int = settings.MC_WORKERS
    r_a: Optional[float] = None
    s: Optional[float] = None
    k: Optional[Tuple[int, ...]] = None
    eta: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMAND_NAMES:
            raise LookupError(f'Unknown command: {self.command}')
        if self.format not in FORMATS:
            raise ConfigError(f'unknown format {self.format!r}', field='--format')
        if self.seed is not None and self.seed < 0:
            raise ConfigError('seed must be non-negative', field='--seed')
        if self.trials is not None and self.trials < 1:
            raise ConfigError('trials must be positive', field='--trials')

    @property
    def effective_seed(self) -> int:
        return settings.SIMULATION_SEED if self.seed is None else self.seed


@register_schema
@dataclass(frozen=True)
class FinalityGrid:
    """finality-table grid."""

    r_a: Tuple[float, ...] = field(default=DEFAULT_R_A, metadata={'key': 'table.r_a', 'help': 'adversary stakes (rows)'})
    confidence: Tuple[float, ...] = field(
        default=DEFAULT_CONFIDENCE, metadata={'key': 'table.confidence', 'help': '1 - eta (columns)'},
    )
    method: str = field(
        default=METHOD_MONTE_CARLO, metadata={'key': 'table.method', 'choices': METHODS, 'help': 'bound or monte_carlo'},
    )
    scale_factor: float = field(default=settings.SCALE_FACTOR, metadata={'key': 'table.s', 'help': 's'})
    slot_length_seconds: float = field(
        default=settings.SLOT_LENGTH_SECONDS, metadata={'key': 'table.t_sl', 'help': 't_sl'},
    )
    compare: bool = field(
        default=False, metadata={'key': 'table.compare', 'help': 'also write bound_vs_monte_carlo (bound k next to Monte Carlo k*)'},
    )

    def validate(self):
        if not self.r_a or not self.confidence:
            raise ConfigError('empty grid', field='table.r_a' if not self.r_a else 'table.confidence')
        if self.method not in METHODS:
            raise ConfigError(f'unknown method {self.method!r}', field='table.method')
        return self


@register_schema
@dataclass(frozen=True)
class SweepGrid:
    """s-sweep parameters."""

    r_a: float = field(default=0.3, metadata={'key': 'sweep.r_a', 'help': 'adversary stake'})
    eta: float = field(default=0.01, metadata={'key': 'sweep.eta', 'help': 'target violation probability'})
    s_values: Tuple[float, ...] = field(default=(2.0, 4.0, 8.0, 16.0), metadata={'key': 'sweep.s', 'help': 'scale factors'})


@register_schema
@dataclass(frozen=True)
class BorrowGrid:
    """borrow-power parameters: the attack comparison and the two gain surfaces."""

    r_a: float = field(default=0.45, metadata={'key': 'borrow.r_a', 'help': 'adversary stake'})
    scale_factor: float = field(default=settings.SCALE_FACTOR, metadata={'key': 'borrow.s', 'help': 's'})
    k_values: Tuple[int, ...] = field(default=(5, 10, 20), metadata={'key': 'borrow.k', 'help': 'depths compared'})
    grid_points: int = field(default=12, metadata={'key': 'borrow.grid_points', 'help': 'policy table resolution'})
    v_grid: Tuple[float, ...] = field(
        default=(0.1, 0.3, 0.5, 0.7, 0.9), metadata={'key': 'borrow.v', 'help': 'v values of the surfaces'},
    )
    t_grid: Tuple[float, ...] = field(
        default=(0.0, 0.1, 0.2, 0.4, 0.6), metadata={'key': 'borrow.t', 'help': 't values of the (v, t) surface'},
    )
    c_fractions: Tuple[float, ...] = field(
        default=(0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9),
        metadata={'key': 'borrow.c_fractions', 'help': 'c / alpha_h values of the (c, v) surface'},
    )
    surfaces: bool = field(default=True, metadata={'key': 'borrow.surfaces', 'help': 'also write the gain surfaces'})


@register_schema
@dataclass(frozen=True)
class SybilGrid:
    """sybil-check parameters."""

    alpha: float = field(default=0.8, metadata={'key': 'sybil.alpha', 'help': 'total stake power'})
    parts: Tuple[int, ...] = field(default=(1, 2, 4, 16), metadata={'key': 'sybil.parts', 'help': 'identity counts'})
    samples: int = field(default=1_000_000, metadata={'key': 'sybil.samples', 'help': 'slots sampled per m'})


@register_schema
@dataclass(frozen=True)
class CurveGrid:
    """eta-curve parameters."""

    r_a: float = field(default=0.3, metadata={'key': 'curve.r_a', 'help': 'adversary stake'})
    scale_factor: float = field(default=settings.SCALE_FACTOR, metadata={'key': 'curve.s', 'help': 's'})
    k_values: Tuple[int, ...] = field(
        default=(1, 2, 4, 6, 8, 10, 12, 14, 16), metadata={'key': 'curve.k', 'help': 'depths'},
    )


@register_schema
@dataclass(frozen=True)
class TpsGrid:
    """tps-table parameters."""

    tpb: int = field(default=settings.TPB, metadata={'key': 'tps.tpb', 'help': 'transactions per block'})
    slot_length_seconds: float = field(default=settings.SLOT_LENGTH_SECONDS, metadata={'key': 'tps.t_sl', 'help': 't_sl'})
    r_active: float = field(default=1.0, metadata={'key': 'tps.r_active', 'help': 'active stake fraction'})


@register_schema
@dataclass(frozen=True)
class BoundQuery:
    """bound parameters: give k for eta(k), eta for k*(eta)."""

    r_a: float = field(default=0.1, metadata={'key': 'bound.r_a', 'help': 'adversary stake'})
    scale_factor: float = field(default=settings.SCALE_FACTOR, metadata={'key': 'bound.s', 'help': 's'})
    k: Optional[int] = field(default=None, metadata={'key': 'bound.k', 'help': 'depth'})
    eta: Optional[float] = field(default=None, metadata={'key': 'bound.eta', 'help': 'target violation probability'})
    lifetime_slots: int = field(default=settings.LIFETIME_SLOTS, metadata={'key': 'bound.lifetime', 'help': 'L'})


def load_grid(cls, path: Optional[str] = None):
    """
    Grid dataclass from a grid file, or its defaults without one.

    Keys of other sections are ignored so one file can hold every grid.

    Raises:
        ConfigError: Unknown key within the section, bad value
    """
    if path is None:
        return build_config(cls, {})

    known = flat_fields(cls)
    sections = {key.split('.', 1)[0] for key in known}
    values, lines = read_config_file(path, known, sections=sections)
    return build_config(cls, values, lines)
