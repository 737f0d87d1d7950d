from core.simnet.config import AdversaryConfig, SimConfig, build_config, load_config, read_config_file
from core.simnet.engine import SimTrace, SlotRecord, run, run_trials, trial_configs
from core.simnet.export import export_metrics, export_trace, trace_rows
from core.simnet.metrics import MetricsReport, chain_quality, measure
from core.simnet.strategies import STRATEGIES, get_strategy

__all__ = [
    'AdversaryConfig',
    'MetricsReport',
    'STRATEGIES',
    'SimConfig',
    'SimTrace',
    'SlotRecord',
    'build_config',
    'chain_quality',
    'export_metrics',
    'export_trace',
    'get_strategy',
    'load_config',
    'measure',
    'read_config_file',
    'run',
    'run_trials',
    'trace_rows',
    'trial_configs',
]
