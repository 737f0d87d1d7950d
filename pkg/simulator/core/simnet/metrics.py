"""
Trace metrics: chain growth, chain quality, common-prefix violations,
empirical violation rate and throughput.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from core.analysis.bounds import tps
from core.analysis.montecarlo import wilson_interval
from core.schema.introspection import register_schema
from core.simnet.engine import HONEST, SimTrace

logger = logging.getLogger(__name__)


@register_schema
@dataclass(frozen=True)
class MetricsReport:
    """Summary of one trace at depth k; field order is the CSV column order."""

    k: int = field(metadata={'help': 'depth the report is measured at'})
    slots: int = field(metadata={'help': 'slots simulated'})
    blocks: int = field(metadata={'help': 'length of the final chain'})
    zeta: float = field(metadata={'help': 'chain growth: blocks per slot'})
    upsilon_worst: float = field(metadata={'help': 'lowest honest block fraction over any k-window'})
    cp_violations: int = field(metadata={'help': 'slots in which some node dropped more than k blocks'})
    max_reorg_depth: int = field(metadata={'help': 'deepest chain switch seen'})
    attempts_opened: int = field(metadata={'help': 'adversary fork attempts opened'})
    attempts_resolved: int = field(metadata={'help': 'fork attempts decided'})
    attempts_succeeded: int = field(metadata={'help': 'fork attempts that succeeded'})
    eta_hat: Optional[float] = field(metadata={'help': 'succeeded / resolved (empty without attempts)'})
    eta_ci_low: Optional[float] = field(metadata={'help': 'Wilson 95% lower bound'})
    eta_ci_high: Optional[float] = field(metadata={'help': 'Wilson 95% upper bound'})
    tps_observed: float = field(metadata={'help': 'tpb * zeta / t_sl'})
    adversary_blocks: int = field(metadata={'help': 'adversary blocks on the final chain'})
    adversary_share: float = field(metadata={'help': 'adversary_blocks / blocks'})
    null_blocks: int = field(metadata={'help': 'null blocks on the final chain'})
    adoptions: int = field(metadata={'help': 'chain switches over all nodes and slots'})
    split_slots: int = field(metadata={'help': 'slots with a split reveal'})
    split_divergences: int = field(metadata={'help': 'splits not reconverged one slot later'})
    checkpoint_rejections: int = field(metadata={'help': 'offers refused below a checkpoint'})

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def chain_quality(honest_flags: np.ndarray, k: int) -> float:
    """
    Lowest fraction of honest blocks over every window of k consecutive
    blocks (the whole chain when it is shorter than k).
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    n = len(honest_flags)
    if n == 0:
        return 1.0
    window = min(k, n)
    sums = np.convolve(honest_flags.astype(float), np.ones(window), mode='valid')
    return float(sums.min() / window)


def measure(trace: SimTrace, k: int) -> MetricsReport:
    """
    Metrics of a finished trace at depth k.

    Args:
        trace: Output of run()
        k: Depth for violations and chain-quality windows

    Returns:
        MetricsReport; eta fields are None when no fork attempt was decided
    """
    if k < 1:
        raise ValueError('k must be at least 1')

    records = trace.records
    slots = len(records)
    chain = trace.final_chain
    blocks = len(chain)
    zeta = blocks / slots if slots else 0.0

    honest = np.array([c == HONEST for c in trace.publisher_classes], dtype=bool)
    adversary_blocks = int(blocks - honest.sum())

    resolved = trace.attempts_resolved
    succeeded = trace.attempts_succeeded
    if resolved:
        low, high = wilson_interval(succeeded, resolved)
        eta_hat = succeeded / resolved
    else:
        low = high = eta_hat = None

    split_divergences = sum(
        1 for previous, current in zip(records, records[1:])
        if previous.split and not current.unanimous
    )

    params = trace.config.params
    report = MetricsReport(
        k=k,
        slots=slots,
        blocks=blocks,
        zeta=zeta,
        upsilon_worst=chain_quality(honest, k),
        cp_violations=sum(1 for r in records if r.reorg_depth > k),
        max_reorg_depth=max((r.reorg_depth for r in records), default=0),
        attempts_opened=trace.attempts_opened,
        attempts_resolved=resolved,
        attempts_succeeded=succeeded,
        eta_hat=eta_hat,
        eta_ci_low=low,
        eta_ci_high=high,
        tps_observed=tps(trace.config.tpb, params.slot_length_seconds, zeta),
        adversary_blocks=adversary_blocks,
        adversary_share=adversary_blocks / blocks if blocks else 0.0,
        null_blocks=sum(1 for b in chain.blocks if b.is_null),
        adoptions=sum(r.adoptions for r in records),
        split_slots=sum(1 for r in records if r.split),
        split_divergences=split_divergences,
        checkpoint_rejections=sum(r.checkpoint_rejections for r in records),
    )
    if report.split_divergences:
        logger.warning('%d split(s) did not reconverge within one slot', report.split_divergences)
    return report
