"""
Block data download scheduling.

Nodes download only the data of the best header seen so far. A better
header preempts the download in progress; anything else is ignored.
"""

import enum
from dataclasses import dataclass, replace
from typing import FrozenSet, Optional, Tuple

from core.chain.models import BlockHeader
from core.power.metrics import header_power, is_better


class DownloadAction(str, enum.Enum):
    START = 'start'
    PREEMPT = 'preempt'
    IGNORE = 'ignore'


@dataclass(frozen=True)
class InProgress:
    header: BlockHeader
    fraction: float = 0.0


@dataclass(frozen=True)
class DownloadStack:
    """
    Attributes:
        scale_factor: s, for computing header powers
        best_known_header: Best header seen, None before the first offer
        in_progress: Download currently running, if any
        completed: Hashes of headers whose data is held
    """

    scale_factor: float
    best_known_header: Optional[BlockHeader] = None
    in_progress: Optional[InProgress] = None
    completed: FrozenSet[bytes] = frozenset()


def offer_header(stack: DownloadStack, header: BlockHeader) -> Tuple[DownloadStack, DownloadAction]:
    """
    React to a newly seen header.

    Returns:
        (new stack, action). START begins a download when none is running,
        PREEMPT replaces the running one, IGNORE keeps everything as is.
    """
    best = stack.best_known_header
    if best is not None:
        power = header_power(header, stack.scale_factor)
        best_power = header_power(best, stack.scale_factor)
        if not is_better(power, header.hash, best_power, best.hash):
            return stack, DownloadAction.IGNORE

    action = DownloadAction.PREEMPT if stack.in_progress is not None else DownloadAction.START
    return replace(stack, best_known_header=header, in_progress=InProgress(header)), action


def complete_download(stack: DownloadStack) -> DownloadStack:
    """Mark the running download as finished."""
    if stack.in_progress is None:
        return stack
    return replace(
        stack,
        in_progress=None,
        completed=stack.completed | {stack.in_progress.header.hash},
    )


def advance_download(stack: DownloadStack, fraction: float) -> DownloadStack:
    """
    Add `fraction` of the block data to the running download; completes
    it once the total reaches 1.
    """
    if fraction < 0:
        raise ValueError('fraction must be non-negative')
    if stack.in_progress is None:
        return stack

    total = stack.in_progress.fraction + fraction
    if total >= 1.0:
        return complete_download(stack)
    return replace(stack, in_progress=replace(stack.in_progress, fraction=total))


def has_data(stack: DownloadStack, header: BlockHeader) -> bool:
    return header.hash in stack.completed
