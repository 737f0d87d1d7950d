"""
Ledger operations: header validation, chain extension, epoch contexts.

Validation order for a header is fixed (broken link, slot mismatch,
unknown publisher, stake mismatch, bad vrf) so every node reports the
same reason code for the same header.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

from config import settings
from core.chain.models import (
    Block,
    BlockHeader,
    Chain,
    ChainLink,
    EpochContext,
    GenesisBlock,
)
from core.exceptions import ValidationError
from core.power.metrics import accumulate, header_power
from core.primitives.beacon import beacon_seed
from core.primitives.vrf import vrf_verify

logger = logging.getLogger(__name__)

STAKE_TOLERANCE = 1e-12

ContextSource = Union[Mapping[int, EpochContext], Callable[[int], EpochContext]]


@dataclass(frozen=True)
class HeaderVerdict:
    """Outcome of validate_header; truthy when valid."""

    valid: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.valid


VALID = HeaderVerdict(True)


def epoch_of(slot: int, epoch_length: int) -> int:
    """Epoch containing `slot`; slot 0 (genesis) is in epoch 0."""
    if slot < 0:
        raise ValueError('slot must be non-negative')
    if epoch_length < 1:
        raise ValueError('epoch length must be at least 1')
    return slot // epoch_length


def genesis_chain(genesis: GenesisBlock) -> Chain:
    """The chain holding only the genesis block."""
    return Chain(genesis)


def validate_header(
    header: BlockHeader,
    context: EpochContext,
    prev: Union[BlockHeader, GenesisBlock],
) -> HeaderVerdict:
    """
    Check one header against its predecessor and its epoch context.

    Args:
        header: Header to check
        context: Context of epoch_of(header.slot)
        prev: Predecessor header, or the genesis block for slot 1

    Returns:
        HeaderVerdict; `reason` is one of 'broken link', 'slot mismatch',
        'epoch mismatch', 'unknown publisher', 'stake mismatch', 'bad vrf'
    """
    if isinstance(prev, GenesisBlock):
        expected_hash, expected_slot = prev.hash, 1
    else:
        expected_hash, expected_slot = prev.hash, prev.slot + 1

    if header.prev_hash != expected_hash:
        return HeaderVerdict(False, 'broken link')
    if header.slot != expected_slot:
        return HeaderVerdict(False, 'slot mismatch')
    if context.seed.epoch != context.epoch:
        return HeaderVerdict(False, 'epoch mismatch')

    snapshot_stake = context.stakes.get(header.publisher_key)
    if snapshot_stake is None:
        return HeaderVerdict(False, 'unknown publisher')
    if abs(snapshot_stake - header.publisher_stake) > STAKE_TOLERANCE:
        return HeaderVerdict(False, 'stake mismatch')

    if not vrf_verify(header.vrf, header.publisher_key, header.slot, context.seed):
        return HeaderVerdict(False, 'bad vrf')

    return VALID


def _link(chain: Chain, block: Block) -> Chain:
    scale = chain.params.scale_factor
    link = ChainLink(
        block=block,
        parent=chain.tip,
        length=len(chain) + 1,
        power=accumulate(chain.power_accumulator, header_power(block.header, scale)),
    )
    return Chain(chain.genesis, link)


def extend(chain: Chain, block: Block, context: EpochContext) -> Chain:
    """
    Append one block.

    Returns:
        New chain of length len(chain) + 1; `chain` is unchanged

    Raises:
        ValidationError: 'slot gap' if the slot is not len(chain) + 1,
            otherwise the reason code of validate_header
    """
    if block.header.slot != len(chain) + 1:
        raise ValidationError('slot gap', {'expected': len(chain) + 1, 'got': block.header.slot})
    if context.epoch != epoch_of(block.header.slot, chain.params.epoch_length_slots):
        raise ValidationError('epoch mismatch', {'slot': block.header.slot})

    prev = chain.tip_header or chain.genesis
    verdict = validate_header(block.header, context, prev)
    if not verdict:
        raise ValidationError(verdict.reason, {'slot': block.header.slot})

    return _link(chain, block)


def extend_trusted(chain: Chain, block: Block) -> Chain:
    """
    Append a block whose header was already validated.

    Used when re-assembling a chain from headers this process produced
    itself (fork materialisation, data back-fill). Only the link is checked.
    """
    if block.header.slot != len(chain) + 1 or block.header.prev_hash != chain.tip_hash:
        raise ValidationError('broken link', {'slot': block.header.slot})
    return _link(chain, block)


def snapshot_stakes(chain: Chain, epoch: int) -> Mapping[bytes, float]:
    """
    Stake distribution used by `epoch`.

    Epochs 0 and 1 use genesis stakes; epoch e >= 2 reads the ledger state
    at the last slot of epoch e-2. Transactions are opaque payloads here,
    so the state never moves off genesis.

    Raises:
        ValidationError: 'snapshot unavailable' if the chain is too short
    """
    if epoch < 0:
        raise ValueError('epoch must be non-negative')
    if epoch >= 2:
        snapshot_slot = (epoch - 1) * chain.params.epoch_length_slots - 1
        if len(chain) < snapshot_slot:
            raise ValidationError('snapshot unavailable', {'epoch': epoch, 'needs': snapshot_slot})
    return chain.genesis.stakes


def build_epoch_context(
    chain: Chain,
    epoch: int,
    simulation_seed: Optional[int] = None,
) -> EpochContext:
    """Seed plus stake snapshot for `epoch` as seen from `chain`."""
    if simulation_seed is None:
        simulation_seed = settings.SIMULATION_SEED
    stakes = snapshot_stakes(chain, epoch)
    return EpochContext(
        epoch=epoch,
        seed=beacon_seed(epoch, simulation_seed),
        stake_items=tuple(sorted(stakes.items())),
    )


def _context_for(contexts: ContextSource, epoch: int) -> EpochContext:
    if callable(contexts):
        return contexts(epoch)
    return contexts[epoch]


def validate_chain(chain: Chain, contexts: ContextSource, from_length: int = 0) -> HeaderVerdict:
    """
    Validate every header above `from_length`.

    Returns:
        VALID, or the first failing verdict
    """
    epoch_length = chain.params.epoch_length_slots
    prev = chain.genesis if from_length == 0 else chain.block_at(from_length).header
    for block in chain.blocks[from_length:]:
        context = _context_for(contexts, epoch_of(block.slot, epoch_length))
        verdict = validate_header(block.header, context, prev)
        if not verdict:
            return verdict
        prev = block.header
    return VALID


def common_prefix_length(a: Chain, b: Chain) -> int:
    """
    Length of the longest shared prefix.

    Raises:
        ValueError: If the chains have different genesis blocks
    """
    if a.genesis.hash != b.genesis.hash:
        raise ValueError('chains do not share genesis')

    link_a, link_b = a.tip, b.tip
    while link_a is not None and link_b is not None and link_a.length > link_b.length:
        link_a = link_a.parent
    while link_a is not None and link_b is not None and link_b.length > link_a.length:
        link_b = link_b.parent

    while link_a is not None and link_b is not None:
        if link_a is link_b or link_a.block.header.hash == link_b.block.header.hash:
            return link_a.length
        link_a, link_b = link_a.parent, link_b.parent
    return 0


def with_block_data(chain: Chain, slot: int, data: Sequence[bytes]) -> Chain:
    """
    Fill in the data of the block at `slot` (turning a null block into a
    full one). Headers, hashes and powers are unchanged.

    Raises:
        ValidationError: 'data root mismatch' if the payloads do not match
    """
    target = chain.link_at(slot)
    if target is None:
        raise IndexError('genesis has no data')

    filled = Block(target.block.header, tuple(data))

    above = []
    link = chain.tip
    while link is not target:
        above.append(link)
        link = link.parent

    rebuilt = ChainLink(filled, target.parent, target.length, target.power)
    for old in reversed(above):
        rebuilt = ChainLink(old.block, rebuilt, old.length, old.power)
    return Chain(chain.genesis, rebuilt)
