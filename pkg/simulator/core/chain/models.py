"""
Chain data model.

Chains are persistent: a Chain is a genesis block plus a pointer to the
tip ChainLink, and every link points at its parent. Extending a chain
allocates one link and shares the whole prefix, so competing forks in
the simulator cost memory only for their divergent suffixes. Each link
caches its length and the compensated running chain power.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, Mapping, Optional, Tuple

from config import settings
from core.chain.serialization import genesis_hash, header_hash
from core.exceptions import ValidationError
from core.power.metrics import PowerAccumulator
from core.primitives.beacon import EpochSeed
from core.primitives.keys import PUBLIC_KEY_BYTES
from core.primitives.merkle import merkle_root
from core.primitives.vrf import VrfOutput

logger = logging.getLogger(__name__)

HASH_BYTES = 32
STAKE_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ProtocolParams:
    """
    Protocol constants fixed at genesis.

    Attributes:
        scale_factor: s > 0
        slot_length_seconds: t_sl, equal to the propagation bound tau
        epoch_length_slots: R
        kappa: VRF output bit length
        confirm_depth: k, blocks kept off the confirmed prefix
        lifetime_slots: L, used for the lifetime failure bounds
    """

    scale_factor: float = settings.SCALE_FACTOR
    slot_length_seconds: float = settings.SLOT_LENGTH_SECONDS
    epoch_length_slots: int = settings.EPOCH_LENGTH_SLOTS
    kappa: int = settings.KAPPA
    confirm_depth: int = settings.CONFIRM_DEPTH
    lifetime_slots: int = settings.LIFETIME_SLOTS

    def __post_init__(self):
        if not self.scale_factor > 0:
            raise ValueError('scale_factor must be positive')
        if not self.slot_length_seconds > 0:
            raise ValueError('slot_length_seconds must be positive')
        if self.epoch_length_slots < 1:
            raise ValueError('epoch_length_slots must be at least 1')
        if not 0 < self.kappa <= 256 or self.kappa % 8:
            raise ValueError('kappa must be a multiple of 8 in (0, 256]')
        if self.confirm_depth < 1:
            raise ValueError('confirm_depth must be at least 1')
        if self.lifetime_slots < 1:
            raise ValueError('lifetime_slots must be at least 1')
        if self.scale_factor <= settings.SCALE_FACTOR_WARNING_THRESHOLD:
            logger.warning(
                'scale factor %s <= %s: finality depth grows quickly',
                self.scale_factor, settings.SCALE_FACTOR_WARNING_THRESHOLD,
            )


def _check_stake_items(items: Tuple[Tuple[bytes, float], ...]) -> None:
    for public_key, stake in items:
        if len(public_key) != PUBLIC_KEY_BYTES:
            raise ValueError('public keys must be 32 bytes')
        if not 0.0 < stake <= 1.0:
            raise ValueError('invalid stake')
    if len({pk for pk, _ in items}) != len(items):
        raise ValueError('duplicate public key in stake distribution')
    if abs(math.fsum(stake for _, stake in items) - 1.0) > STAKE_SUM_TOLERANCE:
        raise ValueError('stakes must sum to 1')


def _sorted_items(stakes: Mapping[bytes, float]) -> Tuple[Tuple[bytes, float], ...]:
    return tuple(sorted((bytes(pk), float(r)) for pk, r in stakes.items()))


@dataclass(frozen=True)
class GenesisBlock:
    """Slot-0 block: protocol parameters and the initial stake distribution."""

    protocol_params: ProtocolParams
    stake_items: Tuple[Tuple[bytes, float], ...]

    def __post_init__(self):
        _check_stake_items(self.stake_items)

    @classmethod
    def create(cls, protocol_params: ProtocolParams, stakes: Mapping[bytes, float]) -> 'GenesisBlock':
        return cls(protocol_params, _sorted_items(stakes))

    @property
    def stakes(self) -> Dict[bytes, float]:
        return dict(self.stake_items)

    @cached_property
    def hash(self) -> bytes:
        return genesis_hash(self)


@dataclass(frozen=True)
class BlockHeader:
    """
    Attributes:
        publisher_key: Public key of the creator
        publisher_stake: Creator's relative stake in the slot's snapshot
        slot: Slot number (>= 1)
        prev_hash: Hash of the previous header (genesis hash for slot 1)
        prev_null: Creator lacked the data of the previous block
        vrf: Creator's VRF output for this slot
        data_root: Merkle root over the transaction payloads
    """

    publisher_key: bytes
    publisher_stake: float
    slot: int
    prev_hash: bytes
    prev_null: bool
    vrf: VrfOutput
    data_root: bytes

    def __post_init__(self):
        if self.slot < 1:
            raise ValueError('header slot must be at least 1')
        if len(self.publisher_key) != PUBLIC_KEY_BYTES:
            raise ValueError('publisher_key must be 32 bytes')
        if len(self.prev_hash) != HASH_BYTES or len(self.data_root) != HASH_BYTES:
            raise ValueError('hashes must be 32 bytes')

    @cached_property
    def hash(self) -> bytes:
        return header_hash(self)


@dataclass(frozen=True)
class Block:
    """
    A header plus its payloads. `data is None` marks a null block: the
    holder has the header but never received the data.
    """

    header: BlockHeader
    data: Optional[Tuple[bytes, ...]] = None

    def __post_init__(self):
        if self.data is not None and merkle_root(self.data) != self.header.data_root:
            raise ValidationError('data root mismatch', {'slot': self.header.slot})

    @property
    def is_null(self) -> bool:
        return self.data is None

    @property
    def slot(self) -> int:
        return self.header.slot


@dataclass(frozen=True, eq=False)
class ChainLink:
    """One block of a persistent chain with cached length and running power."""

    block: Block
    parent: Optional['ChainLink']
    length: int
    power: PowerAccumulator


@dataclass(frozen=True, eq=False)
class Chain:
    """
    Genesis plus blocks for slots 1..len. Two chains are equal when they
    share genesis, length and tip hash.
    """

    genesis: GenesisBlock
    tip: Optional[ChainLink] = None

    def __len__(self) -> int:
        return 0 if self.tip is None else self.tip.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return (
            self.genesis.hash == other.genesis.hash
            and len(self) == len(other)
            and self.tip_hash == other.tip_hash
        )

    def __hash__(self) -> int:
        return hash((self.genesis.hash, len(self), self.tip_hash))

    def __repr__(self) -> str:
        return f'Chain(len={len(self)}, tip={self.tip_hash.hex()[:12]}, power={self.power:.6f})'

    def __reduce__(self):
        # pickled flat: the link list is deeper than the recursion limit
        items = tuple((link.block, link.power) for link in reversed(list(self.links())))
        return _rebuild_chain, (self.genesis, items)

    @property
    def params(self) -> ProtocolParams:
        return self.genesis.protocol_params

    @property
    def tip_hash(self) -> bytes:
        return self.genesis.hash if self.tip is None else self.tip.block.header.hash

    @property
    def tip_header(self) -> Optional[BlockHeader]:
        return None if self.tip is None else self.tip.block.header

    @property
    def power_accumulator(self) -> PowerAccumulator:
        return PowerAccumulator() if self.tip is None else self.tip.power

    @property
    def power(self) -> float:
        return self.power_accumulator.value

    def links(self) -> Iterator[ChainLink]:
        """Links from tip back to slot 1."""
        link = self.tip
        while link is not None:
            yield link
            link = link.parent

    @property
    def blocks(self) -> Tuple[Block, ...]:
        """Blocks in slot order, slot 1 first."""
        return tuple(reversed([link.block for link in self.links()]))

    def link_at(self, length: int) -> Optional[ChainLink]:
        """Link whose block sits at slot `length` (None for 0)."""
        if not 0 <= length <= len(self):
            raise IndexError('slot outside chain')
        if length == 0:
            return None
        for link in self.links():
            if link.length == length:
                return link
        raise IndexError('slot outside chain')  # pragma: no cover

    def block_at(self, slot: int) -> Block:
        if slot < 1:
            raise IndexError('genesis has no Block')
        return self.link_at(slot).block

    def hash_at(self, length: int) -> bytes:
        """Tip hash of the prefix of `length` blocks."""
        link = self.link_at(length)
        return self.genesis.hash if link is None else link.block.header.hash

    def prefix(self, length: int) -> 'Chain':
        """The first `length` blocks as a chain (shares links)."""
        return Chain(self.genesis, self.link_at(length))


def _rebuild_chain(genesis: GenesisBlock, items) -> Chain:
    link = None
    for length, (block, power) in enumerate(items, start=1):
        link = ChainLink(block, link, length, PowerAccumulator(*power))
    return Chain(genesis, link)


@dataclass(frozen=True)
class EpochContext:
    """Seed randomness and stake snapshot used to validate one epoch's blocks."""

    epoch: int
    seed: EpochSeed
    stake_items: Tuple[Tuple[bytes, float], ...]

    def __post_init__(self):
        if self.epoch < 0:
            raise ValueError('epoch must be non-negative')
        if self.seed.epoch != self.epoch:
            raise ValueError('seed belongs to another epoch')
        _check_stake_items(self.stake_items)

    @cached_property
    def stakes(self) -> Dict[bytes, float]:
        return dict(self.stake_items)
