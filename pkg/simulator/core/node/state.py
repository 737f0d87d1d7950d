"""
Honest node state machine.

One slot of an honest node:
  1. select_chain: among known chains of length l-1 take the most powerful
  2. build_block on top of it with the key evolved to slot l
  3. after delivery, adopt whatever chains arrived and confirm every
     block at least k deep

NodeState is immutable; every operation returns a new state.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from core.chain.ledger import common_prefix_length, validate_chain
from core.chain.models import Block, BlockHeader, Chain
from core.exceptions import (
    CheckpointConflictError,
    KeyEvolutionError,
    NoValidChainError,
    ValidationError,
)
from core.power.metrics import is_better
from core.primitives.beacon import EpochSeed
from core.primitives.keys import KeyPair, evolve_key
from core.primitives.merkle import merkle_root
from core.primitives.vrf import vrf_eval

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeState:
    """
    Attributes:
        identity: Key pair, evolved forward slot by slot
        stake: Relative stake r of this node
        known_chains: The node's view (chains received or built)
        held_chain: Chain selected by the chain selection rule
        confirm_depth: k
        confirmed_through: Highest slot already reported by confirm()
        checkpoint: Frozen prefix length; forks below it are rejected
        checkpoint_depth: When set, advance() moves the checkpoint to
            len(held_chain) - checkpoint_depth
        violations: Number of common-prefix violations seen by this node
    """

    identity: KeyPair
    stake: float
    known_chains: FrozenSet[Chain]
    held_chain: Chain
    confirm_depth: int
    confirmed_through: int = 0
    checkpoint: int = 0
    checkpoint_depth: Optional[int] = None
    violations: int = field(default=0, compare=False)

    @property
    def public_key(self) -> bytes:
        return self.identity.public_key

    @property
    def confirmed_prefix(self) -> int:
        return max(0, len(self.held_chain) - self.confirm_depth)


class Adoption(NamedTuple):
    """Result of adopt(): new state plus what happened."""

    state: NodeState
    adopted: bool
    violation: bool
    fork_point: int


def new_node(
    identity: KeyPair,
    stake: float,
    chain: Chain,
    confirm_depth: int,
    checkpoint_depth: Optional[int] = None,
) -> NodeState:
    """
    Create a node that knows only `chain` (normally the genesis chain).

    Raises:
        ValueError: If confirm_depth < 1 or the stake is out of range
    """
    if confirm_depth < 1:
        raise ValueError('confirm_depth must be at least 1')
    if not 0.0 < stake <= 1.0:
        raise ValueError('invalid stake')
    if checkpoint_depth is not None and checkpoint_depth < confirm_depth:
        raise ValueError('checkpoint_depth must be at least confirm_depth')

    return NodeState(
        identity=identity,
        stake=stake,
        known_chains=frozenset({chain}),
        held_chain=chain,
        confirm_depth=confirm_depth,
        checkpoint_depth=checkpoint_depth,
    )


def _better_chain(a: Chain, b: Chain) -> bool:
    return is_better(a.power, a.tip_hash, b.power, b.tip_hash)


def select_chain(view: Iterable[Chain], slot: int) -> Chain:
    """
    Chain selection rule.

    Args:
        view: Chains known to the node
        slot: Slot about to be built; valid chains have length slot - 1

    Returns:
        The valid-length chain of highest power (smaller tip hash on ties)

    Raises:
        NoValidChainError: If no chain has length slot - 1
    """
    best = None
    for chain in view:
        if len(chain) != slot - 1:
            continue
        if best is None or _better_chain(chain, best):
            best = chain

    if best is None:
        raise NoValidChainError('no valid chain for slot')
    return best


def evolve_identity(state: NodeState, slot: int) -> NodeState:
    """Evolve the node's key forward to `slot` (never backwards)."""
    return replace(state, identity=evolve_key(state.identity, slot))


def advance(state: NodeState, slot: int) -> NodeState:
    """
    Roll the node over to `slot`.

    Drops known chains too short to be built on, moves the checkpoint
    when a checkpoint depth is configured, and selects the held chain.
    """
    if state.checkpoint_depth is not None:
        checkpoint = max(state.checkpoint, len(state.held_chain) - state.checkpoint_depth)
    else:
        checkpoint = state.checkpoint

    known = frozenset(c for c in state.known_chains if len(c) >= slot - 1)
    if not known:
        known = state.known_chains

    held = select_chain(known, slot)
    return replace(state, known_chains=known, held_chain=held, checkpoint=checkpoint)


def build_block(
    state: NodeState,
    slot: int,
    txs: Sequence[bytes],
    seed: EpochSeed,
) -> Block:
    """
    Build this node's block for `slot` on top of its held chain.

    Args:
        state: Node state whose identity is evolved to `slot`
        slot: Slot number l
        txs: Ordered opaque transactions ([] gives an empty, non-null block)
        seed: Seed randomness of the slot's epoch

    Returns:
        Block with full data; prev_null is set when the node lacks the
        data of its tip block

    Raises:
        KeyEvolutionError: If the key is not evolved to `slot`
        NoValidChainError: If the held chain is not of length slot - 1
    """
    if state.identity.key_slot_index != slot:
        raise KeyEvolutionError('key not evolved to slot')

    held = state.held_chain
    if len(held) != slot - 1:
        raise NoValidChainError('no valid chain for slot')

    tip = held.tip
    data = tuple(txs)
    header = BlockHeader(
        publisher_key=state.public_key,
        publisher_stake=state.stake,
        slot=slot,
        prev_hash=held.tip_hash,
        prev_null=tip is not None and tip.block.is_null,
        vrf=vrf_eval(state.identity, slot, seed, kappa=held.params.kappa),
        data_root=merkle_root(data),
    )
    return Block(header, data)


def confirm(state: NodeState) -> Tuple[NodeState, List[Block]]:
    """
    Confirm every block at least k deep not confirmed before.

    Returns:
        (new state, newly confirmed blocks in slot order)
    """
    upto = state.confirmed_prefix
    if upto <= state.confirmed_through:
        return state, []

    blocks = [
        link.block
        for link in state.held_chain.links()
        if state.confirmed_through < link.length <= upto
    ]
    blocks.reverse()
    return replace(state, confirmed_through=upto), blocks


def adopt(state: NodeState, offered: Chain, contexts=None) -> Adoption:
    """
    Add an offered chain to the view and re-run chain selection.

    A longer chain always replaces the held one; equal-length chains
    compete on power. A violation is flagged when the new held chain
    forks off below the confirmed prefix.

    Args:
        state: Current node state
        offered: Chain shown to the node
        contexts: Epoch contexts; when given, the offered suffix above the
            fork point is revalidated

    Raises:
        CheckpointConflictError: If the offered chain forks below the checkpoint
        ValidationError: If revalidation fails
    """
    held = state.held_chain
    fork_point = common_prefix_length(offered, held)

    if fork_point < state.checkpoint:
        raise CheckpointConflictError(
            f'offered chain forks at {fork_point}, below checkpoint {state.checkpoint}'
        )

    if len(offered) < len(held) or offered in state.known_chains:
        return Adoption(state, False, False, fork_point)

    if contexts is not None:
        verdict = validate_chain(offered, contexts, from_length=fork_point)
        if not verdict:
            raise ValidationError(verdict.reason)

    known = state.known_chains | {offered}
    replaces = len(offered) > len(held) or _better_chain(offered, held)
    if not replaces:
        return Adoption(replace(state, known_chains=known), False, False, fork_point)

    violation = fork_point < state.confirmed_prefix
    violations = state.violations
    if violation:
        violations += 1
        logger.info(
            'node %s: common-prefix violation, fork at %d below confirmed %d',
            state.public_key.hex()[:8], fork_point, state.confirmed_prefix,
        )

    new_state = replace(state, known_chains=known, held_chain=offered, violations=violations)
    return Adoption(new_state, True, violation, fork_point)
