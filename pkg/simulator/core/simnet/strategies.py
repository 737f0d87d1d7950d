"""
Adversary strategies for the slot driver.

Every strategy sees one SlotView per slot, after the honest nodes have
built their candidates and before delivery, and answers with
AdversaryActions: chains published to everyone, chains revealed to
particular honest nodes, and late data releases. Strategies are looked
up by name through get_strategy().

The adversary's blocks carry real VRF outputs under its own keys, so an
aggregated adversary draws block powers with CDF x^(r_a s) exactly; the
sybil_split strategy spreads the same stake over m keys instead.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from core.analysis.borrow_power import policy_table
from core.analysis.bounds import variance_power
from core.analysis.montecarlo import race_horizon
from core.chain.ledger import common_prefix_length, epoch_of, extend
from core.chain.models import Block, BlockHeader, Chain, EpochContext
from core.node.state import NodeState
from core.power.metrics import block_power, is_better
from core.primitives.keys import KeyPair, evolve_key, generate_keypair
from core.primitives.merkle import merkle_root
from core.primitives.vrf import VrfOutput, vrf_eval

logger = logging.getLogger(__name__)

# Private forks further behind than this many per-slot standard deviations are dropped
ABANDON_SIGMAS = 12.0

BORROW_POLICY_GRID = 8

ContextFn = Callable[[int], EpochContext]


@dataclass(frozen=True)
class SlotView:
    """
    What the adversary knows at the end of the honest part of a slot.

    Attributes:
        slot: Current slot l
        context: Epoch context lookup (epoch -> EpochContext)
        base: Best chain of length l-1 held by any honest node
        candidates: Honest chains of length l built this slot
        builders: Node index of each candidate
        previous_candidates: Honest chains built in slot l-1
        best_honest: The candidate every honest node will receive
        nodes: Honest node states (after building)
    """

    slot: int
    context: ContextFn
    base: Chain
    candidates: Tuple[Chain, ...]
    builders: Tuple[int, ...]
    previous_candidates: Tuple[Chain, ...]
    best_honest: Chain
    nodes: Tuple[NodeState, ...]

    def context_for_slot(self, slot: int) -> EpochContext:
        return self.context(epoch_of(slot, self.base.params.epoch_length_slots))


@dataclass
class AdversaryActions:
    """
    Attributes:
        public: Chains delivered to every honest node
        reveals: Node index -> chains delivered to that node only
        releases: (slot, header hash, payloads) of withheld data sent now
        published: Adversary blocks made visible this slot
        split: Different chains were shown to different honest subsets
        attempts_opened / attempts_succeeded / attempts_resolved: Fork
            attempt bookkeeping for the empirical violation rate
        private_power: Power of the adversary's best private chain, if any
    """

    public: List[Chain] = field(default_factory=list)
    reveals: Dict[int, List[Chain]] = field(default_factory=dict)
    releases: List[Tuple[int, bytes, Tuple[bytes, ...]]] = field(default_factory=list)
    published: int = 0
    split: bool = False
    attempts_opened: int = 0
    attempts_succeeded: int = 0
    attempts_resolved: int = 0
    private_power: Optional[float] = None


def adversary_payloads(slot: int, count: int) -> Tuple[bytes, ...]:
    return tuple(
        hashlib.sha256(b'quicksync/adversary-tx/' + slot.to_bytes(8, 'big') + j.to_bytes(4, 'big')).digest()
        for j in range(count)
    )


class AdversaryIdentity:
    """
    The adversary's keys plus every VRF output it has evaluated.

    Outputs are cached per slot so blocks for past slots can be assembled
    later (private forks) without rewinding a key.
    """

    def __init__(self, keys: Sequence[KeyPair], stake_each: float, scale: float, kappa: int):
        self.keys = list(keys)
        self.stake_each = stake_each
        self.scale = scale
        self.kappa = kappa
        self._outputs: Dict[int, Tuple[VrfOutput, ...]] = {}

    @classmethod
    def create(cls, rng_seed: int, stake: float, parts: int, scale: float, kappa: int) -> 'AdversaryIdentity':
        keys = [
            generate_keypair(f'quicksync/adversary/{rng_seed}/{j}'.encode())
            for j in range(parts)
        ]
        return cls(keys, stake / parts, scale, kappa)

    @property
    def public_keys(self) -> Tuple[bytes, ...]:
        return tuple(kp.public_key for kp in self.keys)

    def outputs(self, slot: int, context: EpochContext) -> Tuple[VrfOutput, ...]:
        cached = self._outputs.get(slot)
        if cached is None:
            self.keys = [evolve_key(kp, slot) for kp in self.keys]
            cached = tuple(vrf_eval(kp, slot, context.seed, self.kappa) for kp in self.keys)
            self._outputs[slot] = cached
        return cached

    def forget_before(self, slot: int) -> None:
        for old in [s for s in self._outputs if s < slot]:
            del self._outputs[old]

    def best(self, slot: int, context: EpochContext) -> Tuple[int, float]:
        """Index of the strongest key for `slot` and its block power."""
        powers = [
            block_power(out.uniform_output, out.kappa, self.stake_each, self.scale).value
            for out in self.outputs(slot, context)
        ]
        index = int(np.argmax(powers))
        return index, powers[index]

    def block_on(
        self,
        chain: Chain,
        slot: int,
        context: EpochContext,
        payloads: Tuple[bytes, ...] = (),
        withhold: bool = False,
    ) -> Block:
        """Block for `slot` on top of `chain` from the adversary's best key."""
        index, _ = self.best(slot, context)
        tip = chain.tip
        header = BlockHeader(
            publisher_key=self.keys[index].public_key,
            publisher_stake=self.stake_each,
            slot=slot,
            prev_hash=chain.tip_hash,
            prev_null=tip is not None and tip.block.is_null,
            vrf=self.outputs(slot, context)[index],
            data_root=merkle_root(payloads),
        )
        return Block(header, None if withhold else payloads)

    def extend(self, chain: Chain, slot: int, context: EpochContext, **kwargs) -> Chain:
        return extend(chain, self.block_on(chain, slot, context, **kwargs), context)


class Adversary:
    """Silent adversary; the base of every strategy."""

    name = 'none'

    def __init__(self, config, identity: Optional[AdversaryIdentity], rng: np.random.Generator):
        self.config = config
        self.identity = identity
        self.rng = rng

    def step(self, view: SlotView) -> AdversaryActions:
        return AdversaryActions()


STRATEGIES: Dict[str, Type[Adversary]] = {}


def register_strategy(cls: Type[Adversary]) -> Type[Adversary]:
    STRATEGIES[cls.name] = cls
    return cls


def get_strategy(name: str) -> Type[Adversary]:
    """
    Strategy class by config name.

    Raises:
        LookupError: If no strategy has that name
    """
    try:
        return STRATEGIES[name]
    except KeyError:
        raise LookupError(f'Unknown strategy: {name}') from None


register_strategy(Adversary)


@register_strategy
class SybilSplit(Adversary):
    """Stake split over m keys; the best key's block is published on the common chain."""

    name = 'sybil_split'

    def step(self, view: SlotView) -> AdversaryActions:
        context = view.context_for_slot(view.slot)
        chain = self.identity.extend(view.base, view.slot, context)
        self.identity.forget_before(view.slot)
        return AdversaryActions(public=[chain], published=1, private_power=chain.power)


@register_strategy
class MissingData(Adversary):
    """
    Publishes headers without data. With a release delay d the payloads
    of slot l are sent at the end of slot l + d.
    """

    name = 'missing_data'

    def __init__(self, config, identity, rng):
        super().__init__(config, identity, rng)
        self._pending: List[Tuple[int, int, bytes, Tuple[bytes, ...]]] = []

    def step(self, view: SlotView) -> AdversaryActions:
        slot = view.slot
        context = view.context_for_slot(slot)
        payloads = adversary_payloads(slot, self.config.tx_payloads_per_block)
        chain = self.identity.extend(view.base, slot, context, payloads=payloads, withhold=True)
        self.identity.forget_before(slot)

        delay = self.config.adversary.release_delay
        if delay is not None:
            self._pending.append((slot + delay, slot, chain.tip_hash, payloads))

        due = [p for p in self._pending if p[0] <= slot]
        self._pending = [p for p in self._pending if p[0] > slot]

        return AdversaryActions(
            public=[chain],
            published=1,
            private_power=chain.power,
            releases=[(s, h, data) for _, s, h, data in due],
        )


@register_strategy
class SplitN(Adversary):
    """
    Extends several of the previous slot's honest chains with the same
    adversary slot output and shows each honest subset a different one.
    Splits are at least two slots apart so reconvergence can be observed.
    """

    name = 'split_n'

    def __init__(self, config, identity, rng):
        super().__init__(config, identity, rng)
        self._last_split = -2

    def step(self, view: SlotView) -> AdversaryActions:
        slot = view.slot
        if slot - self._last_split < 2 or not view.previous_candidates:
            return AdversaryActions()

        context = view.context_for_slot(slot)
        parents = sorted(set(view.previous_candidates), key=lambda c: (-c.power, c.tip_hash))
        parents = parents[:self.config.adversary.subsets]
        forks = [self.identity.extend(parent, slot, context) for parent in parents]
        self.identity.forget_before(slot)

        best = view.best_honest
        winning = [c for c in forks if is_better(c.power, c.tip_hash, best.power, best.tip_hash)]
        if not winning:
            return AdversaryActions()
        if len(winning) == 1:
            return AdversaryActions(public=winning, published=1, private_power=winning[0].power)

        subsets = self.config.adversary.subsets
        reveals = {
            index: [winning[(index % subsets) % len(winning)]]
            for index in range(len(view.nodes))
        }
        self._last_split = slot
        logger.info('slot %d: split %d honest subsets over %d chains', slot, subsets, len(winning))
        return AdversaryActions(
            reveals=reveals,
            published=len(winning),
            split=True,
            private_power=max(c.power for c in winning),
        )


def _race_sigma(config) -> float:
    s = config.params.scale_factor
    return math.sqrt(variance_power(config.adversary_stake * s) + variance_power(config.honest_stake * s))


@register_strategy
class PrivateFork(Adversary):
    """
    Withholds a private chain from every slot (sliding fork origins) and
    reveals it once it has outgrown the honest chain in power at least
    k + 1 blocks past the fork point, the shallowest fork that undoes a
    block confirmed at depth k. The driver's eta_hat at depth k therefore
    lines up with estimate_eta at k + 1.

    An attempt fails when it reaches the race horizon or falls more than
    ABANDON_SIGMAS standard deviations behind.
    """

    name = 'private_fork'

    def __init__(self, config, identity, rng):
        super().__init__(config, identity, rng)
        self.depth = config.fork_depth
        self.horizon = race_horizon(self.depth)
        self.abandon_at = ABANDON_SIGMAS * _race_sigma(config)
        self._running = 0.0
        self._origins: List[Tuple[int, float]] = []

    def step(self, view: SlotView) -> AdversaryActions:
        slot = view.slot
        context = view.context_for_slot(slot)
        best = view.best_honest

        self._origins.append((slot - 1, self._running))
        actions = AdversaryActions(attempts_opened=1)

        _, v = self.identity.best(slot, context)
        h = best.power - best.prefix(slot - 1).power
        self._running += v - h

        succeeded = [
            (self._running - p, slot - f, f) for f, p in self._origins
            if slot - f >= self.depth + 1 and self._running - p > 0
        ]
        if succeeded:
            _, depth, fork_point = max(succeeded)
            chain = best.prefix(fork_point)
            for j in range(fork_point + 1, slot + 1):
                chain = self.identity.extend(chain, j, view.context_for_slot(j))
            actions.public.append(chain)
            actions.published = slot - fork_point
            actions.attempts_succeeded = actions.attempts_resolved = len(succeeded)
            actions.private_power = chain.power
            logger.info('slot %d: private fork from %d revealed (depth %d)', slot, fork_point, depth)
            self._origins = []
            self.identity.forget_before(slot)
            return actions

        kept = []
        for f, p in self._origins:
            if slot - f >= self.horizon or self._running - p < -self.abandon_at:
                actions.attempts_resolved += 1
            else:
                kept.append((f, p))
        self._origins = kept

        if kept:
            lead = self._running - min(p for _, p in kept)
            actions.private_power = best.power + lead
            self.identity.forget_before(min(f for f, _ in kept) + 1)
        else:
            self.identity.forget_before(slot + 1)
        return actions


@register_strategy
class BorrowPower(Adversary):
    """
    Single private fork that borrows honest power: while it leads by
    t >= 0 and v + t < 1 (v its next block power), the fork is shown to
    honest nodes holding stake power close to the optimal c*(v, t), who
    then build on it. After each slot the adversary keeps whichever of
    its own extension and the honest extensions of its fork leads the
    public chain by most. A lead held k + 1 blocks past the fork point
    is revealed to everyone.
    """

    name = 'borrow_power'

    def __init__(self, config, identity, rng):
        super().__init__(config, identity, rng)
        self.depth = config.fork_depth
        self.horizon = race_horizon(self.depth)
        self.abandon_at = ABANDON_SIGMAS * _race_sigma(config)
        s = config.params.scale_factor
        self.alpha_h = config.honest_stake * s
        self._node_power = [r * s for r in config.honest_stakes]
        self._policy = None
        self._private: Optional[Chain] = None
        self._fork_point = 0
        self._public: Optional[Chain] = None

    def policy(self):
        if self._policy is None:
            self._policy = policy_table(self.alpha_h, BORROW_POLICY_GRID)
        return self._policy

    def coalition(self, c_star: float) -> List[int]:
        """Greedy honest subset, largest stake first, with stake power at most c*."""
        chosen, total = [], 0.0
        order = sorted(range(len(self._node_power)), key=lambda i: (-self._node_power[i], i))
        for index in order:
            if total + self._node_power[index] <= c_star:
                chosen.append(index)
                total += self._node_power[index]
        return chosen

    def _depth(self, chain: Chain, best: Chain) -> Tuple[int, int]:
        fork_point = common_prefix_length(chain, best)
        return len(chain) - fork_point, fork_point

    def step(self, view: SlotView) -> AdversaryActions:
        slot = view.slot
        context = view.context_for_slot(slot)
        best = view.best_honest
        actions = AdversaryActions()

        public = self._public or view.base
        fork = self._private
        if fork is None or len(fork) != slot - 1:
            fork, self._fork_point = public, slot - 1
            actions.attempts_opened = 1

        options = [self.identity.extend(fork, slot, context)]
        options += [c for c in view.candidates if c.hash_at(slot - 1) == fork.tip_hash]

        def rank(chain):
            depth, _ = self._depth(chain, best)
            return (chain.power - best.power, depth)

        chosen = max(options, key=rank)
        lead = chosen.power - best.power
        depth, fork_point = self._depth(chosen, best)
        self._public = best
        self._private = None

        if depth == 0:
            # the public chain now runs through the fork (or the fork lost)
            merged_depth = slot - 1 - self._fork_point if best.hash_at(slot - 1) == fork.tip_hash else 0
            actions.attempts_resolved = 1
            if fork is not public and merged_depth >= self.depth + 1:
                actions.attempts_succeeded = 1
            self.identity.forget_before(slot + 1)
            return actions

        actions.private_power = chosen.power
        if lead > 0 and depth >= self.depth + 1:
            actions.public.append(chosen)
            actions.published = depth
            actions.attempts_resolved = actions.attempts_succeeded = 1
            logger.info('slot %d: borrow-power fork from %d revealed (depth %d)', slot, fork_point, depth)
            self.identity.forget_before(slot + 1)
            return actions

        if lead < -self.abandon_at or depth >= self.horizon:
            actions.attempts_resolved = 1
            self.identity.forget_before(slot + 1)
            return actions

        self._private, self._fork_point = chosen, fork_point
        self.identity.forget_before(fork_point + 1)

        _, v_next = self.identity.best(slot + 1, view.context_for_slot(slot + 1))
        if lead >= 0 and v_next + lead < 1.0:
            c_star = float(self.policy()([[v_next, lead]])[0])
            for index in self.coalition(max(c_star, 0.0)):
                actions.reveals.setdefault(index, []).append(chosen)
        return actions
