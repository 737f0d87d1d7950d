"""
Slot-synchronous simulator.

Slot length equals the propagation bound, so delivery collapses to:
every honest node ends slot l knowing the best honest chain of slot l
plus whatever the adversary showed it. One slot runs

    epoch rollover -> honest build -> adversary step -> delivery
    -> late data releases -> confirmation -> SlotRecord

and a whole run is a pure function of its SimConfig.
"""

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from core.chain.ledger import build_epoch_context, epoch_of, extend, genesis_chain, with_block_data
from core.chain.models import Chain, EpochContext, GenesisBlock
from core.exceptions import CheckpointConflictError, ValidationError
from core.node.state import NodeState, adopt, advance, build_block, confirm, evolve_identity, new_node, select_chain
from core.power.metrics import is_better
from core.primitives.keys import generate_keypair
from core.schema.introspection import register_schema
from core.simnet.config import SimConfig
from core.simnet.strategies import AdversaryActions, AdversaryIdentity, SlotView, get_strategy

logger = logging.getLogger(__name__)

HONEST = 'honest'
ADVERSARY = 'adversary'


@register_schema
@dataclass(frozen=True)
class SlotRecord:
    """One row of a trace; field order is the CSV column order."""

    slot: int = field(metadata={'help': 'slot number l'})
    epoch: int = field(metadata={'help': 'epoch of the slot'})
    active_stake: float = field(metadata={'help': 'honest stake that built a block'})
    honest_tip: str = field(metadata={'help': 'tip hash (hex) of the best chain held after delivery'})
    honest_power: float = field(metadata={'help': 'power of that chain'})
    adversary_power: Optional[float] = field(metadata={'help': "power of the adversary's best chain"})
    publisher_class: str = field(metadata={'help': "'honest' or 'adversary', tip publisher"})
    blocks_published: int = field(metadata={'help': 'honest candidates plus adversary blocks shown'})
    adversary_published: int = field(metadata={'help': 'adversary blocks shown'})
    adoptions: int = field(metadata={'help': 'nodes that switched held chain'})
    violations: int = field(metadata={'help': 'nodes that flagged a common-prefix violation'})
    reorg_depth: int = field(metadata={'help': 'deepest switch: blocks dropped from a held chain'})
    tip_null: bool = field(metadata={'help': 'tip of the best held chain is a null block'})
    unanimous: bool = field(metadata={'help': 'every honest node holds the same chain'})
    pre_reveal_unanimous: bool = field(metadata={'help': 'unanimity before adversary delivery'})
    split: bool = field(metadata={'help': 'adversary showed different chains to subsets'})
    fork_attempts_opened: int = field(metadata={'help': 'fork attempts opened'})
    fork_attempts_succeeded: int = field(metadata={'help': 'fork attempts that succeeded'})
    fork_attempts_resolved: int = field(metadata={'help': 'fork attempts decided'})
    checkpoint_rejections: int = field(metadata={'help': 'offers refused below a checkpoint'})
    confirmed: int = field(metadata={'help': 'length of the prefix every node has confirmed'})
    txs: int = field(metadata={'help': 'payloads carried by the tip block'})


@dataclass(frozen=True)
class SimTrace:
    """
    Result of one run.

    Attributes:
        config: The run's SimConfig
        records: One SlotRecord per slot, slots 1..horizon
        final_chain: Best chain held by an honest node at the end
        publisher_classes: Class of the publisher of every block on final_chain
        adversary_keys: Public keys controlled by the adversary
    """

    config: SimConfig
    records: Tuple[SlotRecord, ...]
    final_chain: Chain
    publisher_classes: Tuple[str, ...]
    adversary_keys: FrozenSet[bytes]

    @property
    def genesis_hash(self) -> bytes:
        return self.final_chain.genesis.hash

    @property
    def attempts_opened(self) -> int:
        return sum(r.fork_attempts_opened for r in self.records)

    @property
    def attempts_succeeded(self) -> int:
        return sum(r.fork_attempts_succeeded for r in self.records)

    @property
    def attempts_resolved(self) -> int:
        return sum(r.fork_attempts_resolved for r in self.records)


def honest_payloads(seed: int, slot: int, node: int, count: int) -> Tuple[bytes, ...]:
    """Deterministic opaque transactions of one honest block."""
    prefix = b'quicksync/tx/' + seed.to_bytes(16, 'big', signed=True) + slot.to_bytes(8, 'big') + node.to_bytes(4, 'big')
    return tuple(hashlib.sha256(prefix + j.to_bytes(4, 'big')).digest() for j in range(count))


def _best(chains) -> Chain:
    best = None
    for chain in chains:
        if best is None or is_better(chain.power, chain.tip_hash, best.power, best.tip_hash):
            best = chain
    return best


def _release(state: NodeState, slot: int, header_hash: bytes, data) -> NodeState:
    def fill(chain: Chain) -> Chain:
        if len(chain) >= slot and chain.hash_at(slot) == header_hash and chain.block_at(slot).is_null:
            return with_block_data(chain, slot, data)
        return chain

    held = fill(state.held_chain)
    known = frozenset(held if c == held else fill(c) for c in state.known_chains)
    return replace(state, held_chain=held, known_chains=known)


class Simulation:
    """Mutable driver around immutable node states; use run() instead."""

    def __init__(self, config: SimConfig):
        self.config = config.validate()
        params = config.params
        seed = config.rng_seed

        honest_keys = [
            generate_keypair(f'quicksync/honest/{seed}/{i}'.encode())
            for i in range(len(config.honest_stakes))
        ]
        stakes = {kp.public_key: r for kp, r in zip(honest_keys, config.honest_stakes)}

        strategy = config.adversary.strategy
        self.identity = None
        if config.adversary_stake > 0:
            parts = config.adversary.parts if strategy == 'sybil_split' else 1
            self.identity = AdversaryIdentity.create(
                seed, config.adversary_stake, parts, params.scale_factor, params.kappa,
            )
            for public_key in self.identity.public_keys:
                stakes[public_key] = self.identity.stake_each

        self.genesis = GenesisBlock.create(params, stakes)
        start = genesis_chain(self.genesis)
        self.nodes: List[NodeState] = [
            new_node(kp, r, start, params.confirm_depth, config.checkpoint_depth)
            for kp, r in zip(honest_keys, config.honest_stakes)
        ]
        self.adversary_keys = frozenset(self.identity.public_keys) if self.identity else frozenset()

        self._activity_rng = np.random.default_rng([seed, 0])
        self.adversary = get_strategy(strategy)(config, self.identity, np.random.default_rng([seed, 1]))
        self._contexts: Dict[int, EpochContext] = {}
        self._previous: Tuple[Chain, ...] = ()
        self.records: List[SlotRecord] = []

    def context(self, epoch: int) -> EpochContext:
        cached = self._contexts.get(epoch)
        if cached is None:
            reference = _best(n.held_chain for n in self.nodes)
            cached = build_epoch_context(reference, epoch, self.config.rng_seed)
            self._contexts[epoch] = cached
            if epoch > 0:
                logger.info('epoch %d: seed %s', epoch, cached.seed.seed.hex()[:12])
        return cached

    def active_nodes(self, slot: int) -> Tuple[List[int], float]:
        """Honest nodes building this slot and their total stake."""
        fraction = self.config.activity_at(slot)
        everyone = list(range(len(self.nodes)))
        if fraction >= 1.0:
            return everyone, self.config.honest_stake

        target = fraction * self.config.honest_stake
        chosen, total = [], 0.0
        for index in self._activity_rng.permutation(len(self.nodes)):
            chosen.append(int(index))
            total += self.nodes[index].stake
            if total >= target - 1e-12:
                break
        return sorted(chosen), total

    def _deliver(self, index: int, chain: Chain, tally: Dict[str, int]) -> None:
        node = self.nodes[index]
        old_length = len(node.held_chain)
        try:
            result = adopt(node, chain, self.context)
        except CheckpointConflictError:
            tally['checkpoint_rejections'] += 1
            return
        except ValidationError as exc:
            logger.warning('node %d rejected offered chain: %s', index, exc.reason)
            return
        self.nodes[index] = result.state
        if result.adopted:
            tally['adoptions'] += 1
            tally['reorg_depth'] = max(tally['reorg_depth'], old_length - result.fork_point)
            tally['violations'] += int(result.violation)

    def _unanimous(self) -> bool:
        first = self.nodes[0].held_chain
        return all(n.held_chain == first for n in self.nodes[1:])

    def step(self, slot: int) -> SlotRecord:
        epoch = epoch_of(slot, self.config.params.epoch_length_slots)
        context = self.context(epoch)

        self.nodes = [advance(n, slot) for n in self.nodes]
        base = select_chain((n.held_chain for n in self.nodes), slot)

        active, active_stake = self.active_nodes(slot)
        candidates = []
        for index in active:
            node = evolve_identity(self.nodes[index], slot)
            txs = honest_payloads(self.config.rng_seed, slot, index, self.config.tx_payloads_per_block)
            block = build_block(node, slot, txs, context.seed)
            chain = extend(node.held_chain, block, context)
            self.nodes[index] = adopt(node, chain).state
            candidates.append(chain)
        best_honest = _best(candidates)

        view = SlotView(
            slot=slot,
            context=self.context,
            base=base,
            candidates=tuple(candidates),
            builders=tuple(active),
            previous_candidates=self._previous,
            best_honest=best_honest,
            nodes=tuple(self.nodes),
        )
        actions: AdversaryActions = self.adversary.step(view)
        self._previous = tuple(candidates)

        tally = {'adoptions': 0, 'violations': 0, 'reorg_depth': 0, 'checkpoint_rejections': 0}
        for index in range(len(self.nodes)):
            self._deliver(index, best_honest, tally)
        pre_reveal = self._unanimous()

        for chain in actions.public:
            for index in range(len(self.nodes)):
                self._deliver(index, chain, tally)
        for index, chains in sorted(actions.reveals.items()):
            for chain in chains:
                self._deliver(index, chain, tally)

        for released_slot, header_hash, data in actions.releases:
            self.nodes = [_release(n, released_slot, header_hash, data) for n in self.nodes]
            logger.debug('slot %d: data of slot %d released', slot, released_slot)

        self.nodes = [confirm(n)[0] for n in self.nodes]

        held = _best(n.held_chain for n in self.nodes)
        tip = held.tip.block
        record = SlotRecord(
            slot=slot,
            epoch=epoch,
            active_stake=active_stake,
            honest_tip=held.tip_hash.hex(),
            honest_power=held.power,
            adversary_power=actions.private_power,
            publisher_class=ADVERSARY if tip.header.publisher_key in self.adversary_keys else HONEST,
            blocks_published=len(candidates) + actions.published,
            adversary_published=actions.published,
            adoptions=tally['adoptions'],
            violations=tally['violations'],
            reorg_depth=tally['reorg_depth'],
            tip_null=tip.is_null,
            unanimous=self._unanimous(),
            pre_reveal_unanimous=pre_reveal,
            split=actions.split,
            fork_attempts_opened=actions.attempts_opened,
            fork_attempts_succeeded=actions.attempts_succeeded,
            fork_attempts_resolved=actions.attempts_resolved,
            checkpoint_rejections=tally['checkpoint_rejections'],
            confirmed=min(n.confirmed_through for n in self.nodes),
            txs=0 if tip.is_null else len(tip.data),
        )
        if record.violations:
            logger.info('slot %d: %d nodes saw a common-prefix violation', slot, record.violations)
        logger.debug('slot %d: %s', slot, record)
        return record

    def run(self) -> SimTrace:
        config = self.config
        logger.info(
            'run: %d honest nodes, r_a=%s, strategy=%s, %d slots, seed %d',
            len(self.nodes), config.adversary_stake, config.adversary.strategy,
            config.horizon_slots, config.rng_seed,
        )
        for slot in range(1, config.horizon_slots + 1):
            self.records.append(self.step(slot))

        final = _best(n.held_chain for n in self.nodes)
        classes = tuple(
            ADVERSARY if block.header.publisher_key in self.adversary_keys else HONEST
            for block in final.blocks
        )
        logger.info('run finished: chain length %d, power %.4f', len(final), final.power)
        return SimTrace(
            config=config,
            records=tuple(self.records),
            final_chain=final,
            publisher_classes=classes,
            adversary_keys=self.adversary_keys,
        )


def run(config: SimConfig) -> SimTrace:
    """
    Simulate config.horizon_slots slots.

    Raises:
        ConfigError: If the config is invalid (before any slot runs)
    """
    return Simulation(config).run()


def trial_configs(config: SimConfig, trials: int) -> List[SimConfig]:
    """Copies of `config` with independent sub-seeds derived from its rng_seed."""
    if trials < 1:
        raise ValueError('trials must be at least 1')
    children = np.random.SeedSequence(config.rng_seed).spawn(trials)
    return [replace(config, rng_seed=int(child.generate_state(1)[0])) for child in children]


def run_trials(config: SimConfig, trials: int, workers: Optional[int] = None) -> List[SimTrace]:
    """
    Independent runs of one configuration, in a process pool when
    workers > 1. The result order follows the sub-seeds, not completion.
    """
    configs = trial_configs(config, trials)
    if workers is None or workers <= 1 or trials == 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))
