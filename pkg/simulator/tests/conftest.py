"""
Test Fixtures

Pytest fixtures provide reusable test data and setup.
"""

from dataclasses import replace
from pathlib import Path

import pytest
from faker import Faker

from core.chain.ledger import build_epoch_context, epoch_of, extend, genesis_chain
from core.chain.models import GenesisBlock, ProtocolParams
from core.node.state import build_block, evolve_identity, new_node
from core.primitives.keys import generate_keypair
from core.simnet.config import AdversaryConfig, SimConfig

TEST_SEED = 4242


@pytest.fixture
def fake():
    """Seeded Faker for opaque payloads and random bytes"""
    Faker.seed(TEST_SEED)
    return Faker()


@pytest.fixture
def tx_payloads(fake):
    """A handful of opaque transactions"""
    return [fake.sentence().encode() for _ in range(5)]


@pytest.fixture
def params():
    """Small protocol parameters: short epochs, shallow confirmation"""
    return ProtocolParams(epoch_length_slots=10, confirm_depth=3)


@pytest.fixture
def stakeholders():
    """Four key pairs with their relative stakes"""
    stakes = (0.4, 0.3, 0.2, 0.1)
    keys = [generate_keypair(f'tests/stakeholder/{i}'.encode()) for i in range(len(stakes))]
    return list(zip(keys, stakes))


@pytest.fixture
def genesis(params, stakeholders):
    """Genesis block over the four stakeholders"""
    return GenesisBlock.create(params, {kp.public_key: r for kp, r in stakeholders})


@pytest.fixture
def start(genesis):
    """Chain holding only the genesis block"""
    return genesis_chain(genesis)


@pytest.fixture
def context_for():
    """Epoch context lookup for chains of a fixture genesis"""
    def lookup(chain, slot):
        return build_epoch_context(chain, epoch_of(slot, chain.params.epoch_length_slots), TEST_SEED)
    return lookup


@pytest.fixture
def grow(stakeholders, context_for):
    """
    Extend a chain slot by slot.

    grow(chain, publishers, txs=()) appends one block per entry of
    `publishers` (stakeholder indexes) and returns the new chain.
    """
    def _grow(chain, publishers, txs=()):
        for index in publishers:
            kp, stake = stakeholders[index]
            slot = len(chain) + 1
            context = context_for(chain, slot)
            node = evolve_identity(new_node(kp, stake, chain, 1), slot)
            chain = extend(chain, build_block(node, slot, list(txs), context.seed), context)
        return chain
    return _grow


@pytest.fixture
def sim_config():
    """
    SimConfig factory with small defaults.

    sim_config(strategy='private_fork', adversary_stake=0.3, ...) spreads
    the honest stake evenly over `nodes` nodes.
    """
    def make(nodes=5, adversary_stake=0.0, strategy='none', horizon=60, confirm_depth=3, **overrides):
        adversary_fields = {
            key: overrides.pop(key)
            for key in ('fork_depth', 'parts', 'subsets', 'release_delay')
            if key in overrides
        }
        honest = (1.0 - adversary_stake) / nodes
        stakes = (honest,) * (nodes - 1)
        stakes += (1.0 - adversary_stake - sum(stakes),)
        config = SimConfig(
            honest_stakes=stakes,
            adversary_stake=adversary_stake,
            adversary=AdversaryConfig(strategy=strategy, **adversary_fields),
            params=ProtocolParams(epoch_length_slots=20, confirm_depth=confirm_depth),
            horizon_slots=horizon,
            rng_seed=TEST_SEED,
        )
        return replace(config, **overrides)
    return make


@pytest.fixture
def write_config(tmp_path):
    """Write KEY=VALUE lines to a config file and return its path"""
    def write(lines, name='run.env') -> Path:
        path = tmp_path / name
        path.write_text('\n'.join(lines) + '\n')
        return path
    return write
