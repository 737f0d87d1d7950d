"""
Chain Tests

Test genesis, header validation, chain extension and chain helpers.
"""

import math
import pickle
from dataclasses import replace

import pytest

from core.chain.ledger import (
    build_epoch_context,
    common_prefix_length,
    epoch_of,
    extend,
    snapshot_stakes,
    validate_chain,
    validate_header,
    with_block_data,
)
from core.chain.models import Block, GenesisBlock, ProtocolParams
from core.chain.serialization import chain_to_dict, encode_stake, serialize_header
from core.exceptions import ValidationError
from core.node.state import build_block, evolve_identity, new_node
from core.power.metrics import chain_power, header_power
from core.primitives.keys import generate_keypair
from core.primitives.vrf import VrfOutput

from tests.conftest import TEST_SEED


class TestGenesis:
    """Test genesis construction"""

    def test_stakes_must_sum_to_one(self, params, stakeholders):
        """Test a distribution not summing to 1 is rejected"""
        stakes = {kp.public_key: r / 2 for kp, r in stakeholders}

        with pytest.raises(ValueError, match='stakes must sum to 1'):
            GenesisBlock.create(params, stakes)

    def test_invalid_stake(self, params, stakeholders):
        """Test a non-positive stake is rejected"""
        (kp0, _), (kp1, _) = stakeholders[:2]

        with pytest.raises(ValueError, match='invalid stake'):
            GenesisBlock.create(params, {kp0.public_key: 1.0, kp1.public_key: 0.0})

    def test_hash_depends_on_params(self, genesis, stakeholders):
        """Test changing a protocol parameter changes the genesis hash"""
        other = GenesisBlock.create(replace(genesis.protocol_params, confirm_depth=5), genesis.stakes)

        assert other.hash != genesis.hash

    def test_invalid_params(self):
        """Test out-of-range protocol parameters are rejected"""
        with pytest.raises(ValueError):
            ProtocolParams(kappa=12)
        with pytest.raises(ValueError):
            ProtocolParams(scale_factor=0)


class TestExtend:
    """Test appending validated blocks"""

    def test_extend_grows_chain(self, start, grow):
        """Test every block adds one slot and its power"""
        chain = grow(start, [0, 1, 2])

        assert len(chain) == 3
        assert chain.blocks[2].header.prev_hash == chain.blocks[1].header.hash
        assert len(start) == 0

    def test_chain_power_is_sum_of_block_powers(self, start, grow):
        """Test chain power equals the sum of its block powers"""
        chain = grow(start, [0, 1, 2, 3, 0, 1])
        expected = math.fsum(header_power(b.header, 8) for b in chain.blocks)

        assert chain.power == pytest.approx(expected, abs=1e-12)
        assert chain_power(chain).value == pytest.approx(expected, abs=1e-12)

    def test_slot_gap(self, start, grow, stakeholders, context_for):
        """Test a block for the wrong slot is rejected"""
        chain = grow(start, [0])
        kp, stake = stakeholders[1]
        node = evolve_identity(new_node(kp, stake, chain, 1), 2)
        block = build_block(node, 2, [], context_for(chain, 2).seed)

        with pytest.raises(ValidationError) as exc:
            extend(start, block, context_for(start, 1))
        assert exc.value.reason == 'slot gap'

    def test_stake_mismatch(self, start, stakeholders, context_for):
        """Test a header claiming a wrong stake is rejected"""
        kp, _ = stakeholders[0]
        context = context_for(start, 1)
        node = evolve_identity(new_node(kp, 0.9, start, 1), 1)
        block = build_block(node, 1, [], context.seed)

        with pytest.raises(ValidationError) as exc:
            extend(start, block, context)
        assert exc.value.reason == 'stake mismatch'

    def test_unknown_publisher(self, start, context_for):
        """Test a key outside the stake snapshot is rejected"""
        stranger = generate_keypair(b'tests/chain/stranger')
        context = context_for(start, 1)
        node = evolve_identity(new_node(stranger, 0.1, start, 1), 1)

        with pytest.raises(ValidationError) as exc:
            extend(start, build_block(node, 1, [], context.seed), context)
        assert exc.value.reason == 'unknown publisher'

    def test_bad_vrf(self, start, stakeholders, context_for):
        """Test a header with a forged VRF output is rejected"""
        kp, stake = stakeholders[0]
        context = context_for(start, 1)
        node = evolve_identity(new_node(kp, stake, start, 1), 1)
        header = build_block(node, 1, [], context.seed).header
        forged = replace(header, vrf=VrfOutput(header.vrf.uniform_output ^ 1, header.vrf.proof, header.vrf.kappa))

        verdict = validate_header(forged, context, start.genesis)

        assert not verdict
        assert verdict.reason == 'bad vrf'

    def test_broken_link(self, start, grow, context_for):
        """Test a header not pointing at its predecessor is rejected"""
        chain = grow(start, [0, 1])
        header = chain.blocks[1].header

        verdict = validate_header(header, context_for(chain, 2), start.genesis)

        assert verdict.reason == 'broken link'

    def test_data_root_binding(self, start, grow, tx_payloads):
        """Test other data under the same header is rejected"""
        chain = grow(start, [0], txs=tx_payloads)
        header = chain.blocks[0].header

        with pytest.raises(ValidationError, match='data root mismatch'):
            Block(header, tuple(tx_payloads[:-1]))

    def test_validate_chain(self, start, grow, context_for):
        """Test every chain built by extend revalidates"""
        chain = grow(start, [0, 1, 2, 3] * 4)

        assert validate_chain(chain, lambda epoch: build_epoch_context(chain, epoch, TEST_SEED))


class TestChainHelpers:
    """Test prefixes, fork points, data back-fill and export"""

    def test_common_prefix(self, start, grow):
        """Test the fork point of two chains sharing three blocks"""
        base = grow(start, [0, 1, 2])
        a = grow(base, [0, 0])
        b = grow(base, [3])

        assert common_prefix_length(a, b) == 3
        assert common_prefix_length(a, a) == 5
        assert common_prefix_length(a, start) == 0

    def test_prefix(self, start, grow):
        """Test a prefix keeps the first blocks"""
        chain = grow(start, [0, 1, 2, 3])

        assert chain.prefix(2).tip_hash == chain.hash_at(2)
        assert chain.prefix(0) == start

    def test_null_block_keeps_power_and_backfills(self, start, grow, tx_payloads):
        """Test a null block counts its power and can be filled with its data later"""
        chain = grow(start, [0, 1], txs=tx_payloads)
        held = chain.blocks[0]
        stripped = replace(chain.tip.parent, block=Block(held.header, None))
        null_chain = replace(chain, tip=replace(chain.tip, parent=stripped))

        assert null_chain.blocks[0].is_null
        assert null_chain.power == chain.power

        filled = with_block_data(null_chain, 1, tx_payloads)
        assert not filled.blocks[0].is_null
        assert filled == chain

    def test_backfill_rejects_wrong_data(self, start, grow, tx_payloads, fake):
        """Test back-filled data must match the header"""
        chain = grow(start, [0], txs=tx_payloads)

        with pytest.raises(ValidationError):
            with_block_data(chain, 1, [fake.binary(length=8)])

    def test_pickle_keeps_chain(self, start, grow):
        """Test a pickled chain comes back equal with equal power"""
        chain = grow(start, [0, 1, 2, 3] * 3)
        copy = pickle.loads(pickle.dumps(chain))

        assert copy == chain
        assert copy.power == chain.power
        assert [b.header.hash for b in copy.blocks] == [b.header.hash for b in chain.blocks]

    def test_chain_to_dict(self, start, grow, tx_payloads):
        """Test the export carries one entry per block"""
        chain = grow(start, [0, 1], txs=tx_payloads)
        exported = chain_to_dict(chain)

        assert exported['length'] == 2
        assert exported['genesis_hash'] == start.genesis.hash.hex()
        assert [b['tx_count'] for b in exported['blocks']] == [len(tx_payloads)] * 2


class TestEpochs:
    """Test epochs and stake snapshots"""

    def test_epoch_of(self):
        """Test slots map onto epochs of length R"""
        assert epoch_of(0, 10) == 0
        assert epoch_of(9, 10) == 0
        assert epoch_of(10, 10) == 1

    def test_snapshot_unavailable(self, start):
        """Test epoch 2 needs the chain through the end of epoch 0"""
        with pytest.raises(ValidationError, match='snapshot unavailable'):
            snapshot_stakes(start, 2)

    def test_snapshot_uses_genesis_stakes(self, start, grow):
        """Test early epochs read the genesis distribution"""
        chain = grow(start, [0, 1, 2, 3] * 3)

        assert snapshot_stakes(chain, 2) == start.genesis.stakes

    def test_blocks_across_epoch_boundary(self, start, grow):
        """Test extension keeps validating past the first epochs"""
        chain = grow(start, [0, 1, 2, 3] * 6)

        assert len(chain) == 24
        assert epoch_of(len(chain), chain.params.epoch_length_slots) == 2


class TestSerialization:
    """Test the canonical header bytes"""

    def test_stake_fixed_point(self):
        """Test stakes encode with 12 decimals"""
        assert encode_stake(0.25) == (250_000_000_000).to_bytes(8, 'big')

    def test_header_bytes_depend_on_every_field(self, start, grow):
        """Test flipping prev_null changes the serialization and hash"""
        header = grow(start, [0]).blocks[0].header
        flipped = replace(header, prev_null=not header.prev_null)

        assert serialize_header(flipped) != serialize_header(header)
        assert flipped.hash != header.hash
