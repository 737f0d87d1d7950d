"""
Primitive Tests

Test key evolution, the VRF, the beacon and Merkle trees.
"""

import numpy as np
import pytest
from scipy import stats

from core.exceptions import KeyEvolutionError
from core.power.metrics import normalize_vrf
from core.primitives.beacon import beacon_seed
from core.primitives.keys import derive_slot_key, evolve_key, generate_keypair, register_key
from core.primitives.merkle import EMPTY_ROOT, merkle_proof, merkle_root, verify_merkle_proof
from core.primitives.vrf import VrfOutput, vrf_eval, vrf_verify


class TestKeys:
    """Test forward-evolving slot keys"""

    def test_generate_keypair_is_deterministic(self):
        """Test equal seed material gives equal keys"""
        a = generate_keypair(b'tests/keys/same')
        b = generate_keypair(b'tests/keys/same')

        assert a == b
        assert len(a.public_key) == 32

    def test_different_material_gives_different_keys(self):
        """Test distinct seed material gives distinct public keys"""
        assert generate_keypair(b'tests/keys/a').public_key != generate_keypair(b'tests/keys/b').public_key

    def test_evolve_forward(self):
        """Test evolving moves the slot key forward"""
        kp = generate_keypair(b'tests/keys/evolve')
        later = evolve_key(kp, 5)

        assert later.key_slot_index == 5
        assert later.current_slot_key == derive_slot_key(kp.master_secret, 5)
        assert later.current_slot_key != kp.current_slot_key

    def test_evolve_to_same_slot_is_noop(self):
        """Test evolving to the current slot returns the pair unchanged"""
        kp = evolve_key(generate_keypair(b'tests/keys/noop'), 3)

        assert evolve_key(kp, 3) is kp

    def test_cannot_rewind(self):
        """Test evolving backwards raises"""
        kp = evolve_key(generate_keypair(b'tests/keys/rewind'), 7)

        with pytest.raises(KeyEvolutionError, match='cannot rewind key'):
            evolve_key(kp, 6)

    def test_conflicting_registration(self, fake):
        """Test a public key cannot be bound to a second secret"""
        kp = generate_keypair(b'tests/keys/conflict')

        register_key(kp.public_key, kp.master_secret)
        with pytest.raises(ValueError):
            register_key(kp.public_key, fake.binary(length=32))


class TestVrf:
    """Test VRF evaluation and verification"""

    def test_eval_is_deterministic(self):
        """Test repeated evaluation gives identical output"""
        kp = evolve_key(generate_keypair(b'tests/vrf/det'), 4)
        seed = beacon_seed(0, 1)

        assert vrf_eval(kp, 4, seed) == vrf_eval(kp, 4, seed)

    def test_output_in_range(self):
        """Test the uniform output fits kappa bits"""
        kp = evolve_key(generate_keypair(b'tests/vrf/range'), 2)
        out = vrf_eval(kp, 2, beacon_seed(0, 1), kappa=64)

        assert 0 <= out.uniform_output < 2 ** 64

    def test_verify_accepts_own_output(self):
        """Test an output verifies under its key, slot and seed"""
        kp = evolve_key(generate_keypair(b'tests/vrf/ok'), 9)
        seed = beacon_seed(0, 1)
        out = vrf_eval(kp, 9, seed)

        assert vrf_verify(out, kp.public_key, 9, seed)

    def test_verify_rejects_other_slot_key_or_seed(self):
        """Test verification fails for another slot, key or epoch seed"""
        kp = evolve_key(generate_keypair(b'tests/vrf/bad'), 9)
        other = generate_keypair(b'tests/vrf/other')
        seed = beacon_seed(0, 1)
        out = vrf_eval(kp, 9, seed)

        assert not vrf_verify(out, kp.public_key, 10, seed)
        assert not vrf_verify(out, other.public_key, 9, seed)
        assert not vrf_verify(out, kp.public_key, 9, beacon_seed(0, 2))

    def test_verify_rejects_tampered_output(self):
        """Test a modified output or proof fails verification"""
        kp = evolve_key(generate_keypair(b'tests/vrf/tamper'), 1)
        seed = beacon_seed(0, 1)
        out = vrf_eval(kp, 1, seed)

        shifted = VrfOutput(out.uniform_output ^ 1, out.proof, out.kappa)
        forged = VrfOutput(out.uniform_output, bytes(32), out.kappa)

        assert not vrf_verify(shifted, kp.public_key, 1, seed)
        assert not vrf_verify(forged, kp.public_key, 1, seed)

    @pytest.mark.slow
    def test_outputs_are_uniform(self):
        """Test normalised outputs of distinct keys pass a KS test against U[0, 1]"""
        seed = beacon_seed(2)
        keys = (generate_keypair(f'tests/vrf/uniform/{i}'.encode(), 1) for i in range(100_000))
        samples = np.array([normalize_vrf(vrf_eval(kp, 1, seed).uniform_output, 256) for kp in keys])

        assert stats.kstest(samples, 'uniform').statistic < 0.01

    def test_verify_unknown_key(self, fake):
        """Test an unregistered key never verifies"""
        kp = evolve_key(generate_keypair(b'tests/vrf/unknown'), 1)
        seed = beacon_seed(0, 1)

        assert not vrf_verify(vrf_eval(kp, 1, seed), fake.binary(length=32), 1, seed)

    def test_eval_needs_evolved_key(self):
        """Test evaluating with a key for another slot raises"""
        kp = generate_keypair(b'tests/vrf/stale')

        with pytest.raises(KeyEvolutionError, match='key not evolved to slot'):
            vrf_eval(kp, 3, beacon_seed(0, 1))

    def test_kappa_range(self):
        """Test kappa outside (0, 256] is rejected"""
        with pytest.raises(ValueError):
            VrfOutput(0, b'', kappa=512)


class TestBeacon:
    """Test per-epoch seed randomness"""

    def test_deterministic_per_epoch(self):
        """Test the same (seed, epoch) gives the same randomness"""
        assert beacon_seed(3, 11) == beacon_seed(3, 11)

    def test_epochs_and_seeds_differ(self):
        """Test different epochs or simulation seeds give different randomness"""
        assert beacon_seed(3, 11).seed != beacon_seed(4, 11).seed
        assert beacon_seed(3, 11).seed != beacon_seed(3, 12).seed

    def test_negative_epoch(self):
        """Test a negative epoch is rejected"""
        with pytest.raises(ValueError):
            beacon_seed(-1, 0)


class TestMerkle:
    """Test Merkle roots and inclusion proofs"""

    def test_empty_root(self):
        """Test the empty list has the reserved root"""
        assert merkle_root([]) == EMPTY_ROOT
        assert merkle_root([b'']) != EMPTY_ROOT

    def test_every_item_proves(self, tx_payloads):
        """Test every item verifies against the root"""
        root = merkle_root(tx_payloads)

        for index, item in enumerate(tx_payloads):
            assert verify_merkle_proof(item, merkle_proof(tx_payloads, index), root)

    def test_foreign_item_fails(self, tx_payloads, fake):
        """Test a proof does not verify another item"""
        root = merkle_root(tx_payloads)
        proof = merkle_proof(tx_payloads, 2)

        assert not verify_merkle_proof(fake.binary(length=16), proof, root)

    def test_odd_node_is_promoted_not_duplicated(self):
        """Test [a, b, c] and [a, b, c, c] have different roots"""
        assert merkle_root([b'a', b'b', b'c']) != merkle_root([b'a', b'b', b'c', b'c'])

    def test_order_matters(self):
        """Test the root depends on item order"""
        assert merkle_root([b'a', b'b']) != merkle_root([b'b', b'a'])

    def test_proof_index_out_of_range(self, tx_payloads):
        """Test a proof for a missing index raises"""
        with pytest.raises(IndexError):
            merkle_proof(tx_payloads, len(tx_payloads))
