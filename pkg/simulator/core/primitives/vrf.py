"""
Simulation-grade VRF

The uniform output is a keyed pseudo-random function of
(slot key, slot, epoch seed); the proof is a second keyed hash over the
same input plus the output. Verification recomputes both from the key
registry, so a tuple verifies if and only if vrf_eval produced it under
the matching key.
"""

from dataclasses import dataclass
from functools import lru_cache

from cryptography.hazmat.primitives import constant_time, hashes, hmac

from core.exceptions import KeyEvolutionError
from core.primitives.beacon import EpochSeed
from core.primitives.keys import KeyPair, derive_slot_key, lookup_master_secret

DEFAULT_KAPPA = 256
_PRF_BITS = 256


@dataclass(frozen=True)
class VrfOutput:
    """
    Attributes:
        uniform_output: Integer in [0, 2^kappa)
        proof: Opaque proof bytes
        kappa: Output bit length
    """

    uniform_output: int
    proof: bytes
    kappa: int = DEFAULT_KAPPA

    def __post_init__(self):
        if not 0 < self.kappa <= _PRF_BITS:
            raise ValueError(f'kappa must be in (0, {_PRF_BITS}]')
        if not 0 <= self.uniform_output < (1 << self.kappa):
            raise ValueError('uniform_output out of range for kappa')


def _prf(key: bytes, message: bytes) -> bytes:
    mac = hmac.HMAC(key, hashes.SHA256())
    mac.update(message)
    return mac.finalize()


def _vrf_input(slot: int, seed: EpochSeed) -> bytes:
    return (
        b'quicksync/vrf/'
        + slot.to_bytes(8, 'big')
        + seed.epoch.to_bytes(8, 'big')
        + seed.seed
    )


def _evaluate(slot_key: bytes, slot: int, seed: EpochSeed, kappa: int) -> VrfOutput:
    message = _vrf_input(slot, seed)
    digest = _prf(slot_key, b'out/' + message)
    uniform = int.from_bytes(digest, 'big') >> (_PRF_BITS - kappa)
    proof = _prf(slot_key, b'proof/' + message + digest)
    return VrfOutput(uniform_output=uniform, proof=proof, kappa=kappa)


def vrf_eval(key: KeyPair, slot: int, seed: EpochSeed, kappa: int = DEFAULT_KAPPA) -> VrfOutput:
    """
    Evaluate the VRF for one slot.

    Args:
        key: Key pair evolved to exactly `slot`
        slot: Slot number
        seed: Seed randomness of the slot's epoch
        kappa: Output bit length

    Returns:
        VrfOutput; repeated calls return identical output

    Raises:
        KeyEvolutionError: If the key is not evolved to `slot`
    """
    if key.key_slot_index != slot:
        raise KeyEvolutionError('key not evolved to slot')

    return _evaluate(key.current_slot_key, slot, seed, kappa)


@lru_cache(maxsize=65536)
def _expected(master_secret: bytes, slot: int, seed: EpochSeed, kappa: int) -> VrfOutput:
    return _evaluate(derive_slot_key(master_secret, slot), slot, seed, kappa)


def vrf_verify(output: VrfOutput, public_key: bytes, slot: int, seed: EpochSeed) -> bool:
    """
    Check that `output` was produced by vrf_eval under `public_key`.

    Returns False (never raises) for unknown keys or malformed input.
    """
    master_secret = lookup_master_secret(bytes(public_key))
    if master_secret is None:
        return False

    try:
        expected = _expected(master_secret, slot, seed, output.kappa)
        return (
            expected.uniform_output == output.uniform_output
            and constant_time.bytes_eq(expected.proof, bytes(output.proof))
        )
    except (TypeError, ValueError, AttributeError):
        return False
