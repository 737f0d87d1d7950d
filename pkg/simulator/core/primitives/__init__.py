from core.primitives.beacon import EpochSeed, beacon_seed
from core.primitives.keys import KeyPair, derive_slot_key, evolve_key, generate_keypair
from core.primitives.merkle import EMPTY_ROOT, merkle_proof, merkle_root, verify_merkle_proof
from core.primitives.vrf import VrfOutput, vrf_eval, vrf_verify

__all__ = [
    'EMPTY_ROOT',
    'EpochSeed',
    'KeyPair',
    'VrfOutput',
    'beacon_seed',
    'derive_slot_key',
    'evolve_key',
    'generate_keypair',
    'merkle_proof',
    'merkle_root',
    'verify_merkle_proof',
    'vrf_eval',
    'vrf_verify',
]
