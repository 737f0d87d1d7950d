"""
Forward-Evolving Slot Keys

Each stakeholder holds a public key, a master secret and the key for
the current slot only. Keys evolve forward one way: once a KeyPair is
evolved to slot l, nothing in this package can produce a VRF output for
an earlier slot with it (posterior-corruption resistance by construction).

This is simulation grade. The public key -> master secret registry below
stands in for real public-key verification: vrf_verify recomputes
outputs from it instead of checking a 2-Hash-DH proof.
"""

import hashlib
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from core.exceptions import KeyEvolutionError

PUBLIC_KEY_BYTES = 32
SLOT_KEY_BYTES = 32

_SLOT_KEY_INFO = b'quicksync/slot-key/'
_MASTER_INFO = b'quicksync/master-secret'
_PUBLIC_KEY_PREFIX = b'quicksync/public-key/'

# Write-once at registration, read-only afterwards
_registry: Dict[bytes, bytes] = {}
_registry_lock = threading.Lock()


@dataclass(frozen=True)
class KeyPair:
    """
    A stakeholder's key material at one point in time.

    Attributes:
        public_key: Fixed-width identifier (32 bytes)
        master_secret: Seed of every slot key
        current_slot_key: Key for `key_slot_index` only
        key_slot_index: Slot the pair is currently evolved to
    """

    public_key: bytes
    master_secret: bytes = field(repr=False)
    current_slot_key: bytes = field(repr=False)
    key_slot_index: int = 0

    def __post_init__(self):
        if len(self.public_key) != PUBLIC_KEY_BYTES:
            raise ValueError('public_key must be 32 bytes')
        if self.key_slot_index < 0:
            raise ValueError('key_slot_index must be non-negative')


def derive_slot_key(master_secret: bytes, slot: int) -> bytes:
    """
    Derive the key for one slot from a master secret.

    Args:
        master_secret: The stakeholder's master secret
        slot: Slot number (non-negative)

    Returns:
        32-byte slot key, a deterministic function of (master_secret, slot)
    """
    if slot < 0:
        raise ValueError('slot must be non-negative')

    hkdf = HKDF(
        algorithm=hashes.SHA256(),
        length=SLOT_KEY_BYTES,
        salt=None,
        info=_SLOT_KEY_INFO + slot.to_bytes(8, 'big'),
    )
    return hkdf.derive(master_secret)


def public_key_for(master_secret: bytes) -> bytes:
    """Public identifier bound to a master secret."""
    return hashlib.sha256(_PUBLIC_KEY_PREFIX + master_secret).digest()


def register_key(public_key: bytes, master_secret: bytes) -> None:
    """
    Record a key pair in the verification registry.

    Registering the same pair twice is a no-op.

    Raises:
        ValueError: If the public key is already bound to another secret
    """
    with _registry_lock:
        existing = _registry.get(public_key)
        if existing is not None and existing != master_secret:
            raise ValueError(f'public key {public_key.hex()[:16]} already registered')
        _registry[public_key] = master_secret


def lookup_master_secret(public_key: bytes) -> Optional[bytes]:
    """Return the registered master secret, or None for unknown keys."""
    return _registry.get(public_key)


def generate_keypair(seed_material: bytes, slot: int = 0) -> KeyPair:
    """
    Deterministically create (and register) a key pair.

    Args:
        seed_material: Any bytes; equal material gives equal keys
        slot: Slot the returned pair is evolved to

    Returns:
        KeyPair evolved to `slot`

    Example:
        kp = generate_keypair(b'node-0')
        kp = evolve_key(kp, 5)
    """
    hkdf = HKDF(
        algorithm=hashes.SHA256(),
        length=32,
        salt=None,
        info=_MASTER_INFO,
    )
    master_secret = hkdf.derive(seed_material)
    public_key = public_key_for(master_secret)

    register_key(public_key, master_secret)

    return KeyPair(
        public_key=public_key,
        master_secret=master_secret,
        current_slot_key=derive_slot_key(master_secret, slot),
        key_slot_index=slot,
    )


def evolve_key(kp: KeyPair, to_slot: int) -> KeyPair:
    """
    Move a key pair forward to `to_slot`.

    The previous slot key is dropped from the returned value.

    Raises:
        KeyEvolutionError: If `to_slot` is before the current slot
    """
    if to_slot < kp.key_slot_index:
        raise KeyEvolutionError('cannot rewind key')

    if to_slot == kp.key_slot_index:
        return kp

    return replace(
        kp,
        current_slot_key=derive_slot_key(kp.master_secret, to_slot),
        key_slot_index=to_slot,
    )
