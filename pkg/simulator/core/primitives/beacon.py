"""
Per-epoch randomness beacon.

A single trusted seed per epoch, derived from the global simulation
seed. Stands in for a multiparty seed computation.
"""

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from cryptography.hazmat.primitives import hashes, hmac

from config import settings


@dataclass(frozen=True)
class EpochSeed:
    """Seed randomness of one epoch."""

    epoch: int
    seed: bytes

    def __post_init__(self):
        if self.epoch < 0:
            raise ValueError('epoch must be non-negative')


def beacon_root_secret(simulation_seed: int) -> bytes:
    return hashlib.sha256(
        b'quicksync/beacon-root/' + simulation_seed.to_bytes(16, 'big', signed=True)
    ).digest()


@lru_cache(maxsize=1024)
def _seed_for(simulation_seed: int, epoch: int) -> bytes:
    mac = hmac.HMAC(beacon_root_secret(simulation_seed), hashes.SHA256())
    mac.update(b'epoch/' + epoch.to_bytes(8, 'big'))
    return mac.finalize()


def beacon_seed(epoch: int, simulation_seed: Optional[int] = None) -> EpochSeed:
    """
    Seed randomness for `epoch`.

    Args:
        epoch: Epoch number (non-negative)
        simulation_seed: Global seed; defaults to settings.SIMULATION_SEED

    Returns:
        EpochSeed, deterministic per (simulation seed, epoch)
    """
    if epoch < 0:
        raise ValueError('epoch must be non-negative')

    if simulation_seed is None:
        simulation_seed = settings.SIMULATION_SEED

    return EpochSeed(epoch=epoch, seed=_seed_for(simulation_seed, epoch))
