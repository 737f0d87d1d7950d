"""
Block Power and Chain Power

Block power is histogram matching of the block's normalised VRF output
onto the Sybil-resistant density f_alpha(x) = alpha * x^(alpha - 1),
whose CDF x^alpha has the closed-form inverse u -> u^(1/alpha).
Chain power is the sum of block powers, genesis excluded.

All comparisons between candidates go through is_better: higher power
wins, equal power falls back to the lexicographically smaller header
hash, which gives every node the same total order.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple


@dataclass(frozen=True)
class StakePower:
    """alpha = relative stake r times scale factor s."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError('stake power must be positive')


@dataclass(frozen=True, order=True)
class PowerValue:
    """Power of one block, in [0, 1]."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError('block power must lie in [0, 1]')


@dataclass(frozen=True, order=True)
class ChainPower:
    """Sum of the block powers of a chain."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError('chain power must be non-negative')


class PowerAccumulator(NamedTuple):
    """Neumaier running sum; `value` is the compensated total."""

    total: float = 0.0
    compensation: float = 0.0

    @property
    def value(self) -> float:
        return self.total + self.compensation


def accumulate(acc: PowerAccumulator, x: float) -> PowerAccumulator:
    """Add `x` to a compensated running sum."""
    total = acc.total + x
    if abs(acc.total) >= abs(x):
        compensation = acc.compensation + ((acc.total - total) + x)
    else:
        compensation = acc.compensation + ((x - total) + acc.total)
    return PowerAccumulator(total, compensation)


def stake_power(stake: float, scale: float) -> StakePower:
    """
    Scale a relative stake into stake power.

    Raises:
        ValueError: 'invalid stake' unless 0 < stake <= 1; non-positive scale
    """
    if not 0.0 < stake <= 1.0:
        raise ValueError('invalid stake')
    if not scale > 0:
        raise ValueError('scale factor must be positive')
    return StakePower(stake * scale)


def normalize_vrf(sigma_uro: int, kappa: int) -> float:
    """
    Map a kappa-bit VRF output onto [0, 1).

    Args:
        sigma_uro: Integer output, 0 <= sigma_uro < 2^kappa
        kappa: Bit length

    Returns:
        sigma_uro / 2^kappa, correctly rounded and strictly below 1. A float64
        holds 53 bits, so outputs within 2^-54 of 1 (for kappa = 256 this
        covers all of (1 - 2^-250, 1)) come back as the largest float below 1.

    Raises:
        ValueError: If sigma_uro is out of range
    """
    if kappa <= 0:
        raise ValueError('kappa must be positive')
    if not 0 <= sigma_uro < (1 << kappa):
        raise ValueError('sigma_uro must be below 2^kappa')

    # int / int is correctly rounded; the top of the range rounds up to 1.0
    normalized = sigma_uro / (1 << kappa)
    if normalized >= 1.0:
        return math.nextafter(1.0, 0.0)
    return normalized


def power_inverse_cdf(alpha: float) -> Callable[[float], float]:
    """Inverse of the target CDF x^alpha."""
    if not alpha > 0:
        raise ValueError('alpha must be positive')
    exponent = 1.0 / alpha
    return lambda u: u ** exponent


def histogram_match(u: float, target_inverse_cdf: Callable[[float], float]) -> float:
    """
    Remap a uniform sample through a target inverse CDF.

    If u ~ Uniform[0, 1] the result has the target CDF.

    Raises:
        ValueError: If u is outside [0, 1]
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError('u must lie in [0, 1]')
    return target_inverse_cdf(u)


def power_from_normalized(sigma_nuro: float, alpha: float) -> float:
    """sigma_nuro^(1/alpha); the hot path used by chains and simulators."""
    return sigma_nuro ** (1.0 / alpha)


def block_power(sigma_uro: int, kappa: int, stake: float, scale: float) -> PowerValue:
    """
    Power of a block from its publisher's VRF output and stake.

    Args:
        sigma_uro: Raw VRF output
        kappa: VRF bit length
        stake: Publisher's relative stake r, 0 < r <= 1
        scale: Scale factor s > 0

    Returns:
        PowerValue sigma_nuro^(1/alpha), alpha = r * s

    Example:
        block_power(1 << 255, 256, stake=0.125, scale=8)  # alpha = 1 -> 0.5
    """
    alpha = stake_power(stake, scale).alpha
    sigma_nuro = normalize_vrf(sigma_uro, kappa)
    return PowerValue(histogram_match(sigma_nuro, power_inverse_cdf(alpha)))


def header_power(header, scale: float) -> float:
    """Block power of a header (anything with publisher_stake and vrf)."""
    return block_power(
        header.vrf.uniform_output,
        header.vrf.kappa,
        header.publisher_stake,
        scale,
    ).value


def chain_power(chain) -> ChainPower:
    """
    Sum of block powers over blocks 1..len(chain), null blocks included.

    The sum is kept incrementally (compensated) on each chain link, so
    this is O(1).
    """
    return ChainPower(max(0.0, chain.power_accumulator.value))


def is_better(power_a: float, hash_a: bytes, power_b: float, hash_b: bytes) -> bool:
    """
    True iff candidate A strictly beats candidate B.

    Higher power wins; equal power goes to the smaller hash.
    """
    if power_a != power_b:
        return power_a > power_b
    return hash_a < hash_b
