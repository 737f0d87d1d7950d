"""
Sybil-resistant density and its closed-form consequences.

With f_alpha(x) = alpha x^(alpha-1) the maximum of independent draws
with stake powers alpha_1..alpha_m has CDF x^(alpha_1 + ... + alpha_m),
so splitting stake across identities changes nothing about who wins.
"""

from typing import Iterable

import numpy as np


def sybil_pdf(alpha: float, x: float) -> float:
    """
    Density alpha * x^(alpha - 1) on (0, 1].

    Raises:
        ValueError: If alpha <= 0 or x is outside (0, 1]
    """
    if not alpha > 0:
        raise ValueError('alpha must be positive')
    if not 0.0 < x <= 1.0:
        raise ValueError('x must lie in (0, 1]')
    return alpha * x ** (alpha - 1.0)


def sybil_cdf(alpha: float, x: float) -> float:
    """CDF x^alpha on [0, 1]."""
    if not alpha > 0:
        raise ValueError('alpha must be positive')
    if not 0.0 <= x <= 1.0:
        raise ValueError('x must lie in [0, 1]')
    return x ** alpha


def max_power_cdf(alphas: Iterable[float], x: float) -> float:
    """CDF of the maximum of independent block powers: the product of x^alpha_i."""
    result = 1.0
    for alpha in alphas:
        result *= sybil_cdf(alpha, x)
    return result


def win_probability(alpha_1: float, alpha_2: float) -> float:
    """
    Probability that a draw with stake power alpha_1 beats one with alpha_2.

    Raises:
        ValueError: If either stake power is non-positive
    """
    if not (alpha_1 > 0 and alpha_2 > 0):
        raise ValueError('stake powers must be positive')
    return alpha_1 / (alpha_1 + alpha_2)


def sample_block_powers(rng: np.random.Generator, alpha: float, size) -> np.ndarray:
    """Draw block powers with CDF x^alpha (inverse-CDF transform of uniforms)."""
    if not alpha > 0:
        raise ValueError('alpha must be positive')
    return rng.random(size) ** (1.0 / alpha)


def sample_effective_power(
    rng: np.random.Generator,
    alpha: float,
    parts: int,
    size: int,
) -> np.ndarray:
    """
    Best block power of a stake power `alpha` split into `parts` equal identities.

    Args:
        rng: numpy Generator
        alpha: Total stake power
        parts: Number of identities (m >= 1)
        size: Number of slots to sample

    Returns:
        Array of `size` per-slot maxima
    """
    if parts < 1:
        raise ValueError('parts must be at least 1')
    draws = sample_block_powers(rng, alpha / parts, (size, parts))
    return draws.max(axis=1)
