"""
Closed-form finality bounds.

Per slot the adversary's block power W_A has CDF x^alpha_A and the best
honest block W_H has CDF x^alpha_H. The honest drift per slot is
lambda = E[W_H] - E[W_A] and |W_A - W_H| <= 1 < K = 1 + lambda, so
Bernstein's inequality bounds the chance that the adversary is ahead
after M slots by exp(-c M). Summing over every M >= k gives the
per-fork-point bound eta <= e^(-ck) / (1 - e^(-c)).
"""

import math
from dataclasses import dataclass

from core.exceptions import AnalysisError


@dataclass(frozen=True)
class BoundParams:
    """
    Attributes:
        alpha_a: Adversary stake power s * r_a
        alpha_h: Honest stake power s * (1 - r_a)
        lam: Drift lambda
        k_bound: K = 1 + lambda
        sigma_sq: Var(W_A) + Var(W_H)
        c_exponent: c = lambda^2 / (2 (sigma^2 + K lambda / 3))
    """

    alpha_a: float
    alpha_h: float
    lam: float
    k_bound: float
    sigma_sq: float
    c_exponent: float


def mean_power(alpha: float) -> float:
    """E[W] for CDF x^alpha."""
    return alpha / (alpha + 1.0)


def variance_power(alpha: float) -> float:
    """Var(W) = alpha/(alpha+2) - (alpha/(alpha+1))^2."""
    return alpha / (alpha + 2.0) - mean_power(alpha) ** 2


def bound_params_from_powers(alpha_a: float, alpha_h: float) -> BoundParams:
    """
    Bound parameters for arbitrary stake powers.

    Raises:
        AnalysisError: 'no honest advantage' when lambda <= 0
    """
    if alpha_a < 0 or not alpha_h > 0:
        raise ValueError('stake powers must be non-negative (honest positive)')

    lam = mean_power(alpha_h) - (mean_power(alpha_a) if alpha_a > 0 else 0.0)
    if not lam > 0:
        raise AnalysisError('no honest advantage')

    k_bound = 1.0 + lam
    sigma_sq = variance_power(alpha_h) + (variance_power(alpha_a) if alpha_a > 0 else 0.0)
    c_exponent = lam * lam / (2.0 * (sigma_sq + k_bound * lam / 3.0))

    return BoundParams(
        alpha_a=alpha_a,
        alpha_h=alpha_h,
        lam=lam,
        k_bound=k_bound,
        sigma_sq=sigma_sq,
        c_exponent=c_exponent,
    )


def bound_params(r_a: float, s: float) -> BoundParams:
    """
    Bernstein parameters for adversary stake r_a at scale factor s.

    Raises:
        AnalysisError: 'no honest advantage' if r_a >= 0.5
        ValueError: If r_a is outside (0, 1) or s <= 0

    Example:
        bp = bound_params(0.1, 8)
        bp.lam, bp.sigma_sq, bp.c_exponent  # 0.433604, 0.099822, 0.30619
    """
    if not 0.0 < r_a < 1.0:
        raise ValueError('r_a must lie in (0, 1)')
    if not s > 0:
        raise ValueError('scale factor must be positive')
    if r_a >= 0.5:
        raise AnalysisError('no honest advantage')

    return bound_params_from_powers(s * r_a, s * (1.0 - r_a))


def bernstein_tail(bp: BoundParams, m: int) -> float:
    """Single-horizon tail exp(-M lambda^2/2 / (sigma^2 + K lambda/3))."""
    if m < 1:
        raise ValueError('M must be at least 1')
    return math.exp(-m * bp.lam ** 2 / 2.0 / (bp.sigma_sq + bp.k_bound * bp.lam / 3.0))


def eta_bound(bp: BoundParams, k: int) -> float:
    """e^(-ck) / (1 - e^(-c))."""
    if k < 1:
        raise ValueError('k must be at least 1')
    c = bp.c_exponent
    return math.exp(-c * k) / -math.expm1(-c)


def epsilon_cp(bp: BoundParams, k: int, lifetime: int) -> float:
    """Common-prefix failure bound over `lifetime` slots: L * eta."""
    if lifetime < 1:
        raise ValueError('lifetime must be at least 1')
    return lifetime * eta_bound(bp, k)


def epsilon_lp(bp: BoundParams, k: int, lifetime: int) -> float:
    """Ledger (persistence + liveness) failure bound: 2 * epsilon_cp."""
    return 2.0 * epsilon_cp(bp, k, lifetime)


def chain_quality_bound(bp: BoundParams, k: int, lifetime: int) -> float:
    """Probability that chain quality 1/k fails: at most epsilon_cp."""
    return epsilon_cp(bp, k, lifetime)


def solve_k(bp: BoundParams, eta_target: float) -> int:
    """
    Smallest k with eta_bound(bp, k) <= eta_target.

    Raises:
        ValueError: If eta_target is outside (0, 1)
    """
    if not 0.0 < eta_target < 1.0:
        raise ValueError('eta_target must lie in (0, 1)')

    c = bp.c_exponent
    k = max(1, math.ceil(-math.log(eta_target * -math.expm1(-c)) / c))

    # the closed form can land one off through rounding
    while k > 1 and eta_bound(bp, k - 1) <= eta_target:
        k -= 1
    while eta_bound(bp, k) > eta_target:
        k += 1
    return k


def tps(tpb: float, t_sl: float, zeta: float) -> float:
    """
    Transactions per second: tpb * zeta / t_sl.

    Example:
        tps(2000, 40, 1.0)  # 50.0
    """
    if not tpb > 0 or not t_sl > 0:
        raise ValueError('tpb and t_sl must be positive')
    if not 0.0 <= zeta <= 1.0:
        raise ValueError('zeta must lie in [0, 1]')
    return tpb * zeta / t_sl


def finality_minutes(k: int, t_sl: float) -> float:
    """t_f = k * t_sl, in minutes."""
    return k * t_sl / 60.0
