"""
Borrow-power attack analysis.

Setting for one slot: the adversary's chain leads the honest chain by t
and its own block this slot has power v. It shows its chain to honest
nodes holding stake power c; they build on it (best block w, CDF x^c)
while the other honest nodes, stake power a = alpha_h - c, build on the
honest chain (best block u, CDF x^a). Relative to not attacking, the
adversary gains in two regions and the honest side in three:

    c1_h  w < v,  u < w + t
    c4_h  v <= u < v + t,  w >= v
    c5_h  u >= v + t,  w >= u - t
    c5_a  w >= v,  v + t <= u < w + t
    c6_a  v <= w < 1 - t,  u >= w + t

Inner integrals are closed form (incomplete power moments); the outer
one is done by quad after substituting y = w^c (or y = u^a), which
removes the endpoint singularity of the density.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import RegularGridInterpolator

from core.analysis.montecarlo import EtaEstimate, make_estimate, race_horizon, run_chunks, success_counts
from core.exceptions import AnalysisError

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-8
C_GRID_POINTS = 64
TERMS = ('c1_h', 'c4_h', 'c5_h', 'c5_a', 'c6_a')


@dataclass(frozen=True)
class BorrowPowerInstance:
    """
    Attributes:
        a: Honest stake power not shown the adversary's chain
        c_frac: Honest stake power shown the chain
        v: Adversary block power this slot, 0 < v < 1
        t: Adversary chain-power lead, 0 <= t < 1
    """

    a: float
    c_frac: float
    v: float
    t: float

    def __post_init__(self):
        if not (self.a > 0 and self.c_frac > 0):
            raise ValueError('a and c_frac must be positive')
        if not 0.0 < self.v < 1.0:
            raise ValueError('v must lie in (0, 1)')
        if not 0.0 <= self.t < 1.0:
            raise ValueError('t must lie in [0, 1)')
        if self.v + self.t >= 1.0:
            raise AnalysisError('adversary abstains')

    @property
    def alpha_h(self) -> float:
        return self.a + self.c_frac


@dataclass(frozen=True)
class BorrowPowerGains:
    c1_h: float
    c4_h: float
    c5_h: float
    c5_a: float
    c6_a: float

    @property
    def adversary(self) -> float:
        return self.c5_a + self.c6_a

    @property
    def honest(self) -> float:
        return self.c1_h + self.c4_h + self.c5_h

    @property
    def f_eag(self) -> float:
        return self.adversary - self.honest

    def as_dict(self) -> Dict[str, float]:
        return {
            'c1_h': self.c1_h,
            'c4_h': self.c4_h,
            'c5_h': self.c5_h,
            'c5_a': self.c5_a,
            'c6_a': self.c6_a,
            'f_eag': self.f_eag,
        }


def _clip(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _mass(alpha: float, lo: float, hi: float) -> float:
    """P(lo < X < hi) for CDF x^alpha."""
    lo, hi = _clip(lo), _clip(hi)
    if hi <= lo:
        return 0.0
    return hi ** alpha - lo ** alpha


def _moment(alpha: float, lo: float, hi: float) -> float:
    """E[X; lo < X < hi] for CDF x^alpha."""
    lo, hi = _clip(lo), _clip(hi)
    if hi <= lo:
        return 0.0
    return alpha / (alpha + 1.0) * (hi ** (alpha + 1.0) - lo ** (alpha + 1.0))


def _outer(alpha: float, lo: float, hi: float, inner, kink: Optional[float] = None) -> float:
    """Integral of alpha x^(alpha-1) inner(x) over (lo, hi), via y = x^alpha."""
    lo, hi = _clip(lo), _clip(hi)
    if hi <= lo:
        return 0.0
    exponent = 1.0 / alpha
    points = None
    if kink is not None and lo < kink < hi:
        points = [kink ** alpha]
    value, _ = integrate.quad(
        lambda y: inner(y ** exponent),
        lo ** alpha,
        hi ** alpha,
        epsabs=QUAD_EPSABS,
        limit=200,
        points=points,
    )
    return value


def borrow_power_gains(inst: BorrowPowerInstance) -> BorrowPowerGains:
    """
    Expected gains of both sides for one slot of the attack.

    Raises:
        AnalysisError: 'adversary abstains' if v + t >= 1 (raised when the
            instance is built)
    """
    a, c, v, t = inst.a, inst.c_frac, inst.v, inst.t

    def c1(w):
        hi = w + t
        return t * _mass(a, 0.0, w) + hi * _mass(a, w, hi) - _moment(a, w, hi)

    def c4(u):
        return t * _mass(c, u, 1.0) + (t - u) * _mass(c, v, u) + _moment(c, v, u)

    def c5h(u):
        return _moment(c, u - t, u) + (t - u) * _mass(c, u - t, u) + t * _mass(c, u, 1.0)

    def c5a(w):
        hi = min(w + t, 1.0)
        return _moment(a, v + t, hi) - (v + t) * _mass(a, v + t, hi)

    def c6a(w):
        return (w - v) * _mass(a, w + t, 1.0)

    return BorrowPowerGains(
        c1_h=_outer(c, 0.0, v, c1),
        c4_h=_outer(a, v, v + t, c4),
        c5_h=_outer(a, v + t, 1.0, c5h),
        c5_a=_outer(c, v, 1.0, c5a, kink=1.0 - t),
        c6_a=_outer(c, v, 1.0 - t, c6a),
    )


def f_eag(a: float, c: float, v: float, t: float) -> float:
    return borrow_power_gains(BorrowPowerInstance(a, c, v, t)).f_eag


def borrow_power_case_gains(u, w, v: float, t: float) -> Dict[str, np.ndarray]:
    """
    Realised gains of one draw (u, w), region by region.

    Works on scalars or numpy arrays; the expectations of these are
    exactly the terms of borrow_power_gains.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    honest_gain = np.where(w > u, t, w + t - u)
    zero = np.zeros(np.broadcast(u, w).shape)

    c1 = np.where((w < v) & (u < w + t), honest_gain, zero)
    c4 = np.where((u >= v) & (u < v + t) & (w >= v), honest_gain, zero)
    c5h = np.where((u >= v + t) & (w >= u - t), honest_gain, zero)
    c5a = np.where((w >= v) & (u >= v + t) & (u < w + t), u - v - t, zero)
    c6a = np.where((w >= v) & (w < 1.0 - t) & (u >= w + t), w - v, zero)

    return {'c1_h': c1, 'c4_h': c4, 'c5_h': c5h, 'c5_a': c5a, 'c6_a': c6a}


def realised_gain(u, w, v, t) -> np.ndarray:
    """Adversary gain minus honest gain for draws (u, w)."""
    parts = borrow_power_case_gains(u, w, v, t)
    return parts['c5_a'] + parts['c6_a'] - parts['c1_h'] - parts['c4_h'] - parts['c5_h']


def monte_carlo_gains(
    inst: BorrowPowerInstance,
    draws: int,
    seed: int = 0,
    chunk: int = 1_000_000,
) -> Dict[str, Dict[str, float]]:
    """
    Monte Carlo oracle for borrow_power_gains.

    Returns:
        term -> {'mean', 'stderr'} for the five terms and f_eag
    """
    rng = np.random.default_rng(seed)
    names = TERMS + ('f_eag',)
    sums = dict.fromkeys(names, 0.0)
    squares = dict.fromkeys(names, 0.0)

    remaining = draws
    while remaining > 0:
        n = min(chunk, remaining)
        u = rng.random(n) ** (1.0 / inst.a)
        w = rng.random(n) ** (1.0 / inst.c_frac)
        parts = borrow_power_case_gains(u, w, inst.v, inst.t)
        parts['f_eag'] = parts['c5_a'] + parts['c6_a'] - parts['c1_h'] - parts['c4_h'] - parts['c5_h']
        for name in names:
            sums[name] += float(parts[name].sum())
            squares[name] += float((parts[name] ** 2).sum())
        remaining -= n

    result = {}
    for name in names:
        mean = sums[name] / draws
        variance = max(squares[name] / draws - mean * mean, 0.0)
        result[name] = {'mean': mean, 'stderr': math.sqrt(variance / draws)}
    return result


@dataclass(frozen=True)
class OptimalC:
    """Best coalition size c* for one (v, t) and its expected gain."""

    c: float
    gain: float
    alpha_h: float

    @property
    def a(self) -> float:
        return self.alpha_h - self.c

    @property
    def attack(self) -> bool:
        return self.gain > 0.0


def optimal_c(alpha_h: float, v: float, t: float) -> OptimalC:
    """
    Maximise f_eag(alpha_h - c, c, v, t) over c in (0, alpha_h).

    A 64-point grid locates the best region, golden-section search refines
    it, and the better of the two is returned.

    Raises:
        AnalysisError: 'adversary abstains' if v + t >= 1
        ValueError: On out-of-range inputs
    """
    if not alpha_h > 0:
        raise ValueError('alpha_h must be positive')
    if not 0.0 < v < 1.0 or not 0.0 <= t < 1.0:
        raise ValueError('v must lie in (0, 1) and t in [0, 1)')
    if v + t >= 1.0:
        raise AnalysisError('adversary abstains')

    def gain(c: float) -> float:
        return f_eag(alpha_h - c, c, v, t)

    grid = [alpha_h * i / C_GRID_POINTS for i in range(1, C_GRID_POINTS)]
    values = [gain(c) for c in grid]
    best = int(np.argmax(values))
    best_c, best_gain = grid[best], values[best]

    if 0 < best < len(grid) - 1:
        result = optimize.minimize_scalar(
            lambda c: -gain(c),
            bracket=(grid[best - 1], grid[best], grid[best + 1]),
            method='golden',
            options={'xtol': 1e-6},
        )
        if grid[best - 1] < result.x < grid[best + 1] and -result.fun > best_gain:
            best_c, best_gain = float(result.x), float(-result.fun)

    return OptimalC(c=best_c, gain=best_gain, alpha_h=alpha_h)


def gain_surface_vt(
    alpha_h: float,
    v_grid: Sequence[float],
    t_grid: Sequence[float],
) -> List[Dict[str, float]]:
    """Optimal expected gain over (v, t); cells with v + t >= 1 are abstentions."""
    rows = []
    for v in v_grid:
        for t in t_grid:
            if v + t >= 1.0:
                rows.append({'v': v, 't': t, 'c_star': 0.0, 'gain': 0.0, 'abstain': True})
                continue
            best = optimal_c(alpha_h, v, t)
            rows.append({'v': v, 't': t, 'c_star': best.c, 'gain': best.gain, 'abstain': False})
    return rows


def gain_surface_cv(
    alpha_h: float,
    c_grid: Sequence[float],
    v_grid: Sequence[float],
    t: float = 0.0,
) -> List[Dict[str, float]]:
    """Expected gain over (c, v) at a fixed lead t."""
    rows = []
    for v in v_grid:
        for c in c_grid:
            if not 0.0 < c < alpha_h:
                raise ValueError('c must lie in (0, alpha_h)')
            rows.append({'c': c, 'v': v, 't': t, 'gain': f_eag(alpha_h - c, c, v, t)})
    return rows


@lru_cache(maxsize=16)
def policy_table(alpha_h: float, grid_points: int = 12) -> RegularGridInterpolator:
    """
    Interpolated c*(v, t), zero wherever attacking does not pay.

    Built once per (alpha_h, resolution); used by the vectorised race.
    """
    v_axis = np.linspace(0.02, 0.98, grid_points)
    t_axis = np.linspace(0.0, 0.96, grid_points)
    table = np.zeros((grid_points, grid_points))
    for i, v in enumerate(v_axis):
        for j, t in enumerate(t_axis):
            if v + t < 1.0:
                best = optimal_c(alpha_h, float(v), float(t))
                table[i, j] = best.c if best.attack else 0.0
    logger.info('borrow-power policy table built for alpha_h=%s (%dx%d)', alpha_h, grid_points, grid_points)
    return RegularGridInterpolator(
        (v_axis, t_axis), table, bounds_error=False, fill_value=None,
    )


def borrow_race_chunk(
    alpha_a: float,
    alpha_h: float,
    attack: bool,
    grid_points: int,
    horizon: int,
    attempts: int,
    seed: np.random.SeedSequence,
) -> np.ndarray:
    """
    One chunk of the idealised race with (or without) the attack.

    Honest power acts as one node; the first slot of each attempt gives the
    adversary at least a tie. Whenever the adversary leads (t >= 0) with
    v + t < 1 it shows its chain to stake power c*(v, t). Random numbers are
    drawn identically with and without the attack.
    """
    rng = np.random.default_rng(seed)
    policy = policy_table(alpha_h, grid_points) if attack else None

    lead = np.zeros(attempts)
    differences = np.empty((attempts, horizon))
    for slot in range(horizon):
        v = rng.random(attempts) ** (1.0 / alpha_a)
        first = rng.random(attempts)
        second = rng.random(attempts)

        baseline = lead + v - first ** (1.0 / alpha_h)
        updated = baseline
        if policy is not None:
            eligible = (lead >= 0.0) & (v + lead < 1.0)
            c = np.zeros(attempts)
            if eligible.any():
                points = np.column_stack((v[eligible], lead[eligible]))
                c[eligible] = np.clip(policy(points), 0.0, alpha_h * (1.0 - 1.0 / C_GRID_POINTS))
            active = eligible & (c > 1e-9)
            if active.any():
                ca = c[active]
                u = first[active] ** (1.0 / (alpha_h - ca))
                w = second[active] ** (1.0 / ca)
                t = lead[active]
                va = v[active]
                gain = realised_gain(u, w, va, t)
                updated = baseline.copy()
                updated[active] = t + va - np.maximum(u, w) + gain

        if slot == 0:
            updated = np.maximum(updated, 0.0)
        lead = updated
        differences[:, slot] = lead

    return success_counts(differences)


def estimate_eta_borrow_power(
    r_a: float,
    s: float,
    k_values: Iterable[int],
    trials: int,
    seed: int = 0,
    attack: bool = True,
    grid_points: int = 12,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> Dict[int, EtaEstimate]:
    """
    Empirical eta of the idealised race, with or without borrowing power.
    """
    if not 0.0 < r_a < 1.0:
        raise ValueError('r_a must lie in (0, 1)')
    k_values = sorted(set(int(k) for k in k_values))
    if not k_values or k_values[0] < 1:
        raise ValueError('k values must be positive')

    horizon = race_horizon(k_values[-1])
    counts = run_chunks(
        borrow_race_chunk,
        (s * r_a, s * (1.0 - r_a), attack, grid_points),
        trials, seed, horizon, workers, chunk,
    )
    return {k: make_estimate(k, counts[k - 1], trials) for k in k_values}


def borrow_power_effect(
    r_a: float,
    s: float,
    k_values: Iterable[int],
    trials: int,
    seed: int = 0,
    grid_points: int = 12,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> List[Dict[str, float]]:
    """
    eta_hat with and without the attack (common random numbers), per k.

    Returns:
        Rows with k, eta_baseline, eta_attack, ratio (None when the
        baseline is zero) and both Wilson upper bounds
    """
    k_values = list(k_values)
    baseline = estimate_eta_borrow_power(
        r_a, s, k_values, trials, seed, False, grid_points, workers, chunk,
    )
    attacked = estimate_eta_borrow_power(
        r_a, s, k_values, trials, seed, True, grid_points, workers, chunk,
    )

    rows = []
    for k in sorted(baseline):
        base, att = baseline[k], attacked[k]
        rows.append({
            'k': k,
            'eta_baseline': base.eta_hat,
            'eta_attack': att.eta_hat,
            'ratio': att.eta_hat / base.eta_hat if base.violations else None,
            'baseline_ci_high': base.ci_high,
            'attack_ci_high': att.ci_high,
            'trials': trials,
        })
    return rows
