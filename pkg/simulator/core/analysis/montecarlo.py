"""
Monte Carlo estimation of the per-fork-point violation probability.

A fork attempt from a fixed point succeeds at depth k if, for some
M >= k, the adversary's M block powers sum to at least the honest chain's
M block powers. With D_M the running difference, success at depth k is
max(D_k, D_{k+1}, ...) >= 0, so one reverse cumulative maximum per
attempt answers every k at once.

Attempts run in chunks. Each chunk gets its own child of one
numpy SeedSequence, so the result depends on (seed, trials, chunk size)
and never on the worker count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from config import settings
from core.analysis.bounds import bound_params, solve_k
from core.exceptions import AnalysisError
from core.power.sybil import sample_effective_power

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
WILSON_Z = 1.96


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion (95% by default).

    Robust for small counts and proportions near 0 or 1.
    """
    if trials <= 0:
        return 0.0, 0.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class EtaEstimate:
    """Empirical violation probability at one depth."""

    k: int
    violations: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def eta_hat(self) -> float:
        return self.violations / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        p = self.eta_hat
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    def as_dict(self) -> Dict[str, float]:
        return {
            'k': self.k,
            'eta_hat': self.eta_hat,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'violations': self.violations,
            'trials': self.trials,
        }


def make_estimate(k: int, violations: int, trials: int) -> EtaEstimate:
    low, high = wilson_interval(violations, trials)
    return EtaEstimate(k=k, violations=int(violations), trials=int(trials), ci_low=low, ci_high=high)


def race_horizon(k_max: int) -> int:
    """Slots simulated beyond the fork point: max(10 k, 200)."""
    return max(10 * k_max, 200)


def _draw_powers(rng: np.random.Generator, alpha: float, shape) -> np.ndarray:
    uniforms = rng.random(shape)
    if alpha <= 0:
        return np.zeros(shape)
    return uniforms ** (1.0 / alpha)


def success_counts(differences: np.ndarray) -> np.ndarray:
    """
    Per-depth success counts from running differences.

    Args:
        differences: (attempts, horizon) array, column M-1 holding D_M

    Returns:
        Array whose entry k-1 counts attempts with max_{M>=k} D_M >= 0
    """
    suffix_max = np.maximum.accumulate(differences[:, ::-1], axis=1)[:, ::-1]
    return (suffix_max >= 0.0).sum(axis=0)


def race_chunk(
    alpha_a: float,
    alpha_h: float,
    horizon: int,
    attempts: int,
    seed: np.random.SeedSequence,
) -> np.ndarray:
    """
    One chunk of the plain power race (no adversarial tricks).

    Uniforms are drawn adversary-first then honest, so two calls with the
    same seed share random numbers whatever the stake powers.
    """
    rng = np.random.default_rng(seed)
    w_a = _draw_powers(rng, alpha_a, (attempts, horizon))
    w_h = _draw_powers(rng, alpha_h, (attempts, horizon))
    return success_counts(np.cumsum(w_a - w_h, axis=1))


def _chunk_sizes(trials: int, chunk: int) -> List[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(
    chunk_fn: Callable[..., np.ndarray],
    args: Tuple,
    trials: int,
    seed: int,
    horizon: int,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> np.ndarray:
    """
    Run `chunk_fn(*args, horizon, attempts, seed_sequence)` over all trials
    and sum the per-depth counts.
    """
    if trials < 1:
        raise ValueError('trials must be positive')
    workers = settings.MC_WORKERS if workers is None else workers
    chunk = settings.MC_CHUNK if chunk is None else chunk

    sizes = _chunk_sizes(trials, chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(*args, horizon, size, child) for size, child in zip(sizes, seeds)]

    total = np.zeros(horizon, dtype=np.int64)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for counts in pool.map(chunk_fn, *zip(*jobs)):
                total += counts
    else:
        for job in jobs:
            total += chunk_fn(*job)
    return total


def estimate_eta_from_powers(
    alpha_a: float,
    alpha_h: float,
    k_values: Iterable[int],
    trials: int,
    seed: int = 0,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> Dict[int, EtaEstimate]:
    k_values = sorted(set(int(k) for k in k_values))
    if not k_values or k_values[0] < 1:
        raise ValueError('k values must be positive')

    horizon = race_horizon(k_values[-1])
    counts = run_chunks(race_chunk, (alpha_a, alpha_h), trials, seed, horizon, workers, chunk)
    return {k: make_estimate(k, counts[k - 1], trials) for k in k_values}


def estimate_eta(
    r_a: float,
    s: float,
    k_values: Iterable[int],
    trials: int,
    seed: int = 0,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> Dict[int, EtaEstimate]:
    """
    Empirical eta at every requested depth from one batch of fork attempts.

    Depth k counts forks that win with k or more honest blocks past the
    fork point, one less than the private_fork strategy needs to undo a
    k-confirmed block.

    Args:
        r_a: Adversary relative stake
        s: Scale factor
        k_values: Depths to report
        trials: Fork attempts
        seed: Root seed

    Returns:
        Mapping k -> EtaEstimate (Wilson 95% interval)
    """
    if not 0.0 <= r_a < 1.0:
        raise ValueError('r_a must lie in [0, 1)')
    if not s > 0:
        raise ValueError('scale factor must be positive')
    return estimate_eta_from_powers(s * r_a, s * (1.0 - r_a), k_values, trials, seed, workers, chunk)


@dataclass(frozen=True)
class MonteCarloK:
    """Smallest depth whose Wilson upper bound meets the target."""

    k: int
    eta_target: float
    estimate: EtaEstimate
    k_bound: Optional[int]


def monte_carlo_k(
    r_a: float,
    s: float,
    eta_target: float,
    trials: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
) -> MonteCarloK:
    """
    Estimate the depth k* needed for violation probability <= eta_target.

    The search starts from the bound-derived depth (the bound is
    conservative, so k* cannot exceed it by more than noise) and doubles
    the range if nothing qualifies.

    Raises:
        AnalysisError: 'trials too few for target' when even a zero count
            cannot push the Wilson upper bound under the target
    """
    if not 0.0 < eta_target < 1.0:
        raise ValueError('eta_target must lie in (0, 1)')
    trials = settings.MC_DEFAULT_TRIALS if trials is None else trials
    if trials < MIN_TRIALS or wilson_interval(0, trials)[1] > eta_target:
        raise AnalysisError('trials too few for target')

    k_bound = solve_k(bound_params(r_a, s), eta_target) if r_a > 0 else None
    k_max = max(k_bound or 1, 4)

    for _ in range(6):
        estimates = estimate_eta(r_a, s, range(1, k_max + 1), trials, seed, workers, chunk)
        for k in range(1, k_max + 1):
            if estimates[k].ci_high <= eta_target:
                logger.info('monte carlo k*=%d for r_a=%s s=%s eta=%s', k, r_a, s, eta_target)
                return MonteCarloK(k=k, eta_target=eta_target, estimate=estimates[k], k_bound=k_bound)
        k_max *= 2

    raise AnalysisError('trials too few for target')


def sybil_check(
    alpha: float,
    parts: Sequence[int],
    samples: int,
    seed: int = 0,
) -> List[Dict[str, float]]:
    """
    Compare the effective power of `alpha` split into m identities against
    the unsplit draw (KS distance) and against the exact CDF x^alpha.
    """
    seeds = np.random.SeedSequence(seed).spawn(len(parts) + 1)
    baseline = sample_effective_power(np.random.default_rng(seeds[0]), alpha, 1, samples)

    rows = []
    for m, child in zip(parts, seeds[1:]):
        split = sample_effective_power(np.random.default_rng(child), alpha, m, samples)
        two_sample = stats.ks_2samp(baseline, split)
        exact = stats.kstest(split, lambda x: np.clip(x, 0.0, 1.0) ** alpha)
        rows.append({
            'alpha': alpha,
            'parts': m,
            'samples': samples,
            'ks_vs_unsplit': float(two_sample.statistic),
            'ks_vs_exact': float(exact.statistic),
            'mean': float(split.mean()),
            'expected_mean': alpha / (alpha + 1.0),
        })
    return rows
