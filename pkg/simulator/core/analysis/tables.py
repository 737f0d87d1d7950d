"""
Report tables built from the bounds and the Monte Carlo estimators.

All functions return lists of plain dict rows so the CLI can write them
as CSV or JSON without further shaping.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from config import settings
from core.analysis.bounds import bound_params, eta_bound, finality_minutes, solve_k, tps
from core.analysis.montecarlo import estimate_eta, monte_carlo_k, wilson_interval
from core.exceptions import AnalysisError

logger = logging.getLogger(__name__)

METHOD_BOUND = 'bound'
METHOD_MONTE_CARLO = 'monte_carlo'
METHODS = (METHOD_BOUND, METHOD_MONTE_CARLO)

DEFAULT_R_A = (0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.46, 0.47, 0.48)
DEFAULT_CONFIDENCE = (0.95, 0.99, 0.995, 0.999)

# Published minutes per (r_a, 1 - eta): (Bitcoin, Ouroboros v1, QuickSync).
# Reference columns only; None where no value was published.
REFERENCE_MINUTES: Dict[float, Dict[float, tuple]] = {
    0.10: {0.95: (30, 4, 2), 0.99: (40, 6, 2), 0.995: (40, 8, 3), 0.999: (50, 10, 4)},
    0.15: {0.95: (30, 5, 2), 0.99: (40, 10, 4), 0.995: (60, 11, 4), 0.999: (80, 16, 6)},
    0.20: {0.95: (50, 8, 3), 0.99: (70, 14, 5), 0.995: (80, 17, 6), 0.999: (110, 24, 8)},
    0.25: {0.95: (60, 13, 4), 0.99: (100, 23, 8), 0.995: (120, 27, 10), 0.999: (150, 37, 13)},
    0.30: {0.95: (100, 22, 8), 0.99: (160, 38, 13), 0.995: (180, 46, 15), 0.999: (240, 63, 21)},
    0.35: {0.95: (170, 42, 14), 0.99: (270, 74, 24), 0.995: (310, 88, 28), 0.999: (410, 121, 38)},
    0.40: {0.95: (360, 105, 31), 0.99: (580, 183, 55), 0.995: (670, 217, 66), 0.999: (890, 296, 90)},
    0.45: {0.95: (1370, 486, 127), 0.99: (2200, 831, 226), 0.995: (2560, 980, 268), 0.999: (3400, 1327, 361)},
    0.46: {0.95: (2110, 794, 203), 0.99: (3400, 1347, 355), 0.995: (3960, 1586, 428), 0.999: (5260, 2143, 584)},
    0.47: {0.95: (3710, 1487, 362), 0.99: (5970, 2506, 632), 0.995: (6950, 2946, 747), 0.999: (8330, 3969, 1041)},
    0.48: {0.95: (8030, 3588, 826), 0.99: (None, 5991, 1434), 0.995: (None, 7028, 1680), 0.999: (None, 9438, 2335)},
}

BITCOIN_TPB = 2000
BITCOIN_BLOCK_SECONDS = 600


def reference_minutes(r_a: float, confidence: float) -> tuple:
    """(btc, v1, qs) published minutes, or Nones when the cell is not published."""
    row = REFERENCE_MINUTES.get(round(r_a, 2), {})
    return row.get(round(confidence, 3), (None, None, None))


def _eta_target(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise ValueError('confidence must lie in (0, 1)')
    return 1.0 - confidence


def _mc_depths(
    r_a: float,
    s: float,
    etas: Sequence[float],
    trials: int,
    seed: int,
    workers: Optional[int],
) -> Dict[float, tuple]:
    """k* per target from one batch of attempts; falls back to monte_carlo_k."""
    if trials < 1 or wilson_interval(0, trials)[1] > min(etas):
        raise AnalysisError('trials too few for target')

    bp = bound_params(r_a, s)
    k_max = max(solve_k(bp, eta) for eta in etas)
    estimates = estimate_eta(r_a, s, range(1, k_max + 1), trials, seed, workers)

    depths = {}
    for eta in etas:
        found = next((est for k, est in sorted(estimates.items()) if est.ci_high <= eta), None)
        if found is None:
            result = monte_carlo_k(r_a, s, eta, trials, seed, workers)
            depths[eta] = (result.k, result.estimate.eta_hat, result.estimate.ci_high)
        else:
            depths[eta] = (found.k, found.eta_hat, found.ci_high)
    return depths


def finality_table(
    r_a_list: Sequence[float],
    confidence_list: Sequence[float],
    s: float = settings.SCALE_FACTOR,
    t_sl: float = settings.SLOT_LENGTH_SECONDS,
    method: str = METHOD_MONTE_CARLO,
    trials: Optional[int] = None,
    seed: int = 0,
    deep: bool = False,
    workers: Optional[int] = None,
) -> List[Dict]:
    """
    Time-to-finality cells, one row per (r_a, confidence).

    Monte Carlo rows above TABLE_MAX_DESK_RA are skipped unless `deep`.

    Raises:
        ValueError: On an empty grid or unknown method
    """
    if not r_a_list or not confidence_list:
        raise ValueError('empty grid')
    if method not in METHODS:
        raise LookupError(f'unknown method: {method}')
    trials = settings.MC_DEFAULT_TRIALS if trials is None else trials

    rows = []
    for r_a in r_a_list:
        if method == METHOD_MONTE_CARLO and r_a > settings.TABLE_MAX_DESK_RA + 1e-12 and not deep:
            logger.warning('skipping r_a=%s: beyond desk scale (use deep mode)', r_a)
            continue

        etas = [_eta_target(conf) for conf in confidence_list]
        bp = bound_params(r_a, s)
        if method == METHOD_MONTE_CARLO:
            depths = _mc_depths(r_a, s, etas, trials, seed, workers)

        for confidence, eta in zip(confidence_list, etas):
            btc, v1, qs = reference_minutes(r_a, confidence)
            if method == METHOD_BOUND:
                k = solve_k(bp, eta)
                eta_hat = ci_high = None
            else:
                k, eta_hat, ci_high = depths[eta]
            rows.append({
                'r_a': r_a,
                'confidence': confidence,
                'eta_target': eta,
                'method': method,
                'k': k,
                'minutes': finality_minutes(k, t_sl),
                'eta_hat': eta_hat,
                'ci_high': ci_high,
                'btc_minutes': btc,
                'v1_minutes': v1,
                'qs_reference_minutes': qs,
            })
        logger.info('finality row r_a=%s done (%s)', r_a, method)

    if not rows:
        raise ValueError('empty grid')
    return rows


@dataclass
class SweepResult:
    rows: List[Dict] = field(default_factory=list)
    non_increasing: bool = True
    elbow_improvement: Optional[float] = None


def s_sweep(
    r_a: float,
    eta_target: float,
    s_values: Iterable[float],
    trials: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Monte Carlo k* for each scale factor.

    The same seed is used for every s, so the sweep runs on common random
    numbers. `elbow_improvement` is (k(8) - k(16)) / k(8) when both are
    present.
    """
    s_values = sorted(float(s) for s in s_values)
    if not s_values or any(s <= 0 for s in s_values):
        raise ValueError('s values must be positive')

    result = SweepResult()
    by_s = {}
    for s in s_values:
        mc = monte_carlo_k(r_a, s, eta_target, trials, seed, workers)
        by_s[s] = mc.k
        result.rows.append({
            's': s,
            'k': mc.k,
            'k_bound': mc.k_bound,
            'eta_hat': mc.estimate.eta_hat,
            'ci_high': mc.estimate.ci_high,
        })

    ks = [by_s[s] for s in s_values]
    result.non_increasing = all(a >= b for a, b in zip(ks, ks[1:]))
    if 8.0 in by_s and 16.0 in by_s:
        result.elbow_improvement = (by_s[8.0] - by_s[16.0]) / by_s[8.0]
    if not result.non_increasing:
        logger.warning('k is not monotone in s: %s', dict(zip(s_values, ks)))
    return result


def tps_table(
    tpb: float = settings.TPB,
    t_sl: float = settings.SLOT_LENGTH_SECONDS,
    r_active: float = 1.0,
) -> List[Dict]:
    """Throughput of Bitcoin, Ouroboros v1 and QuickSync."""
    if not 0.0 < r_active <= 1.0:
        raise ValueError('r_active must lie in (0, 1]')
    return [
        {
            'protocol': 'bitcoin',
            'formula': 'tpb / block_seconds',
            'tps': BITCOIN_TPB / BITCOIN_BLOCK_SECONDS,
        },
        {
            'protocol': 'ouroboros_v1',
            'formula': 'tpb * r_active / t_sl',
            'tps': tps(tpb, t_sl, r_active),
        },
        {
            'protocol': 'quicksync',
            'formula': 'tpb / t_sl',
            'tps': tps(tpb, t_sl, 1.0),
        },
    ]


@dataclass
class EtaCurve:
    rows: List[Dict]
    c_exponent: float
    fitted_slope: Optional[float]


def eta_curve(
    r_a: float,
    s: float,
    k_values: Iterable[int],
    trials: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> EtaCurve:
    """
    eta_hat against k next to the analytic bound.

    `ratio` is eta_hat(k) / eta_hat(previous k); `fitted_slope` is the
    least-squares slope of log eta_hat over k where violations were seen.
    """
    trials = settings.MC_DEFAULT_TRIALS if trials is None else trials
    bp = bound_params(r_a, s)
    estimates = estimate_eta(r_a, s, k_values, trials, seed, workers)

    rows = []
    previous = None
    for k, est in sorted(estimates.items()):
        ratio = None
        if previous is not None and previous.violations:
            ratio = est.eta_hat / previous.eta_hat
        rows.append({
            'k': k,
            'eta_hat': est.eta_hat,
            'ci_low': est.ci_low,
            'ci_high': est.ci_high,
            'violations': est.violations,
            'bound': eta_bound(bp, k),
            'log_eta_hat': math.log(est.eta_hat) if est.violations else None,
            'ratio': ratio,
        })
        previous = est

    observed = [(row['k'], row['log_eta_hat']) for row in rows if row['log_eta_hat'] is not None]
    slope = None
    if len(observed) >= 2:
        xs, ys = zip(*observed)
        slope = float(np.polyfit(xs, ys, 1)[0])
    return EtaCurve(rows=rows, c_exponent=bp.c_exponent, fitted_slope=slope)


def bound_vs_monte_carlo(
    r_a_list: Sequence[float],
    confidence_list: Sequence[float],
    s: float = settings.SCALE_FACTOR,
    t_sl: float = settings.SLOT_LENGTH_SECONDS,
    trials: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> List[Dict]:
    """
    Bound-derived k next to Monte Carlo k* per cell.

    `discrepancy` is k_bound - k_mc; `conservative` is False whenever the
    estimate needs a deeper k than the bound, which is logged.
    """
    if not r_a_list or not confidence_list:
        raise ValueError('empty grid')
    trials = settings.MC_DEFAULT_TRIALS if trials is None else trials

    rows = []
    for r_a in r_a_list:
        bp = bound_params(r_a, s)
        etas = [_eta_target(conf) for conf in confidence_list]
        depths = _mc_depths(r_a, s, etas, trials, seed, workers)
        for confidence, eta in zip(confidence_list, etas):
            k_bound = solve_k(bp, eta)
            k_mc = depths[eta][0]
            conservative = k_mc <= k_bound
            if not conservative:
                logger.warning('r_a=%s eta=%s: monte carlo k=%d exceeds bound k=%d', r_a, eta, k_mc, k_bound)
            rows.append({
                'r_a': r_a,
                'confidence': confidence,
                'k_bound': k_bound,
                'k_monte_carlo': k_mc,
                'minutes_bound': finality_minutes(k_bound, t_sl),
                'minutes_monte_carlo': finality_minutes(k_mc, t_sl),
                'discrepancy': k_bound - k_mc,
                'conservative': conservative,
                'qs_reference_minutes': reference_minutes(r_a, confidence)[2],
            })
    return rows
