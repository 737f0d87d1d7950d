"""
Bound Tests

Test the closed-form finality bound and its derived quantities.
"""

import math

import pytest

from core.analysis.bounds import (
    bernstein_tail,
    bound_params,
    bound_params_from_powers,
    chain_quality_bound,
    epsilon_cp,
    epsilon_lp,
    eta_bound,
    finality_minutes,
    mean_power,
    solve_k,
    tps,
    variance_power,
)
from core.exceptions import AnalysisError


@pytest.fixture
def bp():
    """Bound parameters at r_a = 0.1, s = 8"""
    return bound_params(0.1, 8)


class TestBoundParams:
    """Test the Bernstein parameters"""

    def test_reference_values(self, bp):
        """Test lambda, sigma^2 and c at r_a = 0.1, s = 8"""
        assert bp.alpha_a == pytest.approx(0.8)
        assert bp.alpha_h == pytest.approx(7.2)
        assert bp.lam == pytest.approx(0.433604, abs=1e-6)
        assert bp.k_bound == pytest.approx(1.433604, abs=1e-6)
        assert bp.sigma_sq == pytest.approx(0.099822, abs=1e-6)
        assert bp.c_exponent == pytest.approx(0.30619, abs=1e-4)

    def test_moments(self):
        """Test the mean and variance of x^alpha"""
        assert mean_power(1.0) == pytest.approx(0.5)
        assert variance_power(1.0) == pytest.approx(1.0 / 12.0)

    def test_larger_adversary_weaker_bound(self):
        """Test c shrinks as the adversary grows"""
        assert bound_params(0.3, 8).c_exponent == pytest.approx(0.0859, abs=1e-3)
        assert bound_params(0.3, 8).c_exponent < bound_params(0.1, 8).c_exponent

    def test_no_honest_advantage(self):
        """Test r_a >= 0.5 has no bound"""
        with pytest.raises(AnalysisError, match='no honest advantage'):
            bound_params(0.5, 8)

    def test_invalid_inputs(self):
        """Test r_a outside (0, 1) and non-positive s are rejected"""
        with pytest.raises(ValueError):
            bound_params(0.0, 8)
        with pytest.raises(ValueError):
            bound_params(0.1, 0)

    def test_powers_without_adversary(self):
        """Test a zero adversary power keeps only the honest terms"""
        bp = bound_params_from_powers(0.0, 4.0)

        assert bp.lam == pytest.approx(0.8)
        assert bp.sigma_sq == pytest.approx(variance_power(4.0))


class TestEta:
    """Test the per-fork-point bound and k*"""

    def test_tail_sum_equals_eta(self, bp):
        """Test the geometric sum of single-horizon tails from k onwards"""
        total = math.fsum(bernstein_tail(bp, m) for m in range(10, 2000))

        assert total == pytest.approx(eta_bound(bp, 10), rel=1e-9)

    def test_eta_decreasing(self, bp):
        """Test eta falls strictly with k"""
        values = [eta_bound(bp, k) for k in range(1, 40)]

        assert all(a > b for a, b in zip(values, values[1:]))

    def test_solve_k(self, bp):
        """Test k* = 15 for eta = 0.05 (eta(14) = 0.052, eta(15) = 0.038)"""
        assert eta_bound(bp, 14) == pytest.approx(0.052, abs=1e-3)
        assert eta_bound(bp, 15) == pytest.approx(0.038, abs=1e-3)
        assert solve_k(bp, 0.05) == 15

    @pytest.mark.parametrize('target', [0.5, 0.1, 0.01, 1e-3, 1e-6])
    def test_solve_k_is_minimal(self, bp, target):
        """Test k* meets the target and k* - 1 does not"""
        k = solve_k(bp, target)

        assert eta_bound(bp, k) <= target
        assert k == 1 or eta_bound(bp, k - 1) > target

    def test_solve_k_range(self, bp):
        """Test targets outside (0, 1) are rejected"""
        with pytest.raises(ValueError):
            solve_k(bp, 1.0)

    def test_invalid_depth(self, bp):
        """Test k and M below 1 are rejected"""
        with pytest.raises(ValueError):
            eta_bound(bp, 0)
        with pytest.raises(ValueError):
            bernstein_tail(bp, 0)


class TestDerived:
    """Test lifetime failure bounds, throughput and finality time"""

    def test_lifetime_bounds(self, bp):
        """Test epsilon_cp = L eta, epsilon_lp = 2 epsilon_cp"""
        cp = epsilon_cp(bp, 20, 1000)

        assert cp == pytest.approx(1000 * eta_bound(bp, 20))
        assert epsilon_lp(bp, 20, 1000) == pytest.approx(2 * cp)
        assert chain_quality_bound(bp, 20, 1000) == cp

    def test_lifetime_range(self, bp):
        """Test a lifetime below one slot is rejected"""
        with pytest.raises(ValueError):
            epsilon_cp(bp, 20, 0)

    def test_tps(self):
        """Test 2000 transactions per 40 s slot gives 50 TPS"""
        assert tps(2000, 40, 1.0) == pytest.approx(50.0)
        assert tps(2000, 40, 0.5) == pytest.approx(25.0)

    def test_tps_range(self):
        """Test a utilisation outside [0, 1] is rejected"""
        with pytest.raises(ValueError):
            tps(2000, 40, 1.5)

    def test_finality_minutes(self):
        """Test six 40 s slots take four minutes"""
        assert finality_minutes(6, 40) == pytest.approx(4.0)
