"""Tests for closed-form oracles and sharpness limits."""

import math

import pytest
from scipy import integrate

from src.common.reference_solutions import (
    BmClosedForm,
    SharpnessCase,
    bm_W,
    bm_Z,
    cp_unit_atom_W,
    cp_unit_atom_Z,
    exp_jumps_W,
    fine_grid_benchmark,
    sharpness_limit,
    stable_W,
)
from src.common.scale_engine import compute_table, evaluate_W_at
from src.common.scalekit_exceptions import ArgumentError, ScaleRangeError
from src.common.triplet_presets import exponential_jumps


class TestBrownianClosedForm:
    """Test W and Z of Brownian motion with drift."""

    def test_driftless_zero_rate(self):
        """Test W(x) = 2x / sigma2 when q = mu = 0."""
        assert bm_W(BmClosedForm(sigma2=2.0, mu=0.0, q=0.0), 1.5) == pytest.approx(1.5)

    def test_upward_drift(self):
        """Test W(x) = (1 - e^(-2 mu x / sigma2)) / mu at q = 0."""
        form = BmClosedForm(sigma2=1.0, mu=1.0, q=0.0)
        assert bm_W(form, 0.7) == pytest.approx(1 - math.exp(-1.4), rel=1e-14)

    def test_w_vanishes_below_zero(self):
        """Test W = 0 on (-inf, 0)."""
        assert bm_W(BmClosedForm(sigma2=1.0, mu=1.0, q=0.5), -1.0) == 0.0

    def test_z_is_one_plus_q_integral(self):
        """Test Z(x) = 1 + q times the integral of W over [0, x]."""
        form = BmClosedForm(sigma2=1.0, mu=1.0, q=0.5)
        integral, _ = integrate.quad(lambda y: bm_W(form, y), 0.0, 1.2)
        assert bm_Z(form, 1.2) == pytest.approx(1 + 0.5 * integral, rel=1e-12)

    def test_invalid_sigma2(self):
        """Test that sigma2 must be positive."""
        with pytest.raises(ArgumentError):
            BmClosedForm(sigma2=0.0, mu=1.0, q=0.0)

    @pytest.mark.parametrize("sigma2,mu,q", [(1.0, 1.0, 0.5), (1.0, -1.0, 0.0), (2.0, 0.5, 2.0)])
    def test_laplace_transform_at_phi_plus_one(self, sigma2, mu, q):
        """Test that the transform of W at Phi(q) + 1 equals 1 / (psi - q)."""
        form = BmClosedForm(sigma2=sigma2, mu=mu, q=q)
        beta = form.alpha_plus + 1.0
        transform, _ = integrate.quad(lambda x: math.exp(-beta * x) * bm_W(form, x), 0.0, 60.0,
                                      epsrel=1e-12, limit=200)
        psi_beta = 0.5 * sigma2 * beta * beta + mu * beta
        assert transform == pytest.approx(1 / (psi_beta - q), rel=1e-9)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_vanishing_drift_is_continuous(self, x):
        """Test that a drift of 1e-8 stays within 1e-6 of the driftless 2x / sigma2."""
        assert abs(bm_W(BmClosedForm(sigma2=2.0, mu=1e-8, q=0.0), x) - x) < 1e-6
        assert abs(bm_W(BmClosedForm(sigma2=2.0, mu=-1e-8, q=0.0), x) - x) < 1e-6

    def test_overflow_is_a_range_error(self):
        """Test that values past the float range raise ScaleRangeError rather than OverflowError."""
        form = BmClosedForm(sigma2=1.0, mu=1.0, q=0.5)
        with pytest.raises(ScaleRangeError) as excinfo:
            bm_W(form, 2000.0)
        assert excinfo.value.exit_code == 4
        with pytest.raises(ScaleRangeError):
            bm_Z(form, 2000.0)
        assert math.isfinite(bm_W(form, 100.0))


class TestJumpClosedForms:
    """Test the compound Poisson and stable closed forms."""

    def test_unit_atom(self):
        """Test W = e^((1+q)x) and Z on [0, 1)."""
        assert cp_unit_atom_W(1.0, 0.25) == pytest.approx(math.exp(0.5))
        assert cp_unit_atom_Z(1.0, 0.25) == pytest.approx(1 + 0.5 * (math.exp(0.5) - 1))

    def test_unit_atom_range(self):
        """Test that x = 1 is outside the closed form's range."""
        with pytest.raises(ArgumentError):
            cp_unit_atom_W(0.0, 1.0)

    def test_exponential_jumps_at_zero(self):
        """Test W(0) = 1 / mu for finite variation."""
        assert exp_jumps_W(1.0, 1.0, 2.0, 0.0) == pytest.approx(0.5)

    def test_exponential_jumps_critical_case(self):
        """Test the c = 0 limit (1 + rho x) / mu."""
        assert exp_jumps_W(2.0, 1.0, 2.0, 3.0) == pytest.approx(2.0)

    def test_exponential_jumps_against_recursion(self):
        """Test that the recursion approaches the closed form."""
        table = compute_table(exponential_jumps(), 2.0 ** -12, 0.0, 1.0)
        assert evaluate_W_at(table, 1.0) == pytest.approx(exp_jumps_W(1.0, 1.0, 2.0, 1.0), rel=1e-3)

    def test_stable(self):
        """Test W(1) = 3 / (2 pi) for beta = 3/2."""
        assert stable_W(1.5, 1.0) == pytest.approx(3 / (2 * math.pi), rel=1e-12)

    def test_stable_range(self):
        """Test that beta must lie in (1, 2)."""
        with pytest.raises(ArgumentError):
            stable_W(2.0, 1.0)


class TestSharpnessLimit:
    """Test the asymptotic error constants."""

    def test_cp_w(self):
        """Test (1/2)(1+q)^2 x e^(x(1+q))."""
        assert sharpness_limit(SharpnessCase.CP_W, 0.0, 0.5) == pytest.approx(0.25 * math.exp(0.5))

    def test_cp_z(self):
        """Test (1/2) q (1+q) x e^(x(1+q))."""
        assert sharpness_limit("CP_Z", 1.0, 0.5) == pytest.approx(0.5 * math.e)

    def test_cp_range(self):
        """Test that the CP limits need 0 < x < 1."""
        with pytest.raises(ArgumentError):
            sharpness_limit(SharpnessCase.CP_W, 0.0, 1.0)

    def test_bm_z(self):
        """Test -(q / 2 root) (e^(alpha+ x) - e^(alpha- x))."""
        form = BmClosedForm(sigma2=1.0, mu=1.0, q=0.5)
        expected = -0.25 / math.sqrt(2) * (math.exp(form.alpha_plus) - math.exp(form.alpha_minus))
        assert sharpness_limit(SharpnessCase.BM_Z, 0.5, 1.0) == pytest.approx(expected)

    def test_degenerate_brownian(self):
        """Test that the exact driftless case has zero limit."""
        assert sharpness_limit(SharpnessCase.BM_W, 0.0, 1.0, sigma2=2.0, mu=0.0) == 0.0


class TestFineGridBenchmark:
    """Test the self-benchmark."""

    def test_matches_table(self):
        """Test that benchmark values are table lookups at h_bench."""
        xs = [0.25, 0.5]
        values = fine_grid_benchmark(exponential_jumps(), 0.0, xs, 2.0 ** -6)
        table = compute_table(exponential_jumps(), 2.0 ** -6, 0.0, 0.5)
        assert values == {x: evaluate_W_at(table, x) for x in xs}

    def test_with_z(self):
        """Test that Z values come back alongside W."""
        w, z = fine_grid_benchmark(exponential_jumps(), 0.5, [0.5], 2.0 ** -6, with_z=True)
        assert set(w) == set(z) == {0.5}
        assert z[0.5] > 1

    def test_off_grid(self):
        """Test that points off the benchmark grid raise."""
        with pytest.raises(ArgumentError):
            fine_grid_benchmark(exponential_jumps(), 0.0, [0.3], 0.25)
