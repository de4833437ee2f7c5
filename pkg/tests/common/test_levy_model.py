"""Tests for Levy triplets, measures and the Laplace exponent."""

import math

import pytest
from scipy import special

from src.common.levy_model import (
    Atom,
    ExponentialDensity,
    GenericDensity,
    LevyMeasure,
    LevyTriplet,
    LogNormalDensity,
    PathClass,
    PositiveMeasure,
    PowerLawDensity,
    classify_paths,
    interval_mass,
    kappa,
    positive_interval_mass,
    psi,
    psi_real,
    second_moment_zero,
    small_jump_diagnostics,
    tail_mass,
    total_mass,
    xi,
)
from src.common.scale_engine import phi_root
from src.common.scalekit_exceptions import ArgumentError, InfiniteMassError, InvalidTripletError
from src.common.triplet_presets import (
    cbi_immigration,
    cbi_mixture,
    exponential_jumps,
    lognormal_cramer_lundberg,
    stable,
)


def unit_atom_measure() -> LevyMeasure:
    return LevyMeasure(atoms=(Atom(-1.0, 1.0),))


def stable_piece(index: float) -> LevyMeasure:
    return LevyMeasure(pieces=(PowerLawDensity(lower=-1.0, upper=0.0, coefficient=1.0, index=index),))


class TestAtomsAndPieces:
    """Test construction checks of atoms and density pieces."""

    def test_atom_at_origin_rejected(self):
        """Test that an atom at 0 is not a jump."""
        with pytest.raises(InvalidTripletError):
            Atom(0.0, 1.0)

    def test_atom_with_negative_mass_rejected(self):
        """Test that atom masses must be positive."""
        with pytest.raises(InvalidTripletError):
            Atom(-1.0, -0.5)

    def test_piece_above_origin_rejected(self):
        """Test that density supports must stay in (-inf, 0]."""
        with pytest.raises(InvalidTripletError):
            ExponentialDensity(upper=1.0)

    def test_overlapping_pieces_rejected(self):
        """Test that pieces must have disjoint supports."""
        with pytest.raises(InvalidTripletError, match="overlap"):
            LevyMeasure(pieces=(
                PowerLawDensity(lower=-2.0, upper=0.0, index=0.5),
                ExponentialDensity(upper=-1.0),
            ))

    def test_non_integrable_second_moment_rejected(self):
        """Test that index >= 2 at the origin is not a Levy measure."""
        with pytest.raises(InvalidTripletError):
            PowerLawDensity(lower=-1.0, upper=0.0, index=2.0)

    def test_pole_away_from_origin_needs_negative_index(self):
        """Test that a pole at a negative anchor must be integrable."""
        with pytest.raises(InvalidTripletError):
            PowerLawDensity(lower=-2.0, upper=-1.0, index=0.5, anchor=-1.0)

    def test_finite_activity_with_infinite_variation_rejected(self):
        """Test that a generic density cannot be finite-activity yet of infinite variation."""
        with pytest.raises(InvalidTripletError, match="finite-activity"):
            GenericDensity(evaluator=lambda y: 1.0, lower=-1.0, upper=0.0,
                           finite_activity=True, finite_variation=False)


class TestMasses:
    """Test interval masses, tails and moments."""

    def test_power_law_mass_closed_form(self):
        """Test that lambda([-1, -1/4)) of |y|^(-5/2) is (8 - 1) / 1.5."""
        assert interval_mass(stable_piece(1.5), -1.0, -0.25) == pytest.approx(7 / 1.5, rel=1e-14)

    def test_mass_touching_origin_is_infinite(self):
        """Test that infinite activity raises on intervals reaching 0."""
        with pytest.raises(InfiniteMassError):
            interval_mass(stable_piece(0.5), -0.5, 0.0)

    def test_exponential_mass(self):
        """Test the exponential mass on [-1, 0)."""
        measure = LevyMeasure(pieces=(ExponentialDensity(scale=1.0, rate=1.0),))
        assert interval_mass(measure, -1.0, 0.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    def test_lognormal_totals(self):
        """Test that the log-normal piece has mass scale and mean e^(1/2)."""
        measure = LevyMeasure(pieces=(LogNormalDensity(scale=2.0),))
        assert total_mass(measure) == pytest.approx(2.0, rel=1e-14)
        piece = measure.pieces[0]
        assert piece.abs_moment(-math.inf, 0.0) == pytest.approx(2 * math.exp(0.5), rel=1e-12)

    def test_interval_is_left_closed(self):
        """Test that [a, b) contains an atom at a but not at b."""
        measure = unit_atom_measure()
        assert interval_mass(measure, -1.0, -0.5) == 1.0
        assert interval_mass(measure, -1.5, -1.0) == 0.0

    def test_tail_is_open(self):
        """Test that lambda((-inf, -t)) excludes an atom at -t."""
        measure = unit_atom_measure()
        assert tail_mass(measure, 1.0) == 0.0
        assert tail_mass(measure, 0.999) == 1.0

    def test_malformed_interval_rejected(self):
        """Test that a >= b raises ArgumentError."""
        with pytest.raises(ArgumentError):
            interval_mass(unit_atom_measure(), -0.5, -1.0)

    def test_total_mass(self):
        """Test total masses of finite and infinite measures."""
        assert total_mass(unit_atom_measure()) == 1.0
        assert total_mass(stable_piece(1.5)) == math.inf

    def test_second_moment_near_origin(self):
        """Test that the integral of y^2 |y|^(-5/2) over [-d, 0) is 2 sqrt(d)."""
        assert second_moment_zero(stable_piece(1.5), 0.25) == pytest.approx(1.0, rel=1e-12)

    def test_kappa_finite_variation(self):
        """Test that kappa(d) for |y|^(-3/2) is 2 (1 - sqrt(d))."""
        assert kappa(stable_piece(0.5), 0.25) == pytest.approx(1.0, rel=1e-12)

    def test_generic_antiderivative_matches_quadrature(self):
        """Test that the far-tail antiderivative of the CBI mixture agrees with quad."""
        far = cbi_mixture().measure.pieces[0]
        expected = math.exp(math.cos(2.0)) / 8 + math.e / 8
        assert far.mass(-math.inf, -2.0) == pytest.approx(expected, rel=1e-13)
        numeric = GenericDensity(evaluator=far.evaluator, lower=far.lower, upper=far.upper)
        assert numeric.mass(-10.0, -2.0) == pytest.approx(far.mass(-10.0, -2.0), rel=1e-8)

    @pytest.mark.parametrize("measure", [
        LevyMeasure(atoms=(Atom(-0.75, 0.5), Atom(-2.0, 0.25)),
                    pieces=(PowerLawDensity(lower=-1.0, upper=0.0, coefficient=1.0, index=1.5),
                            ExponentialDensity(scale=2.0, rate=0.5, upper=-1.0))),
        LevyMeasure(pieces=(LogNormalDensity(),)),
        cbi_mixture().measure,
    ], ids=["atoms-power-exp", "lognormal", "cbi-mixture"])
    @pytest.mark.parametrize("k", [1, 3])
    def test_bins_and_tail_add_up(self, measure, k):
        """Test that bins j = k..n plus the tail below (n + 1/2)h equal the tail below (k - 1/2)h."""
        h, n = 0.25, 12
        bins = [interval_mass(measure, -(j + 0.5) * h, -(j - 0.5) * h) for j in range(k, n + 1)]
        total = math.fsum(bins + [tail_mass(measure, (n + 0.5) * h)])
        assert total == pytest.approx(tail_mass(measure, (k - 0.5) * h), rel=1e-12)

    @pytest.mark.parametrize("a,b", [(-1.0, -0.25), (-4.0, -1.0), (-math.inf, -1.0)])
    def test_power_law_quadrature_matches_antiderivative(self, a, b):
        """Test that quadrature of |y|^(-5/2) agrees with the closed form to 1e-9."""
        closed = PowerLawDensity(lower=-math.inf, upper=0.0, coefficient=1.0, index=1.5)
        numeric = GenericDensity(evaluator=closed.density, lower=-math.inf, upper=0.0,
                                 finite_activity=False, finite_variation=False)
        assert numeric.mass(a, b) == pytest.approx(closed.mass(a, b), rel=1e-9)
        assert numeric.abs_moment(a, b) == pytest.approx(closed.abs_moment(a, b), rel=1e-9)

    @pytest.mark.parametrize("measure", [stable_piece(1.5), stable_piece(0.5), cbi_mixture().measure],
                             ids=["infinite-variation", "finite-variation", "cbi-mixture"])
    def test_kappa_and_xi_monotone_in_delta(self, measure):
        """Test that kappa does not grow and xi does not shrink as delta grows."""
        deltas = [2.0 ** -j for j in range(10, -1, -1)]
        kappas = [kappa(measure, d) for d in deltas]
        xis = [xi(measure, d) for d in deltas]
        assert all(b <= a for a, b in zip(kappas, kappas[1:]))
        assert all(b >= a for a, b in zip(xis, xis[1:]))


class TestTriplet:
    """Test triplet validation and derived quantities."""

    def test_pure_drift_rejected(self):
        """Test that a pure drift is monotone and rejected."""
        with pytest.raises(InvalidTripletError, match="pure drift"):
            LevyTriplet(sigma2=0.0, mu=1.0)

    def test_compound_poisson_needs_positive_drift(self):
        """Test that sigma2 = 0 and finite variation need mu0 > 0."""
        with pytest.raises(InvalidTripletError):
            LevyTriplet(sigma2=0.0, measure=unit_atom_measure(), mu=-1.0)

    def test_adjusted_drift_adds_small_jump_mean(self):
        """Test that mu0 = mu + integral of |y| over [-1, 0) when V = 1."""
        triplet = LevyTriplet(sigma2=0.0, measure=stable_piece(0.5), mu=-0.5)
        assert triplet.V == 1
        assert triplet.mu0 == pytest.approx(1.5, rel=1e-12)
        with pytest.raises(InvalidTripletError):
            LevyTriplet(sigma2=0.0, measure=stable_piece(0.5), mu=-3.0)

    def test_infinite_variation_accepts_any_drift(self):
        """Test that kappa(0) = inf triplets need no drift condition."""
        triplet = LevyTriplet(sigma2=0.0, measure=stable_piece(1.5), mu=-3.0)
        assert triplet.delta0 == 1

    def test_delta0(self):
        """Test the shift convention."""
        assert LevyTriplet(sigma2=1.0).delta0 == 1
        assert LevyTriplet(sigma2=0.0, measure=unit_atom_measure(), mu=1.0).delta0 == 0

    def test_negative_sigma2_rejected(self):
        """Test that sigma2 < 0 is invalid."""
        with pytest.raises(InvalidTripletError):
            LevyTriplet(sigma2=-1.0)

    def test_stable_preset_default_drift_needs_beta_in_range(self):
        """Test that beta = 1 is rejected unless a drift is given."""
        with pytest.raises(InvalidTripletError, match="1 < beta < 2"):
            stable(beta=1.0)
        assert stable(beta=1.0, mu=1.0).mu == 1.0
        assert stable(beta=1.25).mu == pytest.approx(4.0)


class TestClassifyPaths:
    """Test the path-regime classification."""

    def test_brownian(self):
        """Test that the zero measure is BM-only."""
        assert classify_paths(LevyMeasure()) is PathClass.BM_ONLY

    def test_compound_poisson(self):
        """Test that finite measures are finite-activity."""
        assert classify_paths(unit_atom_measure()) is PathClass.FINITE_ACTIVITY

    def test_exponential_density_is_finite_activity(self):
        """Test that e^y dy has unit mass and counts as finite-activity."""
        measure = LevyMeasure(pieces=(ExponentialDensity(),))
        assert classify_paths(measure) is PathClass.FINITE_ACTIVITY

    def test_power_laws(self):
        """Test the two infinite-activity regimes."""
        assert classify_paths(stable_piece(0.5)) is PathClass.INFINITE_ACTIVITY_FINITE_VARIATION
        assert classify_paths(stable_piece(1.5)) is PathClass.INFINITE_VARIATION


class TestPsi:
    """Test the Laplace exponent."""

    def test_brownian_motion(self):
        """Test psi(2) = 4 for sigma2 = 1, mu = 1."""
        assert psi(LevyTriplet(sigma2=1.0, mu=1.0), 2.0) == pytest.approx(4.0)

    def test_unit_atom(self):
        """Test psi(beta) = beta + e^(-beta) - 1."""
        triplet = LevyTriplet(sigma2=0.0, measure=unit_atom_measure(), mu=1.0)
        assert psi(triplet, 1.0).real == pytest.approx(math.exp(-1), rel=1e-13)

    def test_exponential_jumps(self):
        """Test psi(1) = 2 + 1/2 - 1 for drift 2 and unit exponential jumps."""
        triplet = LevyTriplet(sigma2=0.0, measure=LevyMeasure(pieces=(ExponentialDensity(),)), mu=2.0)
        assert psi(triplet, 1.0).real == pytest.approx(1.5, rel=1e-13)

    def test_stable_closed_form(self):
        """Test psi(theta) = Gamma(-beta) theta^beta for the stable preset."""
        triplet = stable(beta=1.5)
        for theta in (0.5, 1.0, 3.0):
            expected = special.gamma(-1.5) * theta ** 1.5
            assert psi(triplet, theta).real == pytest.approx(expected, rel=1e-7)

    def test_complex_argument(self):
        """Test that psi(i u) of Brownian motion is -u^2 sigma2 / 2 + i mu u."""
        value = psi(LevyTriplet(sigma2=2.0, mu=1.0), 3j + 0.0)
        assert value.real == pytest.approx(-9.0)
        assert value.imag == pytest.approx(3.0)

    def test_negative_real_part_rejected(self):
        """Test that Re(beta) < 0 raises ArgumentError."""
        with pytest.raises(ArgumentError):
            psi(LevyTriplet(sigma2=1.0), -1.0)

    @pytest.mark.parametrize("triplet", [
        LevyTriplet(sigma2=1.0, mu=-1.0, label="brownian-down"),
        exponential_jumps(mu=0.5),
        lognormal_cramer_lundberg(mu=1.0),
        stable(beta=1.5),
    ], ids=lambda t: t.label)
    def test_convex_and_increasing_past_phi0(self, triplet):
        """Test increasing values and positive second differences at five points beyond Phi(0)."""
        psi_eval = psi_real(triplet)
        start = phi_root(psi_eval, 0.0).phi
        d = 0.1
        for i in range(5):
            beta = start + d + 0.5 * i
            left, mid, right = psi_eval(beta - d), psi_eval(beta), psi_eval(beta + d)
            assert left < mid < right
            assert left - 2 * mid + right > 0


class TestSmallJumpDiagnostics:
    """Test small-jump functionals and the exponent fit."""

    def test_exponent_of_stable_like_density(self):
        """Test that |y|^(-5/2) fits an exponent near 3/2 with both bounds holding."""
        diag = small_jump_diagnostics(stable_piece(1.5))
        assert diag.epsilon_estimate == pytest.approx(1.5, abs=0.02)
        assert diag.assumption_ok
        assert diag.path_class is PathClass.INFINITE_VARIATION

    def test_finite_variation_skips_fit(self):
        """Test that kappa(0) < inf yields no exponent."""
        diag = small_jump_diagnostics(stable_piece(0.5))
        assert diag.kappa_zero_finite
        assert diag.epsilon_estimate is None

    def test_zeta_is_delta_times_kappa(self):
        """Test zeta(delta) = delta * kappa(delta)."""
        diag = small_jump_diagnostics(stable_piece(1.5), deltas=(0.5, 0.25))
        for d, k, z in zip(diag.deltas, diag.kappa, diag.zeta):
            assert z == pytest.approx(d * k)

    def test_bad_deltas_rejected(self):
        """Test that deltas outside (0, 1] raise."""
        with pytest.raises(ArgumentError):
            small_jump_diagnostics(stable_piece(1.5), deltas=(2.0,))


class TestPositiveMeasure:
    """Test the immigration measure on (0, inf)."""

    def test_exponential_tail(self):
        """Test m[1/2, inf) = e^(-1/2) for m(dy) = e^(-y) dy."""
        assert positive_interval_mass(cbi_immigration(), 0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)

    def test_atoms_are_left_closed(self):
        """Test that m[a, b) counts an atom at a only."""
        measure = PositiveMeasure(atoms=((1.0, 2.0),))
        assert positive_interval_mass(measure, 1.0, 1.5) == 2.0
        assert positive_interval_mass(measure, 0.5, 1.0) == 0.0

    def test_negative_location_rejected(self):
        """Test that positive atoms must sit in (0, inf)."""
        with pytest.raises(InvalidTripletError):
            PositiveMeasure(atoms=((-1.0, 1.0),))
