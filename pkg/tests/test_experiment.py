"""Branch bookkeeping, screen patterns, kick estimates, and sampling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kickscope import (
    SYMMETRIC,
    ConfigurationError,
    DetectorConfig,
    DomainError,
    EmptyBranchError,
    GridSpec,
    Outcome,
    PhysicalUnits,
    SlitGeometry,
    apply_kick,
    assemble,
    build_uqsd,
    change_basis,
    conditional_density,
    fringe_analysis,
    fringe_window,
    kick_identity_residual,
    kick_report,
    momentum_shift,
    phase_kick_shift,
    propagate_all,
    propagate_analytic,
    reference_state,
    sample_events,
    screen_density,
    screen_goodness_of_fit,
    slit_state,
    storey_bound_report,
    tilted,
    tilted_relative_kick,
    to_momentum,
)
from kickscope.experiment import BranchState

# Frozen closed forms.  The identity residual is
# sqrt(2*(1 - exp(-pi^2 (sigma/d)^2 / 2))), evaluated independently.
RESIDUAL_BY_RATIO = {
    0.005: 0.015707478807329936,
    0.01: 0.031412051149745726,
    0.02: 0.06280085954216114,
    0.05: 0.15659640250245993,
}
FRINGE_PERIOD_T005 = 0.3141592653589793  # 2*pi*hbar*t/(m*d) at t = 0.05


def make_state(geom, grid, c, theta=0.0, basis=SYMMETRIC):
    state = assemble(geom, grid, build_uqsd(DetectorConfig(c=c, theta=theta)))
    return change_basis(state, basis)


class TestAssembly:
    def test_branch_probabilities(self, geom, grid):
        state = assemble(geom, grid, build_uqsd(DetectorConfig(c=0.36)))
        assert_allclose(
            state.branch_probabilities(), [0.32, 0.32, 0.36], rtol=0, atol=1e-12
        )
        assert_allclose(state.total_probability(), 1.0, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("theta", [0.0, math.pi / 3, -1.0])
    def test_probabilities_survive_basis_changes(self, geom, grid, theta):
        # The packets don't overlap, so each basis splits the success
        # sector into two equal halves regardless of the detector phase.
        state = make_state(geom, grid, c=0.36, theta=theta, basis=SYMMETRIC)
        assert_allclose(
            state.branch_probabilities(), [0.32, 0.32, 0.36], rtol=0, atol=1e-12
        )

    def test_failure_probability_equals_c(self, geom, grid):
        for c in (0.0, 0.25, 0.7, 1.0):
            state = assemble(geom, grid, build_uqsd(DetectorConfig(c=c)))
            assert_allclose(state.branch_probabilities()[2], c, rtol=0, atol=1e-12)

    def test_basis_round_trip(self, geom, grid):
        state = assemble(geom, grid, build_uqsd(DetectorConfig(c=0.36, theta=0.9)))
        back = change_basis(change_basis(state, tilted(0.7)), state.basis)
        for a, b in zip(back.branches, state.branches):
            assert_allclose(a.amplitudes, b.amplitudes, rtol=0, atol=1e-12)

    def test_propagation_commutes_with_basis_change(self, geom, grid, units):
        state = assemble(geom, grid, build_uqsd(DetectorConfig(c=0.5, theta=0.4)))
        a = change_basis(propagate_all(state, geom, units), SYMMETRIC)
        b = propagate_all(change_basis(state, SYMMETRIC), geom, units)
        for br_a, br_b in zip(a.branches, b.branches):
            assert np.max(np.abs(br_a.amplitudes - br_b.amplitudes)) <= 1e-12

    def test_branches_must_share_grid(self, geom, grid):
        other = GridSpec(n=grid.n, x_min=grid.x_min - 1.0, x_max=grid.x_max - 1.0)
        psi = slit_state(geom, grid, 1)
        stray = slit_state(geom, other, 1)
        with pytest.raises(ConfigurationError):
            BranchState(basis=SYMMETRIC, branches=(psi, stray, psi))


class TestScreenDensity:
    def test_basis_invariance(self, geom, grid, units):
        state = assemble(geom, grid, build_uqsd(DetectorConfig(c=0.5, theta=0.8)))
        propagated = propagate_all(state, geom, units)
        rho_comp = screen_density(propagated).values
        for basis in (SYMMETRIC, tilted(1.1)):
            rho = screen_density(change_basis(propagated, basis)).values
            assert np.max(np.abs(rho - rho_comp)) <= 1e-12

    @pytest.mark.parametrize("c,theta", [(0.0, 0.0), (0.5, 0.0), (0.5, 2.0), (1.0, 0.0)])
    def test_matches_direct_formula(self, geom, grid, units, c, theta):
        # rho = (|psi1|^2 + |psi2|^2)/2 + Re[<d1|d2> psi1* psi2] needs no
        # branch decomposition at all; the three-branch sum must agree.
        state = make_state(geom, grid, c=c, theta=theta)
        rho = screen_density(propagate_all(state, geom, units)).values
        psi1 = propagate_analytic(geom, grid, units, slit=1).amplitudes
        psi2 = propagate_analytic(geom, grid, units, slit=2).amplitudes
        overlap = c * np.exp(1j * theta)
        direct = 0.5 * (np.abs(psi1) ** 2 + np.abs(psi2) ** 2) + np.real(
            overlap * np.conj(psi1) * psi2
        )
        assert np.max(np.abs(rho - direct)) <= 1e-10

    def test_pattern_total_is_one(self, geom, grid, units):
        state = make_state(geom, grid, c=0.3)
        pattern = screen_density(propagate_all(state, geom, units))
        assert_allclose(pattern.total(), 1.0, rtol=0, atol=1e-12)


class TestConditionalDensity:
    def test_success_and_failure_agree_when_phase_free(self, geom, grid, units):
        # At theta = 0 both the q+ and failure branches hold the same
        # symmetric superposition, so their patterns are identical.
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        p_plus, rho_plus = conditional_density(state, Outcome.Q_PLUS)
        p_fail, rho_fail = conditional_density(state, Outcome.Q3)
        assert_allclose(p_plus, 0.25, rtol=0, atol=1e-12)
        assert_allclose(p_fail, 0.5, rtol=0, atol=1e-12)
        assert np.max(np.abs(rho_plus.values - rho_fail.values)) <= 1e-10

    def test_kicked_branch_is_half_period_out_of_step(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        _, rho_minus = conditional_density(state, Outcome.Q_MINUS)
        fr = fringe_analysis(rho_minus, geom, units)
        assert_allclose(
            abs(fr.central_fringe_shift), FRINGE_PERIOD_T005 / 2.0, atol=2 * grid.dx
        )

    def test_conditioned_patterns_are_normalized(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.36, theta=1.0), geom, units)
        for outcome in state.basis.outcomes:
            _, rho = conditional_density(state, outcome)
            assert_allclose(rho.total(), 1.0, rtol=0, atol=1e-12)

    def test_rejects_foreign_outcome(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        with pytest.raises(DomainError):
            conditional_density(state, Outcome.PATH_1)

    def test_empty_branch_raises(self, geom, grid, units):
        no_fail = propagate_all(make_state(geom, grid, c=0.0), geom, units)
        with pytest.raises(EmptyBranchError):
            conditional_density(no_fail, Outcome.Q3)
        all_fail = propagate_all(make_state(geom, grid, c=1.0), geom, units)
        with pytest.raises(EmptyBranchError):
            conditional_density(all_fail, Outcome.Q_MINUS)


class TestFringes:
    def test_window_brackets_two_periods(self, geom, units):
        lo, hi = fringe_window(geom, units)
        assert_allclose(lo, 0.5 - FRINGE_PERIOD_T005, rtol=0, atol=1e-15)
        assert_allclose(hi, 0.5 + FRINGE_PERIOD_T005, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("c", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_visibility_tracks_overlap(self, geom, grid, units, c):
        state = propagate_all(make_state(geom, grid, c=c), geom, units)
        fr = fringe_analysis(screen_density(state), geom, units)
        assert abs(fr.visibility - c) <= 0.02

    def test_full_visibility_pattern(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=1.0), geom, units)
        fr = fringe_analysis(screen_density(state), geom, units)
        assert fr.visibility >= 0.995
        assert_allclose(fr.fringe_period, FRINGE_PERIOD_T005, rtol=0.02)
        assert abs(fr.central_fringe_shift) <= grid.dx

    def test_reference_pattern_defines_zero_shift(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.8), geom, units)
        pattern = screen_density(state)
        fr = fringe_analysis(pattern, geom, units, reference=pattern)
        assert fr.central_fringe_shift == 0.0

    def test_rejects_malformed_window(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=1.0), geom, units)
        with pytest.raises(ConfigurationError):
            fringe_analysis(screen_density(state), geom, units, window=(2.0, 1.0))


class TestKickIdentity:
    def test_matches_closed_form(self):
        grid = GridSpec(n=2048, x_min=-0.78, x_max=1.78)
        for ratio, expected in RESIDUAL_BY_RATIO.items():
            got = kick_identity_residual(SlitGeometry(d=1.0, sigma=ratio), grid)
            assert_allclose(got, expected, rtol=1e-9)

    def test_monotone_in_slit_width(self):
        grid = GridSpec(n=2048, x_min=-0.78, x_max=1.78)
        values = [
            kick_identity_residual(SlitGeometry(d=1.0, sigma=r), grid)
            for r in sorted(RESIDUAL_BY_RATIO)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_narrow_slit_is_small(self):
        grid = GridSpec(n=2048, x_min=-0.78, x_max=1.78)
        assert kick_identity_residual(SlitGeometry(d=1.0, sigma=0.01), grid) <= 0.05


class TestMomentumShift:
    def test_recovers_whole_bin_shifts(self, geom, grid):
        psi = reference_state(geom, grid)
        spec = to_momentum(psi)
        for bins in (7, -4, 0):
            kicked = to_momentum(apply_kick(psi, bins * spec.dp))
            assert_allclose(
                momentum_shift(kicked, spec), bins * spec.dp, rtol=0, atol=1e-12
            )

    def test_half_turn_tie_breaks_non_negative(self, geom, grid):
        # A shift of exactly half the box is its own mirror image; the
        # estimator must pick the non-negative candidate, deterministically.
        psi = slit_state(geom, grid, 1)
        spec = to_momentum(psi)
        kicked = to_momentum(apply_kick(psi, (grid.n // 2) * spec.dp))
        assert_allclose(
            momentum_shift(kicked, spec), (grid.n // 2) * spec.dp, rtol=0, atol=1e-12
        )

    def test_empty_spectrum_raises(self, geom, grid):
        from kickscope import Wavefunction

        psi = slit_state(geom, grid, 1)
        zero = to_momentum(Wavefunction(grid, np.zeros(grid.n, dtype=complex)))
        with pytest.raises(EmptyBranchError):
            momentum_shift(to_momentum(psi), zero)


class TestKickReport:
    def test_report_against_theory(self, geom, grid, units):
        c = 0.36
        state = make_state(geom, grid, c=c, theta=math.pi / 3)
        report = kick_report(state, geom, units, DetectorConfig(c=c, theta=math.pi / 3))
        dp = to_momentum(state.branches[0]).dp
        assert_allclose(report.p0, math.pi, rtol=0, atol=1e-15)
        assert_allclose(report.F_k_theory, 0.32, rtol=0, atol=1e-15)
        assert_allclose(report.F_k_branch, 0.32, rtol=0, atol=1e-12)
        assert abs(report.p0_measured - math.pi) <= dp
        assert_allclose(report.p_e, math.pi / 3, rtol=0, atol=1e-15)
        assert report.kick_identity_residual > 0.0

    @pytest.mark.parametrize("c", [0.1, 0.5, 0.9])
    def test_measured_kick_within_one_bin(self, geom, grid, units, c):
        state = make_state(geom, grid, c=c)
        report = kick_report(state, geom, units, DetectorConfig(c=c))
        dp = to_momentum(state.branches[0]).dp
        assert abs(report.p0_measured - math.pi) <= dp

    def test_kick_survives_propagation(self, geom, grid, units):
        # |Phi|^2 is invariant under free flight, so the estimate is too.
        state = make_state(geom, grid, c=0.5)
        before = kick_report(state, geom, units, DetectorConfig(c=0.5))
        after = kick_report(
            propagate_all(state, geom, units), geom, units, DetectorConfig(c=0.5)
        )
        assert before.p0_measured == after.p0_measured

    def test_everything_fails_at_full_overlap(self, geom, grid, units):
        report = kick_report(
            make_state(geom, grid, c=1.0), geom, units, DetectorConfig(c=1.0)
        )
        assert report.p0_measured is None
        assert report.F_k_branch == pytest.approx(0.0, abs=1e-12)

    def test_requires_symmetric_basis(self, geom, grid, units):
        state = make_state(geom, grid, c=0.5, basis=tilted(0.3))
        with pytest.raises(DomainError):
            kick_report(state, geom, units, DetectorConfig(c=0.5))


class TestPhaseKick:
    @pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, math.pi])
    def test_failure_branch_shift_is_theta_over_d(self, geom, grid, units, theta):
        state = make_state(geom, grid, c=0.5, theta=theta)
        shift = phase_kick_shift(state, geom, units)
        dp = to_momentum(state.branches[2]).dp
        assert abs(shift - theta) <= dp

    def test_no_phase_no_kick(self, geom, grid, units):
        state = make_state(geom, grid, c=0.5)
        assert abs(phase_kick_shift(state, geom, units)) <= 1e-15

    def test_phase_leaves_visibility_alone(self, geom, grid, units):
        base = fringe_analysis(
            screen_density(propagate_all(make_state(geom, grid, c=0.5), geom, units)),
            geom,
            units,
        )
        shifted = fringe_analysis(
            screen_density(
                propagate_all(make_state(geom, grid, c=0.5, theta=2.0), geom, units)
            ),
            geom,
            units,
        )
        assert abs(shifted.visibility - base.visibility) <= 0.01

    def test_empty_failure_branch_raises(self, geom, grid, units):
        with pytest.raises(EmptyBranchError):
            phase_kick_shift(make_state(geom, grid, c=0.0), geom, units)


class TestTiltedKick:
    @pytest.mark.parametrize("theta_prime", [0.0, math.pi / 4, math.pi / 2])
    def test_relative_kick_is_always_half_a_fringe(self, geom, grid, units, theta_prime):
        state = make_state(geom, grid, c=0.5)
        shift = tilted_relative_kick(state, geom, units, theta_prime)
        dp = to_momentum(state.branches[0]).dp
        assert abs(shift - math.pi) <= dp

    @pytest.mark.parametrize("theta_prime", [math.pi / 4, math.pi / 2])
    def test_branches_slide_with_the_tilt(self, geom, grid, units, theta_prime):
        # Each tilted branch individually shifts by -theta'*hbar/d (mod a
        # full momentum fringe); only the relative kick is tilt-free.
        state = change_basis(make_state(geom, grid, c=0.5), tilted(theta_prime))
        ref = to_momentum(reference_state(geom, grid))
        shift = momentum_shift(to_momentum(state.branches[0]), ref)
        dp = ref.dp
        assert abs(shift + theta_prime) <= dp

    def test_empty_branches_raise(self, geom, grid, units):
        with pytest.raises(EmptyBranchError):
            tilted_relative_kick(make_state(geom, grid, c=1.0), geom, units, 0.5)


class TestStoreyBound:
    @pytest.mark.parametrize("v", np.round(np.arange(0.0, 1.01, 0.1), 10).tolist())
    def test_holds_across_visibilities(self, v):
        report = storey_bound_report(v)
        assert report.lhs == pytest.approx(math.pi, abs=1e-15)
        assert report.rhs == pytest.approx(1.0 - v, abs=1e-12)
        assert report.satisfied

    def test_rejects_visibility_outside_unit_interval(self):
        with pytest.raises(DomainError):
            storey_bound_report(1.2)


class TestSampling:
    def test_same_seed_same_events(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        a = sample_events(state, 2000, seed=11)
        b = sample_events(state, 2000, seed=11)
        assert [e.outcome for e in a] == [e.outcome for e in b]
        assert [e.x for e in a] == [e.x for e in b]

    def test_different_seed_different_events(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        a = sample_events(state, 2000, seed=11)
        b = sample_events(state, 2000, seed=12)
        assert [e.x for e in a] != [e.x for e in b]

    def test_outcome_frequencies(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        count = 20000
        events = sample_events(state, count, seed=20260819)
        for outcome, prob in zip(state.basis.outcomes, (0.25, 0.25, 0.5)):
            freq = sum(1 for e in events if e.outcome is outcome) / count
            sigma = math.sqrt(prob * (1.0 - prob) / count)
            assert abs(freq - prob) <= 4.0 * sigma

    def test_positions_stay_on_grid(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        xs = np.array([e.x for e in sample_events(state, 2000, seed=3)])
        assert xs.min() >= grid.x_min and xs.max() <= grid.x_max

    def test_certain_failure_yields_only_failures(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=1.0), geom, units)
        events = sample_events(state, 500, seed=5)
        assert all(e.outcome is Outcome.Q3 for e in events)

    def test_positions_follow_the_pattern(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        events = sample_events(state, 20000, seed=20260819)
        xs = np.array([e.x for e in events])
        _, pvalue = screen_goodness_of_fit(xs, screen_density(state))
        assert pvalue > 0.01

    def test_goodness_of_fit_needs_enough_samples(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        xs = np.array([e.x for e in sample_events(state, 400, seed=3)])
        with pytest.raises(DomainError):
            screen_goodness_of_fit(xs, screen_density(state), n_bins=50)

    def test_rejects_negative_count(self, geom, grid, units):
        state = propagate_all(make_state(geom, grid, c=0.5), geom, units)
        with pytest.raises(DomainError):
            sample_events(state, -5, seed=1)
        assert sample_events(state, 0, seed=1) == []
