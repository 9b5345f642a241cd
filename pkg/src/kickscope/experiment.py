"""Branch-resolved two-slit interference with a which-way detector.

A run of the experiment is represented as a `BranchState`: three spatial
wavefunctions, one per detector basis vector, on a common grid.  In the
computational basis the branches are the two flagged paths and the
discrimination failure; rotating to the symmetric basis ``q+- = (q1 +-
q2)/sqrt(2)`` re-expresses the same state as an un-kicked branch, a branch
carrying an apparent momentum kick of half a fringe period, and the
failure branch.  Everything observable - screen densities, fringe
visibility, momentum-kick estimates, detection events - is extracted from
a `BranchState` by the functions in this module.

Momentum-shift estimates are cross-correlation arguments of the maximum.
Because a shift of exactly half a momentum-fringe period is indistinguishable
from its negative, ties are resolved toward the smallest magnitude and then
toward the non-negative shift; see :func:`momentum_shift`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft
import scipy.stats

from .errors import ConfigurationError, DomainError, EmptyBranchError
from .hilbert import (
    COMPUTATIONAL,
    Basis,
    DetectorConfig,
    Outcome,
    UqsdCoefficients,
    basis_matrix,
    tilted,
)
from .wavepacket import (
    GridSpec,
    MomentumSpectrum,
    PhysicalUnits,
    SlitGeometry,
    Wavefunction,
    propagate_fft,
    slit_state,
    to_momentum,
)

__all__ = [
    "BranchState",
    "ScreenPattern",
    "FringeAnalysis",
    "KickReport",
    "StoreyBound",
    "EventSample",
    "reference_state",
    "assemble",
    "change_basis",
    "propagate_all",
    "screen_density",
    "conditional_density",
    "fringe_window",
    "fringe_analysis",
    "kick_identity_residual",
    "momentum_shift",
    "kick_report",
    "phase_kick_shift",
    "tilted_relative_kick",
    "storey_bound_report",
    "sample_events",
    "screen_goodness_of_fit",
]

#: Branch probabilities below this are treated as empty (no conditional
#: pattern, no kick estimate).
EMPTY_BRANCH_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class BranchState:
    """Three branch wavefunctions tagged with the detector basis they live in."""

    basis: Basis
    branches: tuple[Wavefunction, Wavefunction, Wavefunction]

    def __post_init__(self) -> None:
        grids = {b.grid for b in self.branches}
        if len(grids) != 1:
            raise ConfigurationError("all branches must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.branches[0].grid

    def branch_probabilities(self) -> np.ndarray:
        """Probability carried by each branch (its squared norm)."""
        return np.array([b.norm() for b in self.branches])

    def total_probability(self) -> float:
        return float(self.branch_probabilities().sum())


@dataclass(frozen=True, eq=False)
class ScreenPattern:
    """A probability density on the screen (position grid)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.n,):
            raise ConfigurationError(
                f"pattern has shape {vals.shape}, expected ({self.grid.n},)"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def total(self) -> float:
        """Integrated probability ``sum rho dx``."""
        return float(self.values.sum() * self.grid.dx)


@dataclass(frozen=True)
class FringeAnalysis:
    """Visibility and fringe bookkeeping extracted from a screen pattern."""

    visibility: float
    fringe_period: float
    central_fringe_shift: float
    window: tuple[float, float]


@dataclass(frozen=True)
class KickReport:
    """Momentum-kick summary for a symmetric-basis branch state.

    ``p0`` is the half-fringe kick ``pi*hbar/d`` expected from the
    branch algebra; ``p0_measured`` is the cross-correlation estimate from
    the q- and q+ momentum spectra (``None`` when the kicked branch is
    empty, i.e. c = 1).  ``F_k_branch`` is the probability of the kicked
    branch and ``F_k_theory = (1 - c)/2``.  ``p_e = theta*hbar/d`` is the
    deterministic kick carried by the failure branch when the detector
    overlap has a phase.
    """

    p0: float
    p0_measured: float | None
    F_k_theory: float
    F_k_branch: float
    kick_identity_residual: float
    p_e: float


@dataclass(frozen=True)
class StoreyBound:
    """The Storey inequality ``p_m * d / hbar >= 1 - V`` at a given visibility."""

    lhs: float
    rhs: float
    satisfied: bool


@dataclass(frozen=True)
class EventSample:
    """One detection: which outcome fired and where the particle landed."""

    outcome: Outcome
    x: float


def reference_state(geom: SlitGeometry, grid: GridSpec) -> Wavefunction:
    """The detector-free superposition ``(psi1 + psi2)/sqrt(2)``."""
    psi1 = slit_state(geom, grid, 1)
    psi2 = slit_state(geom, grid, 2)
    return Wavefunction(grid, (psi1.amplitudes + psi2.amplitudes) / math.sqrt(2.0))


def assemble(geom: SlitGeometry, grid: GridSpec, coeffs: UqsdCoefficients) -> BranchState:
    """Entangle the slit states with the decomposed detector.

    Returns the computational-basis branch state

        (alpha*psi1/sqrt2, gamma*psi2/sqrt2, (beta*psi1 + delta*psi2)/sqrt2)

    whose branch probabilities are ``(1-c)/2, (1-c)/2, c``.
    """
    psi1 = slit_state(geom, grid, 1)
    psi2 = slit_state(geom, grid, 2)
    s = 1.0 / math.sqrt(2.0)
    b1 = Wavefunction(grid, coeffs.alpha * s * psi1.amplitudes)
    b2 = Wavefunction(grid, coeffs.gamma * s * psi2.amplitudes)
    b3 = Wavefunction(grid, s * (coeffs.beta * psi1.amplitudes + coeffs.delta * psi2.amplitudes))
    return BranchState(COMPUTATIONAL, (b1, b2, b3))


def change_basis(state: BranchState, to: Basis) -> BranchState:
    """Re-express the branch state in another detector basis.

    The transform is unitary, so branch probabilities re-distribute while
    the summed screen density stays exactly the same.
    """
    m = basis_matrix(state.basis, to)
    grid = state.grid
    amps = [b.amplitudes for b in state.branches]
    new = tuple(
        Wavefunction(grid, m[i, 0] * amps[0] + m[i, 1] * amps[1] + m[i, 2] * amps[2])
        for i in range(3)
    )
    return BranchState(to, new)


def propagate_all(state: BranchState, geom: SlitGeometry, units: PhysicalUnits) -> BranchState:
    """Propagate every branch freely for ``units.t``.

    Propagation is linear, so it commutes with :func:`change_basis`.
    Branches that are exactly empty are passed through untouched.
    """
    out = []
    for b in state.branches:
        if float(np.vdot(b.amplitudes, b.amplitudes).real) == 0.0:
            out.append(b)
        else:
            out.append(propagate_fft(b, geom, units))
    return BranchState(state.basis, tuple(out))


def screen_density(state: BranchState) -> ScreenPattern:
    """Total screen density: the incoherent sum of branch densities.

    Independent of the detector basis, since basis changes are unitary.
    """
    rho = np.zeros(state.grid.n)
    for b in state.branches:
        rho += b.density()
    return ScreenPattern(state.grid, rho)


def conditional_density(state: BranchState, outcome: Outcome) -> tuple[float, ScreenPattern]:
    """Probability of ``outcome`` and the normalized pattern given it.

    Raises
    ------
    DomainError
        If the outcome does not belong to the state's basis.
    EmptyBranchError
        If the branch carries (numerically) zero probability.
    """
    outcomes = state.basis.outcomes
    if outcome not in outcomes:
        raise DomainError(f"outcome {outcome} is not measurable in the {state.basis.kind} basis")
    branch = state.branches[outcomes.index(outcome)]
    prob = branch.norm()
    if prob < EMPTY_BRANCH_TOL:
        raise EmptyBranchError(f"branch {outcome} has zero probability; no pattern")
    return prob, ScreenPattern(state.grid, branch.density() / prob)


def fringe_window(geom: SlitGeometry, units: PhysicalUnits) -> tuple[float, float]:
    """Default analysis window: two far-field fringe periods around x = d/2."""
    period = 2.0 * math.pi * units.hbar * units.t / (units.mass * geom.d)
    center = geom.d / 2.0
    return (center - period, center + period)


def _refine_extremum(x: np.ndarray, v: np.ndarray, i: int, dx: float) -> tuple[float, float]:
    # Parabolic refinement through (i-1, i, i+1); assumes 0 < i < len(v)-1.
    vm, v0, vp = v[i - 1], v[i], v[i + 1]
    denom = vm - 2.0 * v0 + vp
    if denom == 0.0:
        return float(x[i]), float(v0)
    delta = 0.5 * (vm - vp) / denom
    return float(x[i] + delta * dx), float(v0 - 0.25 * (vm - vp) * delta)


def fringe_analysis(
    pattern: ScreenPattern,
    geom: SlitGeometry,
    units: PhysicalUnits,
    window: tuple[float, float] | None = None,
    reference: ScreenPattern | None = None,
) -> FringeAnalysis:
    """Measure visibility from adjacent extrema inside an analysis window.

    Parameters
    ----------
    pattern : ScreenPattern
        Far-field screen density.
    geom, units : SlitGeometry, PhysicalUnits
        Used for the default window and the fallback period estimate.
    window : (float, float), optional
        Analysis interval; defaults to :func:`fringe_window`.
    reference : ScreenPattern, optional
        Pattern whose central maximum defines the zero of
        ``central_fringe_shift``.  Defaults to the ideal fringe center at
        ``x = d/2``.

    Returns
    -------
    FringeAnalysis
        Visibility ``(I_max - I_min)/(I_max + I_min)`` from the adjacent
        extremum pair nearest the window center.  When the pattern has no
        interior minima in the window (no fringes, e.g. a fully decohered
        pattern) the contrast of the windowed values is reported instead,
        and the period falls back to the far-field estimate
        ``2*pi*hbar*t/(m*d)`` so it stays positive.
    """
    if window is None:
        window = fringe_window(geom, units)
    lo, hi = window
    x = pattern.grid.x
    sel = (x >= lo) & (x <= hi)
    if lo >= hi or int(sel.sum()) < 5:
        raise ConfigurationError(f"analysis window {window} is malformed for this grid")
    xs = x[sel]
    vals = pattern.values[sel]
    dx = pattern.grid.dx
    center = 0.5 * (lo + hi)

    interior = np.arange(1, len(vals) - 1)
    v0, vm, vp = vals[interior], vals[interior - 1], vals[interior + 1]
    max_idx = interior[(v0 > vm) & (v0 > vp)]
    min_idx = interior[(v0 < vm) & (v0 < vp)]

    maxima = [_refine_extremum(xs, vals, i, dx) for i in max_idx]
    minima = [_refine_extremum(xs, vals, i, dx) for i in min_idx]

    period_estimate = 2.0 * math.pi * units.hbar * units.t / (units.mass * geom.d)

    if maxima and minima:
        x_max, v_max = min(maxima, key=lambda mv: abs(mv[0] - center))
        x_min, v_min = min(minima, key=lambda mv: abs(mv[0] - x_max))
        visibility = (v_max - v_min) / (v_max + v_min)
        if len(maxima) >= 2:
            pos = sorted(mv[0] for mv in maxima)
            period = float(np.median(np.diff(pos)))
        else:
            period = 2.0 * abs(x_max - x_min)
        central_max = x_max
    else:
        # No fringe structure worth the name: report the windowed contrast.
        v_max = float(vals.max())
        v_min = float(vals.min())
        visibility = (v_max - v_min) / (v_max + v_min)
        period = period_estimate
        i = int(np.argmax(vals))
        central_max = (
            _refine_extremum(xs, vals, i, dx)[0] if 0 < i < len(vals) - 1 else float(xs[i])
        )

    if reference is not None:
        ref = fringe_analysis(reference, geom, units, window=window)
        ref_center = ref.central_fringe_shift + geom.d / 2.0
    else:
        ref_center = geom.d / 2.0

    return FringeAnalysis(
        visibility=float(visibility),
        fringe_period=float(period),
        central_fringe_shift=float(central_max - ref_center),
        window=(float(lo), float(hi)),
    )


def kick_identity_residual(geom: SlitGeometry, grid: GridSpec) -> float:
    """How far the path-difference state is from a kicked path-sum state.

    Returns the L2 norm of ``(psi1 - psi2)/sqrt2 - exp(i*pi*x/d) * (psi1 +
    psi2)/sqrt2``.  For slits much narrower than their separation the phase
    factor is nearly constant across each slit and the residual scales like
    ``pi*sigma/d``; it vanishes only in the zero-width limit.
    """
    psi1 = slit_state(geom, grid, 1)
    psi2 = slit_state(geom, grid, 2)
    s = 1.0 / math.sqrt(2.0)
    phase = np.exp(1j * math.pi * grid.x / geom.d)
    diff = s * (psi1.amplitudes - psi2.amplitudes) - phase * s * (
        psi1.amplitudes + psi2.amplitudes
    )
    return float(math.sqrt(np.vdot(diff, diff).real * grid.dx))


def momentum_shift(
    spec_a: MomentumSpectrum, spec_b: MomentumSpectrum, tie_rel_tol: float = 1e-9
) -> float:
    """Displacement of spectrum ``a`` relative to ``b`` in momentum.

    Computed as the argmax of the circular cross-correlation of the two
    momentum densities.  A displacement of exactly half a momentum-fringe
    period correlates equally well at the opposite sign, so candidates
    within ``tie_rel_tol`` of the maximum are tied and the tie is broken
    toward the smallest magnitude, then toward the non-negative shift.

    Raises
    ------
    EmptyBranchError
        If either spectrum carries no probability.
    ConfigurationError
        If the spectra live on different grids.
    """
    if spec_a.grid != spec_b.grid or spec_a.hbar != spec_b.hbar:
        raise ConfigurationError("spectra must share one momentum grid")
    a = spec_a.density()
    b = spec_b.density()
    if a.sum() < EMPTY_BRANCH_TOL or b.sum() < EMPTY_BRANCH_TOL:
        raise EmptyBranchError("cannot estimate a shift from an empty spectrum")
    n = spec_a.grid.n
    corr = scipy.fft.irfft(scipy.fft.rfft(a) * np.conj(scipy.fft.rfft(b)), n)
    cmax = corr.max()
    ties = np.flatnonzero(corr >= cmax - tie_rel_tol * abs(cmax))
    # Map to signed bins; the Nyquist bin n//2 stays positive so the
    # tie-break below can prefer the non-negative half-turn.
    signed = np.where(ties > n // 2, ties - n, ties)
    best = min(signed, key=lambda s: (abs(int(s)), int(s) < 0))
    return float(best * spec_a.dp)


def _comb_projection(spec: MomentumSpectrum, d: float) -> complex:
    """Single-frequency transform of the momentum density at the fringe
    frequency ``d/hbar``; its argument is the comb phase."""
    rho = spec.density()
    return complex(np.sum(rho * np.exp(-1j * spec.p * (d / spec.hbar))))


def _comb_shift(spec_a: MomentumSpectrum, spec_b: MomentumSpectrum, d: float) -> float:
    """Relative displacement of two fringe-comb spectra, to sub-bin accuracy.

    Two-path spectra are combs of period ``2*p0 = 2*pi*hbar/d`` under a
    smooth envelope.  A bare cross-correlation argmax is limited to one
    momentum bin and is pulled toward zero by the envelope, so instead the
    comb phase is read off exactly from the projection at the fringe
    frequency; the argmax only resolves the integer fringe branch.  Half-turn
    displacements are reported as ``+p0``, matching :func:`momentum_shift`.
    """
    p0 = math.pi * spec_a.hbar / d
    z_a = _comb_projection(spec_a, d)
    z_b = _comb_projection(spec_b, d)
    if min(abs(z_a), abs(z_b)) < EMPTY_BRANCH_TOL:
        # No comb structure to read a phase from; fall back to the argmax.
        return momentum_shift(spec_a, spec_b)
    offset = -np.angle(z_a * np.conj(z_b)) * spec_a.hbar / d
    if offset <= -p0 * (1.0 - 1e-12):
        offset += 2.0 * p0
    coarse = momentum_shift(spec_a, spec_b)
    branch = round((coarse - offset) / (2.0 * p0))
    return float(offset + 2.0 * p0 * branch)


def kick_report(
    state: BranchState,
    geom: SlitGeometry,
    units: PhysicalUnits,
    detector: DetectorConfig,
) -> KickReport:
    """Momentum-kick bookkeeping for a symmetric-basis state.

    Parameters
    ----------
    state : BranchState
        Must be in the symmetric basis (use :func:`change_basis` first).
    geom, units : SlitGeometry, PhysicalUnits
        Geometry and scales; set ``p0 = pi*hbar/d``.
    detector : DetectorConfig
        Supplies ``c`` and ``theta`` for the theory-side entries.

    Notes
    -----
    Free evolution only multiplies momentum amplitudes by a phase, so the
    spectra (and the estimated shift) are the same whether ``state`` is
    propagated or not.
    """
    if state.basis.kind != "symmetric":
        raise DomainError("kick analysis requires the symmetric basis")
    q_plus, q_minus = state.branches[0], state.branches[1]
    f_branch = q_minus.norm()
    p0 = math.pi * units.hbar / geom.d
    if f_branch < EMPTY_BRANCH_TOL or q_plus.norm() < EMPTY_BRANCH_TOL:
        measured = None
    else:
        measured = _comb_shift(
            to_momentum(q_minus, hbar=units.hbar),
            to_momentum(q_plus, hbar=units.hbar),
            geom.d,
        )
    return KickReport(
        p0=p0,
        p0_measured=measured,
        F_k_theory=(1.0 - detector.c) / 2.0,
        F_k_branch=f_branch,
        kick_identity_residual=kick_identity_residual(geom, state.grid),
        p_e=detector.theta * units.hbar / geom.d,
    )


def phase_kick_shift(state: BranchState, geom: SlitGeometry, units: PhysicalUnits) -> float:
    """Momentum displacement of the failure branch against the phase-free one.

    The failure branch ``(beta*psi1 + delta*psi2)/sqrt2`` is common to all
    three bases, so any basis is accepted.  Returns the cross-correlation
    shift of its momentum density relative to the ``theta = 0`` failure
    spectrum, which equals ``theta*hbar/d`` up to momentum-bin rounding.
    """
    q3 = state.branches[2]
    if q3.norm() < EMPTY_BRANCH_TOL:
        raise EmptyBranchError("failure branch is empty; no phase kick to measure")
    ref = reference_state(geom, state.grid)
    return _comb_shift(
        to_momentum(q3, hbar=units.hbar), to_momentum(ref, hbar=units.hbar), geom.d
    )


def tilted_relative_kick(
    state: BranchState, geom: SlitGeometry, units: PhysicalUnits, theta_prime: float
) -> float:
    """Relative momentum kick between the two tilted interfering branches.

    Re-expresses ``state`` in the tilted basis with angle ``theta_prime``
    and estimates the shift of the q- spectrum against the q+ spectrum.
    The individual branch spectra slide with ``theta_prime`` but their
    relative displacement stays at half a fringe, ``pi*hbar/d``.
    """
    rotated = change_basis(state, tilted(theta_prime))
    q_plus, q_minus = rotated.branches[0], rotated.branches[1]
    if q_plus.norm() < EMPTY_BRANCH_TOL or q_minus.norm() < EMPTY_BRANCH_TOL:
        raise EmptyBranchError("tilted branches are empty; no relative kick")
    return _comb_shift(
        to_momentum(q_minus, hbar=units.hbar), to_momentum(q_plus, hbar=units.hbar), geom.d
    )


def storey_bound_report(visibility: float) -> StoreyBound:
    """Check the transferred-momentum bound ``p_m * d / hbar >= 1 - V``.

    The branch decomposition always transfers kicks of half a fringe,
    ``p_m = pi*hbar/d``, so the left-hand side is ``pi`` for every
    visibility and the bound holds with room to spare.
    """
    if not 0.0 <= visibility <= 1.0:
        raise DomainError(f"visibility must lie in [0, 1], got {visibility}")
    lhs = math.pi
    rhs = 1.0 - visibility
    return StoreyBound(lhs=lhs, rhs=rhs, satisfied=lhs >= rhs)


def _cell_cdf(pattern_values: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    # Piecewise-constant density per cell -> piecewise-linear CDF on cell edges.
    masses = pattern_values * grid.dx
    cdf = np.concatenate(([0.0], np.cumsum(masses)))
    total = cdf[-1]
    if total <= 0.0:
        raise EmptyBranchError("density integrates to zero; nothing to sample")
    edges = grid.x_min + grid.dx * np.arange(grid.n + 1)
    return cdf / total, edges


def sample_events(state: BranchState, count: int, seed: int) -> list[EventSample]:
    """Draw detection events from a (propagated) branch state.

    Outcomes follow the branch probabilities; positions are drawn from the
    selected branch's conditional density by inverting its piecewise-linear
    CDF.  The generator is ``numpy.random.default_rng(seed)`` (PCG64), so a
    fixed seed reproduces the event list bit for bit on any platform.
    """
    if count < 0:
        raise DomainError(f"event count must be non-negative, got {count}")
    probs = state.branch_probabilities()
    cum = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    u = rng.random((count, 2))
    branch_idx = np.minimum(np.searchsorted(cum, u[:, 0], side="right"), 2)
    xs = np.empty(count)
    for i in range(3):
        mask = branch_idx == i
        if not mask.any():
            continue
        cdf, edges = _cell_cdf(state.branches[i].density(), state.grid)
        xs[mask] = np.interp(u[mask, 1], cdf, edges)
    outcomes = state.basis.outcomes
    return [EventSample(outcomes[int(b)], float(x)) for b, x in zip(branch_idx, xs)]


def screen_goodness_of_fit(
    xs: Sequence[float] | np.ndarray, pattern: ScreenPattern, n_bins: int = 50
) -> tuple[float, float]:
    """Chi-square goodness of fit of sampled positions against a pattern.

    Bins are equal-probability quantiles of the pattern's cell-wise CDF, so
    every bin expects ``len(xs)/n_bins`` counts.  Returns ``(statistic,
    p_value)``.  Meant for strictly positive patterns such as propagated
    totals; exact zero-density stretches would collapse quantile bins.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size < 10 * n_bins:
        raise DomainError("too few samples for a meaningful binned test")
    cdf, edges = _cell_cdf(pattern.values, pattern.grid)
    quantiles = np.linspace(0.0, 1.0, n_bins + 1)
    bin_edges = np.interp(quantiles, cdf, edges)
    observed, _ = np.histogram(xs, bins=bin_edges)
    expected = np.full(n_bins, xs.size / n_bins)
    stat, pvalue = scipy.stats.chisquare(observed, f_exp=expected)
    return float(stat), float(pvalue)
