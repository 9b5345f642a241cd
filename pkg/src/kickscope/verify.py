"""Self-check suite: module invariants evaluated at a configured scale.

Each named check compares a computed quantity against an independent
expectation (closed-form oracle, algebraic identity, or statistical bound)
at a named tolerance.  ``run_suite`` prints one PASS/FAIL/SKIP line per
check and returns a process exit code: 0 when nothing failed, 1 otherwise.

Tolerances can be overridden per check name through the
``tolerance_overrides`` mapping; that exists so tests can inject an
impossible tolerance and watch the suite fail honestly.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Mapping, TextIO

import numpy as np

from .config import RunConfig
from .errors import EmptyBranchError
from .hilbert import (
    COMPUTATIONAL,
    SYMMETRIC,
    DetectorConfig,
    basis_matrix,
    build_uqsd,
    detector_states,
    tilted,
)
from .wavepacket import (
    GridSpec,
    SlitGeometry,
    apply_kick,
    propagate_analytic,
    propagate_fft,
    slit_state,
    to_momentum,
    to_position,
)
from .experiment import (
    BranchState,
    ScreenPattern,
    assemble,
    change_basis,
    fringe_analysis,
    kick_identity_residual,
    kick_report,
    momentum_shift,
    phase_kick_shift,
    propagate_all,
    sample_events,
    screen_density,
    screen_goodness_of_fit,
    storey_bound_report,
    tilted_relative_kick,
)

__all__ = ["CheckResult", "run_suite", "TOLERANCES"]

#: Default tolerance per check name.  Overridable through run_suite.
TOLERANCES: dict[str, float] = {
    "hilbert.normalization": 1e-12,
    "hilbert.unitarity": 1e-12,
    "wavepacket.normalization": 1e-10,
    "wavepacket.momentum_oracle": 1e-10,
    "wavepacket.roundtrip": 1e-12,
    "wavepacket.propagator_agreement": 1e-8,
    "wavepacket.kick_displacement": 1e-9,  # mean-momentum deviation
    "experiment.branch_probabilities": 1e-10,
    "experiment.failure_probability": 1e-10,
    "experiment.basis_invariance": 1e-12,
    "experiment.density_formula": 1e-10,
    "experiment.visibility_law": 0.02,
    "experiment.kick_fraction": 1e-10,
    "experiment.kick_fraction_vs_visibility": 0.01,
    "experiment.kick_magnitude": 1.0,  # momentum bins
    "experiment.detector_kick": 1.0,  # momentum bins
    "experiment.tilted_kick": 1.0,  # momentum bins
    "experiment.kick_identity": 1e-6,
    "experiment.phase_kick": 1.0,  # momentum bins
    "experiment.phase_visibility": 0.01,
    "experiment.storey_bound": 0.0,
    "experiment.sampler_outcomes": 3.0,  # binomial sigmas
    "experiment.sampler_gof": 0.01,  # minimum p-value
    "experiment.sampler_determinism": 0.0,
}

_C_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
_KICK_C_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)
_TILT_GRID = (0.0, math.pi / 4, math.pi / 2)
_PHASE_GRID = (math.pi / 4, math.pi / 2, math.pi)


@dataclass
class CheckResult:
    name: str
    status: str  # PASS, FAIL, or SKIP
    detail: str


class _Workbench:
    """Caches the expensive propagated objects shared between checks."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._states: dict[tuple[float, float], BranchState] = {}
        self._propagated: dict[tuple[float, float], BranchState] = {}
        self._patterns: dict[tuple[float, float], ScreenPattern] = {}

    def state(self, c: float, theta: float = 0.0) -> BranchState:
        key = (c, theta)
        if key not in self._states:
            coeffs = build_uqsd(DetectorConfig(c=c, theta=theta))
            sym = change_basis(assemble(self.cfg.geometry, self.cfg.grid, coeffs), SYMMETRIC)
            self._states[key] = sym
        return self._states[key]

    def propagated(self, c: float, theta: float = 0.0) -> BranchState:
        key = (c, theta)
        if key not in self._propagated:
            self._propagated[key] = propagate_all(
                self.state(c, theta), self.cfg.geometry, self.cfg.units
            )
        return self._propagated[key]

    def pattern(self, c: float, theta: float = 0.0) -> ScreenPattern:
        key = (c, theta)
        if key not in self._patterns:
            self._patterns[key] = screen_density(self.propagated(c, theta))
        return self._patterns[key]

    def visibility(self, c: float, theta: float = 0.0) -> float:
        fr = fringe_analysis(self.pattern(c, theta), self.cfg.geometry, self.cfg.units)
        return fr.visibility

    def momentum_bin(self) -> float:
        g = self.cfg.grid
        return 2.0 * math.pi * self.cfg.units.hbar / (g.n * g.dx)


CheckFn = Callable[["_Workbench", float], CheckResult]
_CHECKS: list[tuple[str, CheckFn]] = []


def _check(name: str):
    def wrap(fn: CheckFn) -> CheckFn:
        _CHECKS.append((name, fn))
        return fn

    return wrap


@_check("hilbert.normalization")
def _chk_hilbert_norm(bench: _Workbench, tol: float) -> CheckResult:
    worst = 0.0
    for c in _C_GRID:
        for theta in (0.0, math.pi / 3, bench.cfg.detector.theta):
            cfg = DetectorConfig(c=c, theta=theta)
            d1, d2 = detector_states(build_uqsd(cfg))
            worst = max(
                worst,
                abs(d1.norm() - 1.0),
                abs(d2.norm() - 1.0),
                abs(d1.inner(d2) - cfg.overlap),
            )
    ok = worst <= tol
    return CheckResult("hilbert.normalization", "PASS" if ok else "FAIL", f"max dev {worst:.3g}")


@_check("hilbert.unitarity")
def _chk_hilbert_unitarity(bench: _Workbench, tol: float) -> CheckResult:
    eye = np.eye(3)
    worst = 0.0
    bases = [COMPUTATIONAL, SYMMETRIC, tilted(math.pi / 4), tilted(math.pi / 2), tilted(1.0)]
    for b in bases:
        m = basis_matrix(COMPUTATIONAL, b)
        worst = max(worst, float(np.abs(m @ m.conj().T - eye).max()))
        back = basis_matrix(b, COMPUTATIONAL) @ m
        worst = max(worst, float(np.abs(back - eye).max()))
    # q3 must be fixed by every transform.
    for b in bases:
        m = basis_matrix(COMPUTATIONAL, b)
        worst = max(worst, float(np.abs(m[:, 2] - eye[:, 2]).max()))
        worst = max(worst, float(np.abs(m[2, :] - eye[2, :]).max()))
    ok = worst <= tol
    return CheckResult("hilbert.unitarity", "PASS" if ok else "FAIL", f"max dev {worst:.3g}")


@_check("wavepacket.normalization")
def _chk_wp_norm(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    worst = max(
        abs(slit_state(cfg.geometry, cfg.grid, s).norm() - 1.0) for s in (1, 2)
    )
    ok = worst <= tol
    return CheckResult("wavepacket.normalization", "PASS" if ok else "FAIL", f"max dev {worst:.3g}")


@_check("wavepacket.momentum_oracle")
def _chk_wp_momentum(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    hbar = cfg.units.hbar
    sigma = cfg.geometry.sigma
    spec = to_momentum(slit_state(cfg.geometry, cfg.grid, 1), hbar=hbar)
    oracle = (2.0 * sigma**2 / (math.pi * hbar**2)) ** 0.25 * np.exp(
        -(sigma**2) * spec.p**2 / hbar**2
    )
    worst = float(np.abs(spec.amplitudes - oracle).max())
    worst = max(worst, abs(spec.norm() - 1.0))
    ok = worst <= tol
    return CheckResult("wavepacket.momentum_oracle", "PASS" if ok else "FAIL", f"max dev {worst:.3g}")


@_check("wavepacket.roundtrip")
def _chk_wp_roundtrip(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    psi = slit_state(cfg.geometry, cfg.grid, 2)
    back = to_position(to_momentum(psi, hbar=cfg.units.hbar))
    worst = float(np.abs(back.amplitudes - psi.amplitudes).max())
    ok = worst <= tol
    return CheckResult("wavepacket.roundtrip", "PASS" if ok else "FAIL", f"max dev {worst:.3g}")


@_check("wavepacket.propagator_agreement")
def _chk_wp_propagators(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    worst = 0.0
    for slit in (1, 2):
        via_fft = propagate_fft(slit_state(cfg.geometry, cfg.grid, slit), cfg.geometry, cfg.units)
        closed = propagate_analytic(cfg.geometry, cfg.grid, cfg.units, slit)
        worst = max(worst, float(np.abs(via_fft.amplitudes - closed.amplitudes).max()))
    ok = worst <= tol
    return CheckResult(
        "wavepacket.propagator_agreement", "PASS" if ok else "FAIL", f"max abs diff {worst:.3g}"
    )


@_check("wavepacket.kick_displacement")
def _chk_wp_kick(bench: _Workbench, tol: float) -> CheckResult:
    # A kick by p must move the spectral mean by exactly p (the spectrum
    # translates rigidly), for whole and fractional numbers of bins alike.
    cfg = bench.cfg
    hbar = cfg.units.hbar
    psi = slit_state(cfg.geometry, cfg.grid, 1)
    boost = 12.25 * bench.momentum_bin()
    worst = 0.0
    for p in (boost, -3.0 * boost):
        spec0 = to_momentum(psi, hbar=hbar)
        spec1 = to_momentum(apply_kick(psi, p, hbar=hbar), hbar=hbar)
        mean0 = float(np.sum(spec0.p * spec0.density()) * spec0.dp)
        mean1 = float(np.sum(spec1.p * spec1.density()) * spec1.dp)
        worst = max(worst, abs(mean1 - mean0 - p))
    ok = worst <= tol
    return CheckResult(
        "wavepacket.kick_displacement", "PASS" if ok else "FAIL", f"mean off by {worst:.3g}"
    )


@_check("experiment.branch_probabilities")
def _chk_exp_probs(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    worst = 0.0
    for c in _C_GRID:
        coeffs = build_uqsd(DetectorConfig(c=c, theta=cfg.detector.theta))
        state = assemble(cfg.geometry, cfg.grid, coeffs)
        expected = np.array([(1.0 - c) / 2.0, (1.0 - c) / 2.0, c])
        for st in (state, change_basis(state, SYMMETRIC)):
            probs = st.branch_probabilities()
            worst = max(worst, float(np.abs(probs - expected).max()))
            worst = max(worst, abs(probs.sum() - 1.0))
    ok = worst <= tol
    return CheckResult(
        "experiment.branch_probabilities", "PASS" if ok else "FAIL", f"max dev {worst:.3g}"
    )


@_check("experiment.failure_probability")
def _chk_exp_fail(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    c = cfg.detector.c
    state = bench.state(c, cfg.detector.theta)
    dev = abs(state.branches[2].norm() - c)
    ok = dev <= tol
    return CheckResult(
        "experiment.failure_probability", "PASS" if ok else "FAIL", f"|P(fail) - c| = {dev:.3g}"
    )


@_check("experiment.basis_invariance")
def _chk_exp_basis(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    coeffs = build_uqsd(cfg.detector)
    state = assemble(cfg.geometry, cfg.grid, coeffs)
    rho_comp = screen_density(state).values
    worst = 0.0
    for b in (SYMMETRIC, tilted(math.pi / 4)):
        worst = max(worst, float(np.abs(screen_density(change_basis(state, b)).values - rho_comp).max()))
    ok = worst <= tol
    return CheckResult(
        "experiment.basis_invariance", "PASS" if ok else "FAIL", f"max abs diff {worst:.3g}"
    )


@_check("experiment.density_formula")
def _chk_exp_density(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    det = cfg.detector
    psi1 = propagate_analytic(cfg.geometry, cfg.grid, cfg.units, 1).amplitudes
    psi2 = propagate_analytic(cfg.geometry, cfg.grid, cfg.units, 2).amplitudes
    overlap = det.overlap
    direct = 0.5 * (
        np.abs(psi1) ** 2
        + np.abs(psi2) ** 2
        + 2.0 * np.real(overlap * np.conj(psi1) * psi2)
    )
    rho = bench.pattern(det.c, det.theta).values
    worst = float(np.abs(rho - direct).max())
    ok = worst <= tol
    return CheckResult(
        "experiment.density_formula", "PASS" if ok else "FAIL", f"max abs diff {worst:.3g}"
    )


@_check("experiment.visibility_law")
def _chk_exp_visibility(bench: _Workbench, tol: float) -> CheckResult:
    worst = 0.0
    for c in _C_GRID:
        worst = max(worst, abs(bench.visibility(c) - c))
    ok = worst <= tol
    return CheckResult(
        "experiment.visibility_law", "PASS" if ok else "FAIL", f"max |V - c| = {worst:.3g}"
    )


@_check("experiment.kick_fraction")
def _chk_exp_fraction(bench: _Workbench, tol: float) -> CheckResult:
    worst = 0.0
    for c in _C_GRID:
        f_branch = bench.state(c).branches[1].norm()
        worst = max(worst, abs(f_branch - (1.0 - c) / 2.0))
    ok = worst <= tol
    return CheckResult(
        "experiment.kick_fraction", "PASS" if ok else "FAIL", f"max |F_k - (1-c)/2| = {worst:.3g}"
    )


@_check("experiment.kick_fraction_vs_visibility")
def _chk_exp_fraction_vis(bench: _Workbench, tol: float) -> CheckResult:
    worst = 0.0
    for c in _C_GRID:
        f_branch = bench.state(c).branches[1].norm()
        worst = max(worst, abs(f_branch - (1.0 - bench.visibility(c)) / 2.0))
    ok = worst <= tol
    return CheckResult(
        "experiment.kick_fraction_vs_visibility",
        "PASS" if ok else "FAIL",
        f"max |F_k - (1-V)/2| = {worst:.3g}",
    )


@_check("experiment.kick_magnitude")
def _chk_exp_kick(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    dp = bench.momentum_bin()
    p0 = math.pi * cfg.units.hbar / cfg.geometry.d
    worst = 0.0
    for c in _KICK_C_GRID:
        report = kick_report(bench.state(c), cfg.geometry, cfg.units, DetectorConfig(c=c))
        assert report.p0_measured is not None
        worst = max(worst, abs(report.p0_measured - p0) / dp)
    ok = worst <= tol
    return CheckResult(
        "experiment.kick_magnitude", "PASS" if ok else "FAIL", f"worst offset {worst:.3g} bins"
    )


@_check("experiment.detector_kick")
def _chk_exp_detector_kick(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    det = cfg.detector
    report = kick_report(
        bench.state(det.c, det.theta), cfg.geometry, cfg.units, det
    )
    if det.c == 1.0:
        ok = report.p0_measured is None
        return CheckResult(
            "experiment.detector_kick",
            "PASS" if ok else "FAIL",
            "kicked branch empty at c = 1; no estimate (as expected)"
            if ok
            else "expected no kick estimate at c = 1",
        )
    dp = bench.momentum_bin()
    off = abs(report.p0_measured - report.p0) / dp
    ok = off <= tol
    return CheckResult("experiment.detector_kick", "PASS" if ok else "FAIL", f"off by {off:.3g} bins")


@_check("experiment.tilted_kick")
def _chk_exp_tilted(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    if cfg.detector.c == 1.0:
        return CheckResult(
            "experiment.tilted_kick", "SKIP", "interfering branches empty at c = 1"
        )
    dp = bench.momentum_bin()
    p0 = math.pi * cfg.units.hbar / cfg.geometry.d
    worst = 0.0
    state = bench.state(cfg.detector.c, cfg.detector.theta)
    for tp in _TILT_GRID:
        worst = max(
            worst, abs(tilted_relative_kick(state, cfg.geometry, cfg.units, tp) - p0) / dp
        )
    ok = worst <= tol
    return CheckResult(
        "experiment.tilted_kick", "PASS" if ok else "FAIL", f"worst offset {worst:.3g} bins"
    )


@_check("experiment.kick_identity")
def _chk_exp_identity(bench: _Workbench, tol: float) -> CheckResult:
    worst = 0.0
    last = -1.0
    monotone = True
    for ratio in (0.005, 0.01, 0.02, 0.05):
        geom = SlitGeometry(d=1.0, sigma=ratio)
        grid = GridSpec(n=2048, x_min=-0.78, x_max=1.78)
        measured = kick_identity_residual(geom, grid)
        oracle = math.sqrt(2.0 * (1.0 - math.exp(-math.pi**2 * ratio**2 / 2.0)))
        worst = max(worst, abs(measured - oracle) / oracle)
        monotone = monotone and measured > last
        last = measured
    ok = worst <= tol and monotone
    detail = f"max rel dev {worst:.3g}" + ("" if monotone else "; NOT monotone in sigma/d")
    return CheckResult("experiment.kick_identity", "PASS" if ok else "FAIL", detail)


@_check("experiment.phase_kick")
def _chk_exp_phase(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    dp = bench.momentum_bin()
    worst = 0.0
    for theta in _PHASE_GRID:
        state = bench.state(0.5, theta)
        shift = phase_kick_shift(state, cfg.geometry, cfg.units)
        expected = theta * cfg.units.hbar / cfg.geometry.d
        worst = max(worst, abs(shift - expected) / dp)
    ok = worst <= tol
    return CheckResult(
        "experiment.phase_kick", "PASS" if ok else "FAIL", f"worst offset {worst:.3g} bins"
    )


@_check("experiment.phase_visibility")
def _chk_exp_phase_vis(bench: _Workbench, tol: float) -> CheckResult:
    v0 = bench.visibility(0.5, 0.0)
    worst = max(abs(bench.visibility(0.5, theta) - v0) for theta in _PHASE_GRID)
    ok = worst <= tol
    return CheckResult(
        "experiment.phase_visibility", "PASS" if ok else "FAIL", f"max |V(theta) - V(0)| = {worst:.3g}"
    )


@_check("experiment.storey_bound")
def _chk_exp_storey(bench: _Workbench, tol: float) -> CheckResult:
    for v in np.arange(0.0, 1.0 + 1e-9, 0.1):
        rep = storey_bound_report(float(v))
        if not rep.satisfied or abs(rep.lhs - math.pi) > tol + 1e-15:
            return CheckResult(
                "experiment.storey_bound", "FAIL", f"bound violated at V = {v:.1f}"
            )
    return CheckResult("experiment.storey_bound", "PASS", "lhs = pi >= 1 - V on the whole V grid")


@_check("experiment.sampler_outcomes")
def _chk_exp_sampler(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    det = cfg.detector
    state = bench.propagated(det.c, det.theta)
    count = max(cfg.sample_count, 10_000)
    events = sample_events(state, count, cfg.seed)
    probs = state.branch_probabilities()
    outcomes = state.basis.outcomes
    worst = 0.0
    for i, p in enumerate(probs):
        if p < 1e-12:
            continue
        freq = sum(1 for e in events if e.outcome is outcomes[i]) / count
        # Quadrature norms can land a hair above 1; clamp so the variance
        # stays non-negative.
        sigma = math.sqrt(max(p * (1.0 - p), 0.0) / count)
        if sigma == 0.0:  # deterministic branch (p = 1): all events land there
            worst = max(worst, 0.0 if abs(freq - p) < 1e-9 else math.inf)
        else:
            worst = max(worst, abs(freq - p) / sigma)
    ok = worst <= tol
    return CheckResult(
        "experiment.sampler_outcomes", "PASS" if ok else "FAIL", f"worst {worst:.3g} sigma"
    )


@_check("experiment.sampler_gof")
def _chk_exp_gof(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    det = cfg.detector
    state = bench.propagated(det.c, det.theta)
    count = max(cfg.sample_count, 10_000)
    events = sample_events(state, count, cfg.seed)
    xs = np.array([e.x for e in events])
    _, pvalue = screen_goodness_of_fit(xs, bench.pattern(det.c, det.theta))
    ok = pvalue > tol
    return CheckResult("experiment.sampler_gof", "PASS" if ok else "FAIL", f"p = {pvalue:.4f}")


@_check("experiment.sampler_determinism")
def _chk_exp_determinism(bench: _Workbench, tol: float) -> CheckResult:
    cfg = bench.cfg
    det = cfg.detector
    state = bench.propagated(det.c, det.theta)
    a = sample_events(state, 512, cfg.seed)
    b = sample_events(state, 512, cfg.seed)
    identical = all(
        ea.outcome is eb.outcome and ea.x == eb.x for ea, eb in zip(a, b)
    )
    return CheckResult(
        "experiment.sampler_determinism",
        "PASS" if identical else "FAIL",
        "same seed reproduces events exactly" if identical else "event streams diverged",
    )


def run_suite(
    cfg: RunConfig,
    tolerance_overrides: Mapping[str, float] | None = None,
    stream: TextIO | None = None,
) -> int:
    """Run every check; print one line each; return 0 iff none failed."""
    out = stream if stream is not None else sys.stdout
    tols = dict(TOLERANCES)
    if tolerance_overrides:
        unknown = set(tolerance_overrides) - set(tols)
        if unknown:
            raise KeyError(f"unknown check names in overrides: {sorted(unknown)}")
        tols.update(tolerance_overrides)
    bench = _Workbench(cfg)
    results: list[CheckResult] = []
    for name, fn in _CHECKS:
        try:
            results.append(fn(bench, tols[name]))
        except EmptyBranchError as exc:
            results.append(CheckResult(name, "SKIP", f"not applicable: {exc}"))
        except Exception as exc:  # surface, don't crash the rest of the table
            results.append(CheckResult(name, "FAIL", f"raised {type(exc).__name__}: {exc}"))
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"[{r.status:^4}] {r.name:<{width}}  {r.detail}", file=out)
    n_pass = sum(r.status == "PASS" for r in results)
    n_fail = sum(r.status == "FAIL" for r in results)
    n_skip = sum(r.status == "SKIP" for r in results)
    print(f"{n_pass} passed, {n_fail} failed, {n_skip} skipped", file=out)
    return 0 if n_fail == 0 else 1
