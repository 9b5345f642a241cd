"""Command-line tools: run, scan, sample, and verify.

All commands read a flat ``key = value`` config file (every key optional;
see `kickscope.config`) and write plain CSV/text outputs into an output
directory resolved from ``--out``, the config's ``output.dir``, the
``KICKSCOPE_OUT`` environment variable, or the working directory, in that
order.  Outputs are deterministic: the same config and seed produce
byte-identical files.

Exit codes: 0 on success, 1 when verification fails, 2 on a configuration
or usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import RunConfig, default_config, load_config, parse_c_values
from .errors import KickscopeError
from .hilbert import SYMMETRIC, DetectorConfig, build_uqsd
from .wavepacket import to_momentum
from .experiment import (
    assemble,
    change_basis,
    fringe_analysis,
    kick_report,
    propagate_all,
    sample_events,
    screen_density,
    screen_goodness_of_fit,
    storey_bound_report,
)
from .verify import run_suite

__all__ = ["main", "cmd_run", "cmd_scan", "cmd_sample", "cmd_verify"]


def _fmt(value: float | None) -> str:
    if value is None:
        return "nan"
    return "%.17g" % value


def _atomic_write(path: Path, write_fn) -> None:
    # Write into a sibling temp file, then rename; partially written files
    # never appear under the final name.
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    data = np.column_stack(columns)

    def write(fh) -> None:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")

    _atomic_write(path, write)


def _resolve_out(flag_value: str | None, cfg: RunConfig) -> Path:
    if flag_value:
        return Path(flag_value)
    if cfg.out_dir:
        return Path(cfg.out_dir)
    env = os.environ.get("KICKSCOPE_OUT")
    if env:
        return Path(env)
    return Path(".")


def cmd_run(cfg: RunConfig, out_dir: Path) -> int:
    """Simulate once; write pattern.csv, momentum.csv, and summary.txt."""
    coeffs = build_uqsd(cfg.detector)
    state0 = change_basis(assemble(cfg.geometry, cfg.grid, coeffs), cfg.basis)
    propagated = propagate_all(state0, cfg.geometry, cfg.units)

    branch_rho = [b.density() for b in propagated.branches]
    total = branch_rho[0] + branch_rho[1] + branch_rho[2]
    _write_table(
        out_dir / "pattern.csv",
        ["x", "rho_total", "rho_branch1", "rho_branch2", "rho_branch3"],
        [cfg.grid.x, total] + branch_rho,
    )

    # Spectra are reported at emission time; free flight only changes the
    # phases, not these densities.
    spectra = [to_momentum(b, hbar=cfg.units.hbar) for b in state0.branches]
    _write_table(
        out_dir / "momentum.csv",
        ["p", "spec_branch1", "spec_branch2", "spec_branch3"],
        [spectra[0].p] + [s.density() for s in spectra],
    )

    sym = state0 if cfg.basis == SYMMETRIC else change_basis(state0, SYMMETRIC)
    report = kick_report(sym, cfg.geometry, cfg.units, cfg.detector)
    fringes = fringe_analysis(screen_density(propagated), cfg.geometry, cfg.units)
    storey = storey_bound_report(fringes.visibility)

    lines = [
        ("V_theory", _fmt(cfg.detector.c)),
        ("V_measured", _fmt(fringes.visibility)),
        ("fringe_period", _fmt(fringes.fringe_period)),
        ("central_fringe_shift", _fmt(fringes.central_fringe_shift)),
        ("F_k_theory", _fmt(report.F_k_theory)),
        ("F_k_branch", _fmt(report.F_k_branch)),
        ("p0", _fmt(report.p0)),
        ("p0_measured", _fmt(report.p0_measured)),
        ("kick_identity_residual", _fmt(report.kick_identity_residual)),
        ("p_e", _fmt(report.p_e)),
        ("storey_lhs", _fmt(storey.lhs)),
        ("storey_rhs", _fmt(storey.rhs)),
    ]
    _atomic_write(
        out_dir / "summary.txt",
        lambda fh: fh.writelines(f"{k}={v}\n" for k, v in lines),
    )
    for name in ("pattern.csv", "momentum.csv", "summary.txt"):
        print(f"wrote {out_dir / name}")
    return 0


def cmd_scan(cfg: RunConfig, out_dir: Path, c_values: list[float]) -> int:
    """Sweep the overlap magnitude; write scan.csv with one row per c."""
    rows = []
    for c in c_values:
        det = DetectorConfig(c=c, theta=cfg.detector.theta)
        sym = change_basis(assemble(cfg.geometry, cfg.grid, build_uqsd(det)), SYMMETRIC)
        propagated = propagate_all(sym, cfg.geometry, cfg.units)
        fringes = fringe_analysis(screen_density(propagated), cfg.geometry, cfg.units)
        report = kick_report(sym, cfg.geometry, cfg.units, det)
        rows.append(
            (
                c,
                fringes.visibility,
                report.F_k_branch,
                math.nan if report.p0_measured is None else report.p0_measured,
                report.kick_identity_residual,
            )
        )
        print(
            f"c = {c:.4g}: V = {fringes.visibility:.4f}, "
            f"F_k = {report.F_k_branch:.4f}"
        )
    arr = np.array(rows)
    _write_table(
        out_dir / "scan.csv",
        ["c", "V_measured", "F_k_branch", "p0_measured", "kick_identity_residual"],
        [arr[:, i] for i in range(arr.shape[1])],
    )
    print(f"wrote {out_dir / 'scan.csv'}")
    return 0


def cmd_sample(cfg: RunConfig, out_dir: Path) -> int:
    """Draw detection events; write events.csv and sample_summary.txt."""
    coeffs = build_uqsd(cfg.detector)
    state0 = change_basis(assemble(cfg.geometry, cfg.grid, coeffs), cfg.basis)
    propagated = propagate_all(state0, cfg.geometry, cfg.units)
    events = sample_events(propagated, cfg.sample_count, cfg.seed)

    _atomic_write(
        out_dir / "events.csv",
        lambda fh: fh.writelines(
            ["outcome,x\n"] + [f"{e.outcome.value},{_fmt(e.x)}\n" for e in events]
        ),
    )

    outcomes = propagated.basis.outcomes
    probs = propagated.branch_probabilities()
    counts = {o: 0 for o in outcomes}
    for e in events:
        counts[e.outcome] += 1
    lines = [f"count={len(events)}\n", f"seed={cfg.seed}\n"]
    for o, p in zip(outcomes, probs):
        freq = counts[o] / len(events) if events else 0.0
        lines.append(f"{o.value}: n={counts[o]} freq={freq:.6f} prob={_fmt(p)}\n")
    if len(events) >= 500:
        xs = np.array([e.x for e in events])
        stat, pvalue = screen_goodness_of_fit(xs, screen_density(propagated))
        lines.append(f"chi_square={_fmt(stat)}\n")
        lines.append(f"chi_square_p={_fmt(pvalue)}\n")
    _atomic_write(out_dir / "sample_summary.txt", lambda fh: fh.writelines(lines))
    print(f"wrote {out_dir / 'events.csv'}")
    print(f"wrote {out_dir / 'sample_summary.txt'}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    """Run the invariant suite at the configured scale."""
    return run_suite(cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickscope",
        description="Two-slit interference with an imperfect which-way detector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "simulate one configuration and write pattern/momentum/summary"),
        ("scan", "sweep the detector overlap magnitude c"),
        ("sample", "draw seeded detection events"),
        ("verify", "run the self-check suite"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH", help="key=value config file")
        if name != "verify":
            cmd.add_argument("--out", metavar="DIR", help="output directory")
        if name in ("run", "sample"):
            cmd.add_argument("--seed", type=int, help="override sampling.seed")
        if name == "scan":
            cmd.add_argument(
                "--c-values",
                default="0,0.25,0.5,0.75,1",
                metavar="LIST",
                help="comma-separated overlap magnitudes (default: %(default)s)",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if getattr(args, "seed", None) is not None:
            cfg = cfg.with_seed(args.seed)
        if args.command == "verify":
            return cmd_verify(cfg)
        out_dir = _resolve_out(args.out, cfg)
        if args.command == "run":
            return cmd_run(cfg, out_dir)
        if args.command == "scan":
            return cmd_scan(cfg, out_dir, parse_c_values(args.c_values))
        return cmd_sample(cfg, out_dir)
    except KickscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
