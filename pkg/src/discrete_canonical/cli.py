"""Command-line front end: every computation as a subcommand writing CSV/JSON.

Exit codes: 0 success, 1 computation failure (including failed acceptance
criteria), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from . import acceptance, lattice, legacy, oscillator, phase_field, template
from .numerics import DomainError, RealLineGrid

THREADS_ENV = "DISCRETE_CANONICAL_THREADS"


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    tool_version: str
    tolerances: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    created: str = ""
    summary: dict = field(default_factory=dict)

    def write(self, path: Path):
        self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__
        return __version__


def fmt(x) -> str:
    """Shortest round-trip decimal (never more than 17 significant digits)."""
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v))
                        for v in row])


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _positive(name, value):
    if not value > 0:
        raise UsageError(f"{name} must be positive, got {value}")


def _odd_side(value):
    if value < 1 or value % 2 == 0:
        raise UsageError(f"window side must be a positive odd integer, got {value}")


# subcommands ---------------------------------------------------------------


def cmd_psi_table(args, manifest):
    _positive("--step", args.step)
    _positive("--qmax", args.qmax)
    grid = RealLineGrid.symmetric(args.qmax, args.step)
    table = template.build_template_table(grid)
    out = Path(args.out)
    _write_csv(out, ["q", "psi"], zip(grid.values, table.values))
    side = out.with_suffix(out.suffix + ".json")
    _write_json(side, {"grid": {"x_min": grid.x_min, "x_max": grid.x_max, "step": grid.step},
                       "quadrature": table.quadrature_meta})
    manifest.outputs += [str(out), str(side)]
    manifest.tolerances["quadrature_error"] = table.quadrature_meta["max_error_estimate"]


def cmd_phi_grid(args, manifest):
    if args.n_eta < 2 or args.n_xi < 2:
        raise UsageError("grid counts must be at least 2")
    eta, xi, r, ph = phase_field.phase_grid(args.n_eta, args.n_xi)
    _write_csv(Path(args.out), ["eta", "xi", "r", "phi"], zip(eta, xi, r, ph))
    manifest.outputs.append(args.out)
    manifest.summary["phi_range"] = [float(ph.min()), float(ph.max())]


def cmd_legacy_curves(args, manifest):
    _positive("--step", args.step)
    _positive("--xmax", args.xmax)
    x = RealLineGrid.symmetric(args.xmax, args.step).values
    naive, sym = legacy.LegacyScheme.naive(), legacy.LegacyScheme.symmetric()
    curves = [
        ("naive_q", legacy.legacy_state_q(x, naive)),
        ("naive_p", legacy.legacy_state_p(x, naive)),
        ("symmetric_q", legacy.legacy_state_q(x, sym)),
        ("template_q", template.psi(x)),
    ]
    rows = ((name, xv, v) for name, vals in curves for xv, v in zip(x, vals))
    _write_csv(Path(args.out), ["scheme", "x", "value"], rows)
    manifest.outputs.append(args.out)
    manifest.summary["naive_q_regularization"] = "indicator of the unit cell sampled on the output grid"


def cmd_matrix_elements(args, manifest):
    _odd_side(args.side)
    w = lattice.LatticeWindow.square(args.side)
    Q, P = w.coords()
    grids = (Q[:, None], P[:, None], Q[None, :], P[None, :])
    if args.operator == "a_q":
        m = lattice.a_q_element(*grids, printed=args.printed)
    elif args.operator == "a_p":
        m = lattice.a_p_element(*grids, printed=args.printed)
    elif args.operator == "q":
        m = lattice.build_q_matrix(w).entries
    else:
        m = lattice.build_p_matrix(w).entries
    rows = ((int(Q[i]), int(P[i]), int(Q[j]), int(P[j]), m[i, j].real, m[i, j].imag)
            for i in range(w.size) for j in range(w.size))
    _write_csv(Path(args.out), ["Q1", "P1", "Q2", "P2", "re", "im"], rows)
    manifest.outputs.append(args.out)


def cmd_commutator_check(args, manifest):
    for s in args.sides:
        _odd_side(s)
    report = []
    for s in args.sides:
        w = lattice.LatticeWindow.square(s)
        r = lattice.commutator_residual(w)
        report.append({"side": s, "central_quarter_max": r.central_max_printed,
                       "block_radius_2_max": lattice.commutator_block_residual(w, 2)})
    _write_json(Path(args.out), {"units": "target i(-1)^(dQ+dP)(delta-1)", "windows": report})
    manifest.outputs.append(args.out)
    manifest.tolerances["central_quarter_max"] = 0.05


def cmd_oscillator_spectrum(args, manifest):
    _odd_side(args.side)
    if args.levels < 1:
        raise UsageError("--levels must be at least 1")
    cfg = oscillator.OscillatorConfig(lattice.LatticeWindow.square(args.side), args.regularization)
    res = oscillator.hamiltonian_matrix(cfg)
    vals = oscillator.physical_spectrum(res.matrix)[: args.levels]
    payload = {"window_side": args.side, "regularization": args.regularization,
               "eigenvalues": [float(v) for v in vals]}
    if res.log_slope is not None:
        payload["log_slope"] = res.log_slope
        payload["checkerboard_similarity"] = res.checkerboard_similarity
    _write_json(Path(args.out), payload)
    manifest.outputs.append(args.out)


def cmd_evolve(args, manifest):
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    half = max(abs(args.a), abs(args.b)) + 2
    w = lattice.LatticeWindow.centered(half)
    grid = RealLineGrid.symmetric(half + oscillator.SUPPORT_MARGIN + 1, args.step)
    state = lattice.DiscreteState.basis(w, args.a, args.b)
    Q, P = w.coords()
    rows = []
    for step in range(args.steps + 1):
        if step:
            state = oscillator.quarter_evolution(state, grid)
        rows += [(step, int(q), int(p), a.real, a.imag) for q, p, a in zip(Q, P, state.amplitudes)]
        site, amp = state.dominant()
        print(f"step {step}: dominant {site} probability {abs(amp) ** 2:.6f}")
    _write_csv(Path(args.out), ["step", "Q", "P", "re", "im"], rows)
    manifest.outputs.append(args.out)
    manifest.summary["final_dominant"] = list(state.dominant()[0])


def cmd_acceptance(args, manifest):
    results = []
    for res in acceptance.run_all(args.only):
        print(res.line(), flush=True)
        results.append(asdict(res))
    failed = [r["number"] for r in results if not r["passed"]]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if args.out:
        _write_json(Path(args.out), {"suite": args.suite, "results": results})
        manifest.outputs.append(args.out)
    manifest.summary["failed"] = failed
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="discrete-canonical", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("psi-table", help="tabulate the template wavefunction")
    s.add_argument("--qmax", type=float, default=10.0)
    s.add_argument("--step", type=float, default=1 / 64)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_psi_table)

    s = sub.add_parser("phi-grid", help="theta modulus and phase on the unit square")
    s.add_argument("--n-eta", type=int, default=64)
    s.add_argument("--n-xi", type=int, default=64)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_phi_grid)

    s = sub.add_parser("legacy-curves", help="precursor-map wavefunctions")
    s.add_argument("--xmax", type=float, default=6.0)
    s.add_argument("--step", type=float, default=1 / 64)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_legacy_curves)

    s = sub.add_parser("matrix-elements", help="lattice matrix entries")
    s.add_argument("--operator", choices=["a_q", "a_p", "q", "p"], default="a_q")
    s.add_argument("--side", type=int, default=5)
    s.add_argument("--printed", action="store_true", help="a-elements without the 1/(2 pi) factor")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_matrix_elements)

    s = sub.add_parser("commutator-check", help="[q,p] residuals per window size")
    s.add_argument("--sides", type=int, nargs="+", default=[21, 31, 41])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_commutator_check)

    s = sub.add_parser("oscillator-spectrum", help="low eigenvalues of the lattice Hamiltonian")
    s.add_argument("--side", type=int, default=15)
    s.add_argument("--regularization", choices=["project_edge", "subtract_checkerboard"], default="project_edge")
    s.add_argument("--levels", type=int, default=6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_oscillator_spectrum)

    s = sub.add_parser("evolve", help="repeated quarter-period maps of |A,B>")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--steps", type=int, default=4)
    s.add_argument("--step", type=float, default=1 / 64, help="continuum grid step")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("acceptance", help="run the acceptance criteria")
    s.add_argument("--suite", choices=["primary"], default="primary")
    s.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    s.add_argument("--out", help="JSON report path")
    s.set_defaults(func=cmd_acceptance)
    return p


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    manifest = RunManifest(args.command, params, _version())
    try:
        limit = _thread_limit()
        if limit is not None:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=limit):
                code = args.func(args, manifest)
        else:
            code = args.func(args, manifest)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failure
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    out = getattr(args, "out", None)
    path = Path(args.manifest) if args.manifest else Path((out or "discrete-canonical") + ".manifest.json")
    manifest.write(path)
    return int(code or 0)


def main():
    sys.exit(run())
