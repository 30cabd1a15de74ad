"""Command-line front end: ``bosenc <command> [options]``.

Every command writes its results and a ``manifest.json`` (schema version,
command, all arguments) into the output directory. Outputs carry no
timestamps, so re-running a manifest reproduces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib.resources import files
from pathlib import Path

import numpy as np

from . import __version__, analysis, fock, svg, vqs
from .codes import (
    EXHAUSTIVE_MAX_QUBITS,
    Code,
    SearchStatus,
    binary,
    count_unit_distance,
    find_kfold,
    first_unit_distance,
    gray,
    iter_codes,
    unrank,
)
from .encoder import encode_b_power, encode_even_b2, term_count, term_histogram
from .sim import Statevector, sample
from .transpile import (
    UnsupportedGateError,
    circuit_from_json,
    native_jsonl,
    transpile,
    verify_equivalence,
)

SCHEMA_VERSION = 1
OUT_ENV = "BOSENC_OUT"
DEFAULT_OUT = "bosenc_out"

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_NUMERIC, EXIT_UNSUPPORTED = 0, 2, 3, 4, 5

EPILOG = """exit codes:
  0  success
  2  invalid arguments
  3  search budget exhausted
  4  non-finite dynamics
  5  unsupported gate in circuit input

The default output directory is taken from $BOSENC_OUT (else ./bosenc_out)."""

FIXTURE = "data/trace_y1x0_circuit.json"


class UsageError(Exception):
    pass


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def _manifest(out: Path, command: str, args: argparse.Namespace, **extra):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "command")}
    doc = {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command, "args": params, **extra}
    _write(out / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


# --- codes ------------------------------------------------------------------


def cmd_codes(args) -> int:
    out = Path(args.out)
    status = EXIT_OK
    summary: dict = {}
    if args.unit_distance:
        if not 1 <= args.n <= EXHAUSTIVE_MAX_QUBITS:
            raise UsageError(f"--unit-distance needs 1 <= n <= {EXHAUSTIVE_MAX_QUBITS}")
        summary["unit_distance_count"] = count_unit_distance(args.n)
        print(summary["unit_distance_count"])
    if args.exhaustive:
        if not 1 <= args.n <= EXHAUSTIVE_MAX_QUBITS:
            raise UsageError(f"--exhaustive needs 1 <= n <= {EXHAUSTIVE_MAX_QUBITS}")
        k = _op_power(args.op)
        if k >= 1 << args.n:
            raise UsageError(f"operator power {k} too large for n={args.n}")
        hist = term_histogram(args.n, k)
        rows = sorted(hist.items())
        _write(out / "histogram.csv", _csv(rows, ["terms", "count"]))
        for t, c in rows:
            print(f"{t},{c}")
        if args.list:
            listing = [
                (idx, " ".join(map(str, words)), term_count(encode_b_power(Code(words), k)))
                for idx, words in enumerate(iter_codes(args.n))
            ]
            _write(out / "codes.csv", _csv(listing, ["index", "words", "terms"]))
        summary["histogram"] = {str(t): c for t, c in rows}
    if args.kfold is not None:
        res = find_kfold(args.n, args.kfold, node_budget=args.budget)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "n": args.n,
            "k": args.kfold,
            "status": res.status.value,
            "nodes": res.nodes,
            "code": list(res.code.words) if res.code else None,
        }
        _write(out / "kfold.json", json.dumps(doc, indent=2) + "\n")
        print(f"{res.status.value} {doc['code']}")
        summary["kfold"] = doc
        if res.status is SearchStatus.BUDGET_EXHAUSTED:
            status = EXIT_BUDGET
    if not (args.unit_distance or args.exhaustive or args.kfold is not None):
        raise UsageError("choose at least one of --exhaustive, --unit-distance, --kfold")
    _manifest(out, "codes", args, summary=summary)
    return status


def _op_power(op: str) -> int:
    if op == "b":
        return 1
    if op.startswith("b") and op[1:].isdigit() and int(op[1:]) >= 1:
        return int(op[1:])
    raise UsageError(f"--op must be b or b<k>, got {op!r}")


# --- termsweep --------------------------------------------------------------


def sweep_rows(k: int, n_min: int, n_max: int, budget: int) -> list[tuple[int, str, int | None]]:
    rows = []
    for n in range(n_min, n_max + 1):
        families = {
            "binary": binary(n),
            "C5": unrank(n, 5) if math.factorial(1 << n) > 5 else None,
            "gray": gray(n),
            "D0": first_unit_distance(n),
        }
        res = find_kfold(n, k, node_budget=budget) if k < 1 << n else None
        families[f"kfold{k}"] = res.code if res is not None and res.found else None
        for label, code in families.items():
            terms = term_count(encode_b_power(code, k)) if code is not None and k < len(code) else None
            rows.append((n, label, terms))
    return rows


def cmd_termsweep(args) -> int:
    if args.k not in (2, 3):
        raise UsageError("--k must be 2 or 3")
    if not 2 <= args.n_min <= args.n_max <= 9:
        raise UsageError("need 2 <= n-min <= n-max <= 9")
    out = Path(args.out)
    rows = sweep_rows(args.k, args.n_min, args.n_max, args.budget)
    _write(out / "termsweep.csv", _csv([(n, lab, _num(t)) for n, lab, t in rows], ["n", "code_label", "terms"]))
    for n, lab, t in rows:
        print(f"{n},{lab},{_num(t)}")
    if args.svg:
        series = {}
        for n, lab, t in rows:
            xs, ys = series.setdefault(lab, ([], []))
            xs.append(n)
            ys.append(None if t is None else math.log10(t))
        _write(
            out / "termsweep.svg",
            svg.line_plot(series, f"terms of encoded b^{args.k}", "qubits n", "log10(terms)"),
        )
    _manifest(out, "termsweep", args)
    return EXIT_OK


# --- vqs --------------------------------------------------------------------


def _r_grid(args) -> list[float]:
    if args.points < 1 or args.r_max < 0:
        raise UsageError("need points >= 1 and r-max >= 0")
    if args.points == 1:
        return [args.r_max]
    return [float(r) for r in np.linspace(0.0, args.r_max, args.points)]


def cmd_vqs(args) -> int:
    out = Path(args.out)
    grid = _r_grid(args)
    common = dict(phi_z=args.phi, layers=args.layers, dt=args.dt)
    try:
        points, run = vqs.fidelity_sweep(grid, **common)
        sampled = None
        if args.shots:
            s_run = vqs.run_evolution(
                vqs.squeeze_run(
                    t_final=max(grid),
                    record_times=grid,
                    mode="circuit-sampled",
                    shots=args.shots,
                    seed=args.seed,
                    lam=args.lam,
                    **common,
                )
            )
            sampled = [s_run.fidelities["dynamics"][s_run.times.index(_nearest(s_run.times, r))] for r in grid]
    except vqs.NonFiniteDynamicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(out / "trajectory.csv", vqs.trajectory_csv(run))
    _write(out / "fidelity.csv", vqs.sweep_csv(points, sampled))
    for p in points:
        print(f"r={p.r:.4f} truncated_exact={p.benchmark:.6f} vqs={p.vqs:.6f}")
    if args.svg:
        r0 = fock.truncation_radius(6)
        series = {
            "truncated exact": (grid, [p.benchmark for p in points]),
            "VQS": (grid, [p.vqs for p in points]),
            "VQS vs truncated z": (grid, [p.vqs_vs_squeezed for p in points]),
        }
        if sampled is not None:
            series["VQS sampled"] = (grid, sampled)
        _write(out / "fidelity.svg", svg.line_plot(series, "fidelity vs r", "r", "F", vline=r0))
    _manifest(out, "vqs", args)
    return EXIT_OK


def _nearest(times, t):
    return min(times, key=lambda s: abs(s - t))


# --- tomo / wigner -----------------------------------------------------------


def tomography_experiment(r: float, phi: float, shots: int, seed: int, dt: float = 0.01, layers: int = 1):
    """Run VQS to t = r, sample the nine Pauli bases and reconstruct.

    Basis j (in MEASURED_BASES order) uses seed ``seed ^ j``.
    """
    run = vqs.run_evolution(vqs.squeeze_run(phi_z=phi, t_final=r, dt=dt, layers=layers))
    state = run.ansatz.state(run.thetas[-1], run.psi0)
    results = {
        b: sample(Statevector(state), b, shots, seed ^ j) for j, b in enumerate(analysis.MEASURED_BASES)
    }
    exact = analysis.tomography_coeffs(state)
    measured = analysis.tomography_coeffs(results)
    return run, state, exact, measured


def squeezed_target_qubits(r: float, phi: float) -> np.ndarray:
    """Renormalized truncated squeezed state written in the Gray-coded register."""
    enc = encode_even_b2(2, gray(2))
    amps_f = fock.exact_squeezed_state(r, phi, enc.max_photon).amps
    out = np.zeros(4, dtype=complex)
    out[list(enc.code.words)] = amps_f[list(enc.photon_of_index)]
    return out


def cmd_tomo(args) -> int:
    out = Path(args.out)
    _, state, exact, measured = tomography_experiment(args.r, args.phi, args.shots, args.seed, args.dt)
    rho = analysis.reconstruct(measured, psd=args.psd)
    target = squeezed_target_qubits(args.r, args.phi)
    fid = analysis.state_fidelity(rho, target)
    rows = [(lab, _num(measured[lab]), _num(exact[lab])) for lab in analysis.PAULI_LABELS]
    _write(out / "coefficients.csv", _csv(rows, ["pauli", "measured", "exact"]))
    _write(
        out / "rho.json",
        analysis.density_json(rho, schema_version=SCHEMA_VERSION, fidelity=fid, psd=args.psd) + "\n",
    )
    print(f"fidelity={fid:.6f}")
    _manifest(out, "tomo", args, fidelity=fid)
    return EXIT_OK


def cmd_wigner(args) -> int:
    out = Path(args.out)
    if args.grid_points < 2 or args.extent <= 0:
        raise UsageError("need grid-points >= 2 and extent > 0")
    xs = np.linspace(-args.extent, args.extent, args.grid_points)
    _, _, _, measured = tomography_experiment(args.r, args.phi, args.shots, args.seed, args.dt)
    rho = analysis.reconstruct(measured, psd=True)
    enc = encode_even_b2(2, gray(2))
    panels = {
        "reconstructed": analysis.qubit_to_fock(rho, enc),
        "truncated_exact": fock.exact_squeezed_state(args.r, args.phi, enc.max_photon).amps,
        "full_reference": fock.exact_squeezed_state(args.r, args.phi, fock.REFERENCE_DIM).amps,
    }
    stats = {}
    for name, state in panels.items():
        grid = analysis.wigner(state, xs, xs)
        _write(out / f"wigner_{name}.csv", analysis.wigner_csv(grid))
        _write(out / f"wigner_{name}.svg", svg.heatmap(xs, xs, grid.w, f"W(x, p): {name.replace('_', ' ')}"))
        cov = analysis.quadrature_covariance(state)
        stats[name] = {
            "min_w": float(grid.w.min()),
            "integral": grid.integral(),
            "min_variance": float(np.linalg.eigvalsh(cov)[0]),
            "squeezing_angle_deg": math.degrees(analysis.squeezing_angle(cov)),
        }
        print(f"{name}: min W={stats[name]['min_w']:.4g} angle={stats[name]['squeezing_angle_deg']:.2f} deg")
    _write(out / "wigner_stats.json", json.dumps({"schema_version": SCHEMA_VERSION, **stats}, indent=2, sort_keys=True) + "\n")
    _manifest(out, "wigner", args)
    return EXIT_OK


# --- transpile ---------------------------------------------------------------


def cmd_transpile(args) -> int:
    out = Path(args.out)
    text = Path(args.input).read_text() if args.input else files("bosenc").joinpath(FIXTURE).read_text()
    try:
        gates, n = circuit_from_json(text)
        nc = transpile(gates, n)
    except UnsupportedGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    eq = verify_equivalence(gates, nc, tol=args.tol, n_qubits=n)
    _write(out / "native.jsonl", native_jsonl(nc))
    report = {
        "schema_version": SCHEMA_VERSION,
        "equivalent": eq.ok,
        "deviation": eq.deviation,
        "phase": eq.phase,
        "source_gates": len(gates),
        "native_gates": len(nc),
    }
    _write(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"native gates={len(nc)} equivalent={eq.ok} deviation={eq.deviation:.3g}")
    _manifest(out, "transpile", args)
    return EXIT_OK if eq.ok else EXIT_NUMERIC


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosenc",
        description="Qubit encodings of a bosonic mode and variational squeezing simulation.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get(OUT_ENV, DEFAULT_OUT)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--out", default=default_out, help="output directory")
        p.set_defaults(func=func)
        return p

    p = add("codes", cmd_codes, "term-count histograms, unit-distance counts, k-fold search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--op", default="b", help="b or b<k> for the k-th power")
    p.add_argument("--exhaustive", action="store_true", help="histogram over every code (n <= 3)")
    p.add_argument("--list", action="store_true", help="also write the per-code listing")
    p.add_argument("--unit-distance", action="store_true", help="count unit-distance codes")
    p.add_argument("--kfold", type=int, help="search for a k-fold code")
    p.add_argument("--budget", type=int, default=2_000_000, help="search node budget")

    p = add("termsweep", cmd_termsweep, "term counts of b^k across code families")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--svg", action="store_true")

    p = add("vqs", cmd_vqs, "variational squeezing fidelity sweep")
    p.add_argument("--phi", type=float, default=math.pi / 2)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--shots", type=int, default=0, help="add a shot-sampled VQS column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--svg", action="store_true")

    for name, func, help_ in (
        ("tomo", cmd_tomo, "two-qubit tomography of the VQS state"),
        ("wigner", cmd_wigner, "Wigner panels for reconstructed, truncated and full states"),
    ):
        p = add(name, func, help_)
        p.add_argument("--r", type=float, default=0.5)
        p.add_argument("--phi", type=float, default=math.pi / 2)
        p.add_argument("--shots", type=int, default=50_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dt", type=float, default=0.01)
        if name == "tomo":
            p.add_argument("--psd", action="store_true", help="clip negative eigenvalues")
        else:
            p.add_argument("--extent", type=float, default=5.0)
            p.add_argument("--grid-points", type=int, default=101)

    p = add("transpile", cmd_transpile, "lower a circuit to the native gate set")
    p.add_argument("--input", help="circuit JSON (default: bundled example)")
    p.add_argument("--tol", type=float, default=1e-9)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
