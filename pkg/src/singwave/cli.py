"""Batch front door: JSON problem files in, CSV/report files out.

Subcommands: solve (full pipeline), verify (replay the residual oracle on
a saved solution), eigen (spatial eigenvalue table only), example (emit
the shipped demo problem file).  Exit codes: 0 success, 2 model
rejection, 3 input/parse error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import (
    InputError,
    ModelRejection,
    NumericalFailure,
    ParseError,
    ShapeError,
    SingwaveError,
)
from .fixtures import demo_problem
from .solver import (
    GridParams,
    ProblemSpec,
    Tolerances,
    solve_problem,
)
from .sturm_liouville import solve_psd
from .verify import ResidualReport, residual_report

_MATRIX_KEYS = ("E", "A", "A1", "A2", "B1", "B2")


def _entry_to_complex(value, key: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(p, (int, float)) for p in value)):
        return complex(value[0], value[1])
    raise ParseError(
        f'"{key}": entries must be numbers or [re, im] pairs, got {value!r}')


def _parse_matrix(doc: dict, key: str, m: int) -> np.ndarray:
    rows = doc.get(key)
    if not isinstance(rows, list) or len(rows) != m:
        raise ShapeError(f'"{key}" must be a {m}x{m} matrix')
    M = np.zeros((m, m), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise ShapeError(f'"{key}" row {i} must have {m} entries')
        for j, cell in enumerate(row):
            M[i, j] = _entry_to_complex(cell, key)
    return M


def _parse_grid_data(doc: dict, key: str, N: int, m: int) -> np.ndarray:
    rows = doc.get(key)
    if not isinstance(rows, list) or len(rows) != N + 1:
        raise ShapeError(f'"{key}" must list {N + 1} nodal vectors')
    out = np.zeros((N + 1, m), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise ShapeError(f'"{key}" node {i} must have {m} components')
        for c, cell in enumerate(row):
            out[i, c] = _entry_to_complex(cell, key)
    return out


def _parse_number(doc: dict, key: str) -> float:
    value = doc.get(key)
    if not isinstance(value, (int, float)):
        raise ParseError(f'"{key}" must be a real number, got {value!r}')
    return float(value)


def parse_problem(path: str) -> ProblemSpec:
    """Load and fully validate a problem file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    missing = [key for key in
               ("m", *_MATRIX_KEYS, "alpha", "beta", "N", "k", "T", "F", "G")
               if key not in doc]
    if missing:
        raise ParseError(f"{path}: missing keys {missing}")
    m = doc["m"]
    if not isinstance(m, int) or m < 1:
        raise ParseError(f'"m" must be a positive integer, got {m!r}')
    N_raw = doc["N"]
    if not isinstance(N_raw, int):
        raise ParseError(f'"N" must be an integer, got {N_raw!r}')
    grid = GridParams.create(N_raw, _parse_number(doc, "k"),
                             _parse_number(doc, "T"))
    matrices = {key: _parse_matrix(doc, key, m) for key in _MATRIX_KEYS}
    F = _parse_grid_data(doc, "F", grid.N, m)
    Gv = _parse_grid_data(doc, "G", grid.N, m)

    gamma: Optional[complex] = None
    if "gamma" in doc:
        gamma = _entry_to_complex(doc["gamma"], "gamma")
    tol = Tolerances()
    if "tolerances" in doc:
        tdoc = doc["tolerances"]
        if not isinstance(tdoc, dict):
            raise ParseError('"tolerances" must be an object')
        known = {"rank", "residual", "consistency"}
        unknown = set(tdoc) - known
        if unknown:
            raise ParseError(f'"tolerances" has unknown keys {sorted(unknown)}')
        tol = Tolerances(
            rank=float(tdoc.get("rank", tol.rank)),
            residual=float(tdoc.get("residual", tol.residual)),
            consistency=float(tdoc.get("consistency", tol.consistency)))
    rho_override = None
    if "rho_override" in doc:
        raw = doc["rho_override"]
        if isinstance(raw, (int, float)):
            rho_override = float(raw)
        elif isinstance(raw, list) and all(
                isinstance(v, (int, float)) for v in raw):
            if len(raw) != grid.N - 1:
                raise ShapeError(
                    f'"rho_override" must list {grid.N - 1} values')
            rho_override = [float(v) for v in raw]
        else:
            raise ParseError('"rho_override" must be a number or number list')

    return ProblemSpec(
        m=m, alpha=_parse_number(doc, "alpha"), beta=_parse_number(doc, "beta"),
        F=F, Gv=Gv, grid=grid, gamma=gamma, rho_override=rho_override,
        tolerances=tol, **matrices)


def _complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def serialize_problem(spec: ProblemSpec) -> dict:
    """Problem file document for a spec (entries always [re, im])."""
    doc: Dict[str, object] = {"m": spec.m}
    for key in _MATRIX_KEYS:
        M = getattr(spec, key)
        doc[key] = [[_complex_pair(M[i, j]) for j in range(spec.m)]
                    for i in range(spec.m)]
    doc["alpha"] = spec.alpha
    doc["beta"] = spec.beta
    doc["N"] = spec.grid.N
    doc["k"] = spec.grid.k
    doc["T"] = spec.grid.T
    doc["F"] = [[_complex_pair(z) for z in row] for row in spec.F]
    doc["G"] = [[_complex_pair(z) for z in row] for row in spec.Gv]
    if spec.gamma is not None:
        doc["gamma"] = _complex_pair(spec.gamma)
    if spec.rho_override is not None:
        doc["rho_override"] = spec.rho_override
    doc["tolerances"] = {"rank": spec.tolerances.rank,
                         "residual": spec.tolerances.residual,
                         "consistency": spec.tolerances.consistency}
    return doc


def write_problem(spec: ProblemSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(serialize_problem(spec), fh, indent=1)
        fh.write("\n")


def write_solution_csv(U: np.ndarray, grid: GridParams, path: str) -> None:
    """Grid values, one row per (i, j), i outer; shortest-round-trip
    decimal text."""
    N, M, m = U.shape[0] - 1, U.shape[1] - 1, U.shape[2]
    header = ["i", "j", "x", "t"]
    for c in range(m):
        header.extend([f"u{c}_re", f"u{c}_im"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(N + 1):
            for j in range(M + 1):
                row = [str(i), str(j), repr(i / N), repr(j * grid.k)]
                for c in range(m):
                    row.append(repr(float(np.real(U[i, j, c]))))
                    row.append(repr(float(np.imag(U[i, j, c]))))
                writer.writerow(row)


def read_solution_csv(path: str) -> np.ndarray:
    """Inverse of write_solution_csv; returns the (N+1, M+1, m) grid."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:4] != ["i", "j", "x", "t"]:
            raise ParseError(f"{path}: not a solution table")
        m, rem = divmod(len(header) - 4, 2)
        if m < 1 or rem:
            raise ParseError(f"{path}: malformed value columns")
        cells = []
        for row in reader:
            if len(row) != len(header):
                raise ParseError(f"{path}: ragged row {row[:2]}")
            cells.append((int(row[0]), int(row[1]),
                          [float(v) for v in row[4:]]))
    if not cells:
        raise ParseError(f"{path}: empty table")
    N = max(c[0] for c in cells)
    M = max(c[1] for c in cells)
    U = np.zeros((N + 1, M + 1, m), dtype=complex)
    seen = np.zeros((N + 1, M + 1), dtype=bool)
    for i, j, vals in cells:
        U[i, j] = [complex(vals[2 * c], vals[2 * c + 1]) for c in range(m)]
        seen[i, j] = True
    if not seen.all():
        raise ParseError(f"{path}: missing grid rows")
    return U


def write_eigen_csv(pairs, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "lambda"])
        for idx, pair in enumerate(pairs, start=1):
            writer.writerow([str(idx), repr(float(pair.lam))])


def _fmt(value: float) -> str:
    return f"{value:.6e}"


def build_report(spec: ProblemSpec, trace: dict,
                 residuals: Optional[ResidualReport],
                 error: Optional[SingwaveError]) -> str:
    """Human-readable run summary; sections appear as far as the run got."""
    lines: List[str] = []
    grid = spec.grid
    lines.append("== grid ==")
    lines.append(f"N={grid.N} h={1.0 / grid.N!r} k={grid.k!r} "
                 f"T={grid.T!r} M={grid.M} r={grid.r!r}")
    lines.append(f"m={spec.m}")
    if "eigenpairs" in trace:
        pairs = trace["eigenpairs"]
        lines.append("== spatial eigenvalues ==")
        lines.append(" ".join(_fmt(p.lam) for p in pairs))
    if "pencil" in trace:
        pd = trace["pencil"]
        lines.append("== pencil ==")
        lines.append(f"gamma={pd.gamma}")
        lines.append("reduced spectrum: "
                     + " ".join(str(z) for z in pd.spectrum_reduced))
        lines.append(f"nilpotency index={pd.index_k} "
                     f"core_active={pd.core_active}")
    if "boundary" in trace:
        bm = trace["boundary"]
        lines.append("== endpoint matrix ==")
        lines.append(f"rank={bm.rank} of m={spec.m} "
                     f"(kernel dimension {bm.kernel.shape[1]})")
    if "consistency" in trace:
        rep = trace["consistency"]
        lines.append("== admissibility ==")
        lines.append(f"projector_fixes_data={rep.projector_fixes_data} "
                     f"(defect {_fmt(rep.projector_defect)})")
        lines.append(f"data_in_kernel={rep.data_in_kernel} "
                     f"(defect {_fmt(rep.kernel_defect)})")
        lines.append(f"kernel_invariant={rep.kernel_invariant} "
                     f"(defect {_fmt(rep.invariance_defect)})")
    if "modes" in trace:
        lines.append("== modes ==")
        lines.append("l rho residual")
        for mc in trace["modes"]:
            lines.append(f"{mc.l} {mc.rho_l!r} {_fmt(mc.residual)}")
    if residuals is not None:
        lines.append("== residuals ==")
        lines.append(f"interior_max={_fmt(residuals.interior_max)}")
        lines.append(f"left_bc_max={_fmt(residuals.left_bc_max)}")
        lines.append(f"right_bc_max={_fmt(residuals.right_bc_max)}")
        lines.append(f"init_pos_max={_fmt(residuals.init_pos_max)}")
        lines.append(f"init_vel_max={_fmt(residuals.init_vel_max)}")
        lines.append(f"normalizer={residuals.normalizer!r}")
    if "stability" in trace:
        st = trace["stability"]
        lines.append("== stability ==")
        lines.append(f"growth_rate={_fmt(st.growth_rate)} "
                     f"sup_norm={_fmt(st.sup_norm)} "
                     f"envelope={_fmt(st.envelope)}")
        lines.append(f"power_bound_ok={st.power_bound_ok} "
                     f"bounded={st.bounded}")
        lines.append("l rho max|Z0^j| max|Z1^j| rate bound_ok")
        for row in st.modes:
            lines.append(f"{row.l} {row.rho_l!r} "
                         f"{_fmt(row.max_power_norm_plus)} "
                         f"{_fmt(row.max_power_norm_minus)} "
                         f"{_fmt(row.growth_rate)} {row.bound_ok}")
    lines.append("== result ==")
    if error is None:
        lines.append("ACCEPTED")
    else:
        lines.append(f"REJECTED: {error.condition}")
        lines.append(str(error))
    return "\n".join(lines) + "\n"


def run_solve(spec: ProblemSpec, out_dir: str, quiet: bool = False) -> int:
    """Solve and write solution.csv, eigen.csv, report.txt into out_dir.

    The report is written even when the problem is rejected, naming the
    rejection condition.
    """
    os.makedirs(out_dir, exist_ok=True)
    trace: dict = {}
    residuals: Optional[ResidualReport] = None
    error: Optional[SingwaveError] = None
    status = 0
    try:
        sol = solve_problem(spec, trace)
        residuals = residual_report(sol.U, spec)
    except SingwaveError as exc:
        error = exc
        status = exc.exit_code
    if "eigenpairs" in trace:
        write_eigen_csv(trace["eigenpairs"],
                        os.path.join(out_dir, "eigen.csv"))
    if error is None:
        write_solution_csv(trace["solution"].U, spec.grid,
                           os.path.join(out_dir, "solution.csv"))
    report = build_report(spec, trace, residuals, error)
    with open(os.path.join(out_dir, "report.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    if not quiet:
        sys.stdout.write(report)
    return status


def run_verify(problem_path: str, solution_path: str,
               tol: float = 1e-8, quiet: bool = False) -> int:
    """Replay the residual oracle on a saved solution; exit 2 when any
    residual exceeds the tolerance."""
    spec = parse_problem(problem_path)
    U = read_solution_csv(solution_path)
    expected = (spec.grid.N + 1, spec.grid.M + 1, spec.m)
    if U.shape != expected:
        raise ShapeError(
            f"solution grid {U.shape} does not match problem {expected}")
    rep = residual_report(U, spec)
    if not quiet:
        for name in ("interior_max", "left_bc_max", "right_bc_max",
                     "init_pos_max", "init_vel_max"):
            print(f"{name}={_fmt(getattr(rep, name))}")
        print(f"normalizer={rep.normalizer!r}")
    if rep.worst > tol:
        if not quiet:
            print(f"FAIL: worst residual {_fmt(rep.worst)} exceeds {tol:g}")
        return 2
    if not quiet:
        print("OK")
    return 0


def _apply_tolerance_flags(spec: ProblemSpec, args) -> ProblemSpec:
    tol = spec.tolerances
    if args.tol_rank is not None:
        tol.rank = args.tol_rank
    if args.tol_residual is not None:
        tol.residual = args.tol_residual
    if getattr(args, "gamma", None) is not None:
        try:
            spec.gamma = complex(args.gamma)
        except ValueError as exc:
            raise ParseError(f"--gamma: {args.gamma!r} is not a number") from exc
    return spec


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singwave",
        description="Solve coupled two-level difference systems with a "
                    "singular time-coefficient matrix.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True,
                           help="problem file (JSON)")
        p.add_argument("--out-dir", default=".",
                       help="directory for output files")
        p.add_argument("--quiet", action="store_true",
                       help="suppress normal output")

    p_solve = sub.add_parser("solve", help="run the full pipeline")
    common(p_solve)
    p_solve.add_argument("--tol-rank", type=float, default=None)
    p_solve.add_argument("--tol-residual", type=float, default=None)
    p_solve.add_argument("--gamma", default=None,
                         help="override the pencil shift (complex literal)")

    p_verify = sub.add_parser("verify",
                              help="check a saved solution's residuals")
    common(p_verify)
    p_verify.add_argument("--solution", required=True,
                          help="solution.csv to check")
    p_verify.add_argument("--tol-residual", type=float, default=1e-8)

    p_eigen = sub.add_parser("eigen",
                             help="write the spatial eigenvalue table")
    common(p_eigen)

    p_example = sub.add_parser("example",
                               help="write the shipped demo problem file")
    common(p_example, needs_input=False)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            spec = _apply_tolerance_flags(parse_problem(args.input), args)
            return run_solve(spec, args.out_dir, args.quiet)
        if args.command == "verify":
            return run_verify(args.input, args.solution,
                              args.tol_residual, args.quiet)
        if args.command == "eigen":
            spec = parse_problem(args.input)
            pairs = solve_psd(spec.sl_problem())
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, "eigen.csv")
            write_eigen_csv(pairs, path)
            if not args.quiet:
                print(path)
            return 0
        if args.command == "example":
            spec = demo_problem()
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, "problem.json")
            write_problem(spec, path)
            if not args.quiet:
                print(path)
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except ModelRejection as exc:
        print(f"rejected [{exc.condition}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except InputError as exc:
        print(f"input error [{exc.condition}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericalFailure as exc:
        print(f"numerical failure [{exc.condition}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
