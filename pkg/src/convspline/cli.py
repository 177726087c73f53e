"""Command-line front end.

Every command writes deterministic CSV/JSON (shortest-roundtrip float
formatting, fixed row order) plus a ``<out>.config.json`` sidecar carrying the
fully-resolved configuration.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConvsplineError
from .kernels import Constant, kernel_from_spec, kernel_label
from .stability import pn_scan, rational_Q, root_condition_check
from .timebasis import (
    BSplineIso,
    CQBasis,
    ModifiedCubic,
    TemporalBasis,
    TimeGrid,
    phi_eval,
    reconstruct,
)
from .vie import (
    converge_study,
    default_smooth_problem,
    gaussian_driver,
    manufactured_rhs,
    march,
)
from .weights import weights_cq, weights_quadrature

__all__ = ["main"]


def _fmt(x) -> str:
    """Shortest-roundtrip decimal form of a float."""
    return repr(float(x))


def basis_from_spec(text: str) -> TemporalBasis:
    text = text.strip()
    if text == "modcubic":
        return ModifiedCubic()
    if text.startswith("bspline:m="):
        return BSplineIso(int(text.split("=", 1)[1]))
    if text.startswith("cq:"):
        return CQBasis(text.split(":", 1)[1])
    raise ValueError(f"unknown basis spec {text!r}")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(str(c) if isinstance(c, (int, np.integer)) else _fmt(c) for c in row)
                + "\n"
            )


def _write_sidecar(out: Path, config: dict) -> None:
    with open(out.with_name(out.name + ".config.json"), "w", encoding="ascii") as fh:
        json.dump(config, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _merge_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """Flags override JSON config-file values; returns the resolved mapping."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(keys)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    resolved = {}
    for key in keys:
        flag = getattr(args, key, None)
        resolved[key] = flag if flag is not None else file_cfg.get(key)
    return resolved


def _grid_from(cfg: dict) -> TimeGrid:
    T = cfg.get("T")
    N = cfg.get("N")
    dt = cfg.get("dt")
    if N is not None:
        if T is None:
            raise ValueError("--N needs --T")
        return TimeGrid.from_horizon(float(T), int(N))
    if dt is not None:
        if T is None:
            raise ValueError("--dt needs --T")
        return TimeGrid(float(dt), int(round(float(T) / float(dt))))
    raise ValueError("specify --N or --dt together with --T")


def _weights_for(kernel, basis, grid):
    if isinstance(basis, CQBasis):
        return weights_cq(basis.method, kernel, grid)
    return weights_quadrature(kernel, basis, grid)


# ---------------------------------------------------------------------------
# commands


def _cmd_vie_solve(args) -> int:
    cfg = _merge_config(args, ["kernel", "basis", "T", "N", "dt", "problem", "out"])
    kernel = kernel_from_spec(cfg["kernel"] or "constant")
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    grid = _grid_from(cfg)
    problem = cfg["problem"] or "t6exp"
    out = Path(cfg["out"])

    if problem == "t6exp":
        u_exact = lambda t: t**6 * np.exp(-t)
        a = manufactured_rhs(u_exact, kernel, grid)
    elif problem == "gauss":
        u_exact = None
        times = grid.times()
        a = times**6 * np.exp(-50.0 * (times - 0.5) ** 2)
        a[0] = 0.0
    else:
        raise ValueError(f"unknown problem preset {problem!r}")

    coeffs = march(_weights_for(kernel, basis, grid), a)
    times = grid.times()
    U = reconstruct(coeffs, times)
    header = ["n", "t_n", "v_n", "U_tn"] + (["u_exact"] if u_exact else [])
    rows = []
    for n, t in enumerate(times):
        row = [n, t, coeffs.values[n], U[n]]
        if u_exact:
            row.append(u_exact(t))
        rows.append(row)
    _write_csv(out, header, rows)
    _write_sidecar(
        out,
        {
            "command": "vie-solve",
            "kernel": kernel_label(kernel),
            "basis": basis.label(),
            "T": grid.T,
            "N": grid.n_steps,
            "problem": problem,
        },
    )
    return 0


def _cmd_vie_converge(args) -> int:
    cfg = _merge_config(args, ["kernel", "basis", "T", "N_list", "problem", "out"])
    kernel = kernel_from_spec(cfg["kernel"] or "constant")
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    T = float(cfg["T"] or 10.0)
    n_list = [int(x) for x in (cfg["N_list"] or "40,80,160,320,640").split(",")]
    problem_name = cfg["problem"] or "t6exp"
    problem = (
        default_smooth_problem(kernel, T)
        if problem_name == "t6exp"
        else gaussian_driver(kernel, T)
    )
    study = converge_study(problem, basis, n_list)
    out = Path(cfg["out"])
    _write_csv(
        out,
        ["N", "h", "error", "order"],
        [(r.N, r.h, r.error, r.order) for r in study.rows],
    )
    _write_sidecar(
        out,
        {
            "command": "vie-converge",
            "kernel": kernel_label(kernel),
            "basis": basis.label(),
            "T": T,
            "N_list": n_list,
            "problem": problem_name,
            "fitted_order": study.fitted_order,
        },
    )
    return 0


def _cmd_stab_scan(args) -> int:
    cfg = _merge_config(
        args, ["kernel_family", "basis", "omega_dt", "n_max", "threads", "out"]
    )
    family = cfg["kernel_family"] or "j0"
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    spec = cfg["omega_dt"] or "0:62.83185307179586:65"
    lo, hi, count = spec.split(":")
    grid_vals = np.linspace(float(lo), float(hi), int(count))
    n_max = int(cfg["n_max"] or 2500)
    table = pn_scan(
        basis, family, grid_vals, n_max=n_max, threads=int(cfg["threads"] or 1)
    )
    out = Path(cfg["out"])
    _write_csv(out, ["omega_dt", "max_abs_pn"], [tuple(row) for row in table])
    _write_sidecar(
        out,
        {
            "command": "stab-scan",
            "kernel_family": family,
            "basis": basis.label(),
            "omega_dt": spec,
            "n_max": n_max,
        },
    )
    return 0


def _cmd_stab_roots(args) -> int:
    cfg = _merge_config(args, ["kernel", "basis", "dt", "c", "cluster_tol", "out"])
    kernel = kernel_from_spec(cfg["kernel"] or "constant")
    basis = basis_from_spec(cfg["basis"] or "bspline:m=3")
    dt = float(cfg["dt"] or 0.1)
    c = float(cfg["c"] or 10.0)
    tol = float(cfg["cluster_tol"] or 1e-7)
    Q = rational_Q(basis, kernel, TimeGrid(dt, 1))
    verdict = root_condition_check(Q, dt, c=c, cluster_tol=tol)
    payload = {
        "classification": verdict.classification,
        "witness": verdict.witness,
        "threshold": 1.0 / (1.0 + c * dt),
        "roots": [
            {
                "re": r.value.real,
                "im": r.value.imag,
                "modulus": r.modulus,
                "multiplicity": r.multiplicity,
            }
            for r in sorted(verdict.roots, key=lambda r: (round(r.modulus, 12), r.value.real, r.value.imag))
        ],
    }
    out = Path(cfg["out"])
    with open(out, "w", encoding="ascii") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
    _write_sidecar(
        out,
        {
            "command": "stab-roots",
            "kernel": kernel_label(kernel),
            "basis": basis.label(),
            "dt": dt,
            "c": c,
            "cluster_tol": tol,
        },
    )
    return 0


def _cmd_weights_dump(args) -> int:
    cfg = _merge_config(args, ["kernel", "basis", "T", "N", "dt", "out"])
    kernel = kernel_from_spec(cfg["kernel"] or "constant")
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    grid = _grid_from(cfg)
    w = _weights_for(kernel, basis, grid)
    out = Path(cfg["out"])
    _write_csv(out, ["j", "q_j"], [(j, q) for j, q in enumerate(w.q)])
    _write_sidecar(
        out,
        {
            "command": "weights-dump",
            "kernel": kernel_label(kernel),
            "basis": basis.label(),
            "T": grid.T,
            "N": grid.n_steps,
        },
    )
    return 0


def _cmd_basis_dump(args) -> int:
    cfg = _merge_config(args, ["basis", "j_max", "tau", "out"])
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    j_max = int(cfg["j_max"] or 8)
    spec = cfg["tau"] or "0:12:121"
    lo, hi, count = spec.split(":")
    taus = np.linspace(float(lo), float(hi), int(count))
    out = Path(cfg["out"])
    header = ["tau"] + [f"phi_{j}" for j in range(j_max + 1)]
    rows = []
    for tau in taus:
        rows.append([tau] + [phi_eval(basis, j, float(tau)) for j in range(j_max + 1)])
    _write_csv(out, header, rows)
    _write_sidecar(
        out,
        {"command": "basis-dump", "basis": basis.label(), "j_max": j_max, "tau": spec},
    )
    return 0


def _cmd_mesh_gen(args) -> int:
    from .tdbie import mesh_unit_sphere, mesh_unit_square, write_off

    cfg = _merge_config(args, ["shape", "out"])
    spec = cfg["shape"] or "sphere:subdiv=1"
    head, _, rest = spec.partition(":")
    params = {}
    if rest:
        key, _, val = rest.partition("=")
        params[key] = int(val)
    if head == "sphere":
        mesh = mesh_unit_sphere(params.get("subdiv", 1))
    elif head == "square":
        mesh = mesh_unit_square(params.get("n", 4))
    else:
        raise ValueError(f"unknown mesh shape {spec!r}")
    out = Path(cfg["out"])
    write_off(out, mesh)
    _write_sidecar(
        out,
        {
            "command": "mesh-gen",
            "shape": spec,
            "vertices": int(mesh.vertices.shape[0]),
            "faces": int(mesh.triangles.shape[0]),
        },
    )
    return 0


def _cmd_tdbie_run(args) -> int:
    from .tdbie import (
        IncidentField,
        assemble_matrices,
        make_rhs_provider,
        mesh_unit_sphere,
        mesh_unit_square,
        read_off,
        solution_norms,
        time_march,
    )

    cfg = _merge_config(
        args,
        [
            "mesh",
            "T",
            "dt",
            "mesh_ratio",
            "t0",
            "basis",
            "threads",
            "out",
            "density_dump",
        ],
    )
    spec = cfg["mesh"] or "sphere:subdiv=1"
    if spec.startswith("sphere:subdiv="):
        mesh = mesh_unit_sphere(int(spec.split("=", 1)[1]))
    elif spec.startswith("square:n="):
        mesh = mesh_unit_square(int(spec.split("=", 1)[1]))
    else:
        mesh = read_off(spec)
    T = float(cfg["T"] or 10.0)
    ratio = float(cfg["mesh_ratio"] or 0.5)
    dt = float(cfg["dt"]) if cfg["dt"] is not None else ratio * mesh.mean_element_size()
    t0 = float(cfg["t0"] or 0.0)
    basis = basis_from_spec(cfg["basis"] or "modcubic")
    threads = int(cfg["threads"] or 1)
    field = IncidentField(t0=t0)
    matrices = assemble_matrices(mesh, dt, basis=basis, threads=threads)
    provider = make_rhs_provider(mesh, field, dt)
    n_steps = int(round(T / dt))
    sol = time_march(matrices, provider, n_steps)
    norms = solution_norms(sol)
    out = Path(cfg["out"])
    _write_csv(
        out,
        ["n", "t", "linf_mid", "l1"],
        [(int(r[0]), r[1], r[2], r[3]) for r in norms],
    )
    if cfg["density_dump"]:
        dump = Path(cfg["density_dump"])
        with open(dump, "wb") as fh:
            np.array([sol.U.shape[1], n_steps], dtype=np.int64).tofile(fh)
            np.ascontiguousarray(sol.U, dtype=np.float64).tofile(fh)
    _write_sidecar(
        out,
        {
            "command": "tdbie-run",
            "mesh": spec,
            "T": T,
            "dt": dt,
            "mesh_ratio": ratio,
            "t0": t0,
            "basis": basis.label(),
            "n_elements": int(mesh.n_elements),
            "n_steps": n_steps,
            "pulse": "t^4*exp(-20*(t-1/2)^2)",
        },
    )
    return 0


_COMMANDS = {
    "vie-solve": _cmd_vie_solve,
    "vie-converge": _cmd_vie_converge,
    "stab-scan": _cmd_stab_scan,
    "stab-roots": _cmd_stab_roots,
    "weights-dump": _cmd_weights_dump,
    "basis-dump": _cmd_basis_dump,
    "mesh-gen": _cmd_mesh_gen,
    "tdbie-run": _cmd_tdbie_run,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convspline",
        description="Convolution-spline/CQ time stepping, stability analysis, "
        "and TDBIE scattering runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, flags: list[str], help_text: str) -> None:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", required=True, help="primary output file")
        p.add_argument("--config", help="JSON config file (flags take precedence)")
        for flag in flags:
            p.add_argument(f"--{flag.replace('_', '-')}", dest=flag)

    add("vie-solve", ["kernel", "basis", "T", "N", "dt", "problem"], "march one VIE")
    add("vie-converge", ["kernel", "basis", "T", "N_list", "problem"], "refinement study")
    add("stab-scan", ["kernel_family", "basis", "omega_dt", "n_max", "threads"],
        "max|p_n| over a frequency grid")
    add("stab-roots", ["kernel", "basis", "dt", "c", "cluster_tol"],
        "root-condition verdict for rational Z-transforms")
    add("weights-dump", ["kernel", "basis", "T", "N", "dt"], "quadrature/CQ weights")
    add("basis-dump", ["basis", "j_max", "tau"], "basis function table")
    add("mesh-gen", ["shape"], "write an OFF mesh")
    add("tdbie-run", ["mesh", "T", "dt", "mesh_ratio", "t0", "basis", "threads",
                      "density_dump"], "scattering run")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ConvsplineError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
