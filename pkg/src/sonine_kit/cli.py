"""Command-line front end: configuration, dispatch, and data emission.

One job per invocation: ``sonine-kit <command> --config <path> [--out
<path>] [--format csv|json]``. The config is a single JSON document; all
outputs are deterministic data tables (CSV with a header row, or a flat
JSON object), with a one-line summary on stdout and diagnostics on
stderr. Exit status: 0 pass, 1 error, 2 tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, GscConditionError, IllConditionedSystemError
from .kernels import (
    KernelSpec,
    SoninePair,
    affine_exponent,
    make_classical_abel_pair,
    make_variable_exponent_pair,
)
from .mesh import SampledFunction, graded_mesh
from .quadrature import convolve_pair, convolve_weakly_singular
from .sonine import check_gsc, compute_g_substituted
from .volterra import (
    RhsSpec,
    classical_solution,
    discover_associate,
    solve_first_kind,
)

__all__ = ["JobConfig", "parse_config", "run", "main"]

COMMANDS = ("verify-pair", "compute-g", "solve", "discover", "converge", "stability")

#: tolerance defaults; any key may be overridden in the config's "tolerances" map
TOL_DEFAULTS = {
    "g0": 1e-3,
    "route_diff": 5e-5,
    "residual_first_kind": 5e-3,
    "sc_residual_of_u": 5e-3,
    "min_order": 0.8,
    "delta": 1e-6,
}

#: errors at or below this are considered converged in order fits
ORDER_FLOOR = 1e-12

#: number of mesh levels in a convergence study (N, N/2, N/4, N/8)
CONVERGE_LEVELS = 4

_FLOAT_FMT = "{:.17g}"


@dataclass(frozen=True, slots=True)
class KernelConfig:
    kind: str  # "classical" or "variable"
    alpha: float | None
    a0: float | None
    a1: float | None
    b: float


@dataclass(frozen=True, slots=True)
class JobConfig:
    """One validated job: what to run, on what, and where results go."""

    command: str
    kernel: KernelConfig
    N: int
    r: float
    rhs_coeffs: tuple
    out_path: str | None
    out_format: str
    tolerances: dict


def _cfg_error(field: str, msg: str) -> DomainError:
    return DomainError(f"config field {field!r}: {msg}")


def _take(obj: dict, known: tuple, where: str) -> None:
    for key in obj:
        if key not in known:
            raise _cfg_error(f"{where}{key}", "unknown field")


def _as_real(obj: dict, key: str, where: str, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise _cfg_error(where + key, "missing required field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
        raise _cfg_error(where + key, f"must be a finite number, got {v!r}")
    return float(v)


def _parse_kernel(doc: dict) -> KernelConfig:
    if "kernel" not in doc or not isinstance(doc["kernel"], dict):
        raise _cfg_error("kernel", "missing required object")
    kd = doc["kernel"]
    _take(kd, ("kind", "alpha", "a0", "a1", "b"), "kernel.")
    kind = kd.get("kind")
    if kind not in ("classical", "variable"):
        raise _cfg_error("kernel.kind", f"must be 'classical' or 'variable', got {kind!r}")
    b = _as_real(kd, "b", "kernel.")
    if b <= 0.0:
        raise _cfg_error("kernel.b", f"must be positive, got {b!r}")
    if kind == "classical":
        alpha = _as_real(kd, "alpha", "kernel.")
        if not 0.0 < alpha < 1.0:
            raise _cfg_error("kernel.alpha", f"must lie in (0, 1), got {alpha!r}")
        return KernelConfig(kind=kind, alpha=alpha, a0=None, a1=None, b=b)
    a0 = _as_real(kd, "a0", "kernel.")
    a1 = _as_real(kd, "a1", "kernel.")
    lo, hi = min(a0, a0 + a1 * b), max(a0, a0 + a1 * b)
    if not 0.0 < lo <= hi < 1.0:
        raise _cfg_error(
            "kernel.a0", f"affine profile leaves (0, 1) on [0, {b!r}]: range [{lo!r}, {hi!r}]"
        )
    return KernelConfig(kind=kind, alpha=None, a0=a0, a1=a1, b=b)


def parse_config(text: str) -> JobConfig:
    """Parse and validate a JSON job document into a JobConfig.

    Defaults: mesh N=512, r=2, rhs f(t)=t, format csv. Violations are
    reported with the offending field's dotted name.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DomainError("config must be a JSON object at top level")
    _take(doc, ("command", "kernel", "mesh", "rhs", "output", "tolerances"), "")

    command = doc.get("command")
    if command not in COMMANDS:
        raise _cfg_error("command", f"must be one of {', '.join(COMMANDS)}, got {command!r}")

    kernel = _parse_kernel(doc)

    mesh_doc = doc.get("mesh", {})
    if not isinstance(mesh_doc, dict):
        raise _cfg_error("mesh", "must be an object with N and r")
    _take(mesh_doc, ("N", "r"), "mesh.")
    n_raw = mesh_doc.get("N", 512)
    if isinstance(n_raw, bool) or not isinstance(n_raw, int) or n_raw < 2:
        raise _cfg_error("mesh.N", f"must be an integer >= 2, got {n_raw!r}")
    r = _as_real(mesh_doc, "r", "mesh.", default=2.0)
    if r < 1.0:
        raise _cfg_error("mesh.r", f"must be >= 1, got {r!r}")

    rhs_doc = doc.get("rhs", {})
    if not isinstance(rhs_doc, dict):
        raise _cfg_error("rhs", "must be an object with coeffs")
    _take(rhs_doc, ("coeffs",), "rhs.")
    coeffs = rhs_doc.get("coeffs", [0.0, 1.0])
    if (
        not isinstance(coeffs, list)
        or len(coeffs) == 0
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in coeffs)
        or any(not math.isfinite(float(v)) for v in coeffs)
    ):
        raise _cfg_error("rhs.coeffs", f"must be a nonempty list of finite numbers, got {coeffs!r}")

    out_doc = doc.get("output", {})
    if not isinstance(out_doc, dict):
        raise _cfg_error("output", "must be an object with path and format")
    _take(out_doc, ("path", "format"), "output.")
    out_path = out_doc.get("path")
    if out_path is not None and not isinstance(out_path, str):
        raise _cfg_error("output.path", f"must be a string, got {out_path!r}")
    fmt = out_doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise _cfg_error("output.format", f"must be 'csv' or 'json', got {fmt!r}")

    tol_doc = doc.get("tolerances", {})
    if not isinstance(tol_doc, dict):
        raise _cfg_error("tolerances", "must be an object of named numbers")
    tolerances = dict(TOL_DEFAULTS)
    for key, v in tol_doc.items():
        if key not in TOL_DEFAULTS:
            raise _cfg_error(f"tolerances.{key}", "unknown tolerance name")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            raise _cfg_error(f"tolerances.{key}", f"must be a finite number, got {v!r}")
        tolerances[key] = float(v)

    return JobConfig(
        command=command,
        kernel=kernel,
        N=n_raw,
        r=r,
        rhs_coeffs=tuple(float(v) for v in coeffs),
        out_path=out_path,
        out_format=fmt,
        tolerances=tolerances,
    )


def _build_pair(kc: KernelConfig) -> SoninePair:
    if kc.kind == "classical":
        return make_classical_abel_pair(kc.alpha, kc.b)
    return make_variable_exponent_pair(affine_exponent(kc.a0, kc.a1, kc.b), kc.b)


def _fmt(x) -> str:
    return _FLOAT_FMT.format(float(x))


def _emit_csv(path: str, columns: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(float(value)) else None
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    raise DomainError(f"cannot serialize {type(value).__name__} to JSON output")


def _emit_json(path: str, record: dict) -> None:
    with open(path, "w", newline="") as fh:
        json.dump({k: _jsonable(v) for k, v in record.items()}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _emit(cfg: JobConfig, columns: list[str], rows: list[list[float]], extra: dict) -> str:
    path = cfg.out_path or f"{cfg.command}.{cfg.out_format}"
    if cfg.out_format == "csv":
        _emit_csv(path, columns, rows)
    else:
        record = {c: [row[j] for row in rows] for j, c in enumerate(columns)}
        record.update(extra)
        _emit_json(path, record)
    return path


def _nodewise_condition_residual(
    k: KernelSpec, u_values: np.ndarray, mesh, M: int | None
) -> np.ndarray:
    """(u * k)(t_i) - 1 at interior nodes, via the doubly singular route."""
    u_sf = SampledFunction(mesh=mesh, values=u_values)
    if np.isfinite(u_values[0]):
        conv = convolve_weakly_singular(k, u_sf, mesh)
    else:
        conv = convolve_pair(KernelSpec.from_samples(u_sf), k, mesh, M=M)
    return conv.values[1:] - 1.0


def _run_verify_pair(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    mesh = graded_mesh(cfg.N, cfg.r, cfg.kernel.b)
    report = check_gsc(pair, mesh, g0_tol=cfg.tolerances["g0"])
    rows = [[t, g] for t, g in zip(mesh.nodes[1:], report.g.values[1:])]
    extra = {
        "g0": report.g0,
        "sc_residual": report.sc_residual,
        "g0_defect": report.g0_defect,
        "eps_C": report.eps_fit.C,
        "eps": report.eps_fit.eps,
        "eps_passed": report.eps_fit.passed,
        "eps_r_squared": report.eps_fit.r_squared,
        "gprime_l1": report.gprime_l1,
        "route_diff": report.route_diff,
        "gsc_pass": report.gsc_pass,
    }
    path = _emit(cfg, ["t", "g"], rows, extra)
    print(
        f"sc_residual={_fmt(report.sc_residual)} g0_defect={_fmt(report.g0_defect)} "
        f"gprime_l1={_fmt(report.gprime_l1)} gsc_pass={str(report.gsc_pass).lower()} -> {path}"
    )
    return (0 if report.gsc_pass else 2), path


def _run_compute_g(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    mesh = graded_mesh(cfg.N, cfg.r, cfg.kernel.b)
    if pair.exponent is not None:
        g = compute_g_substituted(pair, mesh.nodes[1:])
        other = convolve_pair(pair.K, pair.k, mesh).values[1:]
        route_diff = float(np.max(np.abs(g - other)))
    else:
        g = convolve_pair(pair.K, pair.k, mesh).values[1:]
        route_diff = float("nan")
    rows = [[t, gv] for t, gv in zip(mesh.nodes[1:], g)]
    max_defect = float(np.max(np.abs(g - 1.0)))
    extra = {"max_defect": max_defect, "route_diff": route_diff}
    path = _emit(cfg, ["t", "g"], rows, extra)
    print(f"max_defect={_fmt(max_defect)} route_diff={_fmt(route_diff)} -> {path}")
    ok = math.isnan(route_diff) or route_diff <= cfg.tolerances["route_diff"]
    return (0 if ok else 2), path


def _run_solve(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    mesh = graded_mesh(cfg.N, cfg.r, cfg.kernel.b)
    rhs = RhsSpec.from_polynomial(cfg.rhs_coeffs)
    report = solve_first_kind(pair, rhs, mesh)
    rows = [
        [t, u, F]
        for t, u, F in zip(mesh.nodes[1:], report.u.values[1:], report.F.values[1:])
    ]
    extra = {
        "residual_first_kind": report.residual_first_kind,
        "residual_second_kind": report.residual_second_kind,
        "gprime_l1": report.gprime_l1,
    }
    path = _emit(cfg, ["t", "u", "F"], rows, extra)
    print(
        f"residual_first_kind={_fmt(report.residual_first_kind)} "
        f"residual_second_kind={_fmt(report.residual_second_kind)} -> {path}"
    )
    ok = report.residual_first_kind <= cfg.tolerances["residual_first_kind"]
    return (0 if ok else 2), path


def _run_discover(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    mesh = graded_mesh(cfg.N, cfg.r, cfg.kernel.b)
    report = discover_associate(pair.k, pair.K, mesh)
    per_node = _nodewise_condition_residual(pair.k, report.u.values, mesh, None)
    rows = [
        [t, u, rr]
        for t, u, rr in zip(mesh.nodes[1:], report.u.values[1:], per_node)
    ]
    extra = {
        "sc_residual_of_u": report.sc_residual_of_u,
        "residual_second_kind": report.residual_second_kind,
        "gprime_l1": report.gprime_l1,
    }
    path = _emit(cfg, ["t", "u", "associate_residual"], rows, extra)
    print(f"sc_residual_of_u={_fmt(report.sc_residual_of_u)} -> {path}")
    ok = report.sc_residual_of_u <= cfg.tolerances["sc_residual_of_u"]
    return (0 if ok else 2), path


def _converge_reference(cfg: JobConfig, pair: SoninePair, rhs: RhsSpec, n_max: int):
    """Reference solution at the nodes of every level's mesh.

    Classical kernels have a closed form. Otherwise a solve at twice the
    finest N serves as reference; graded meshes nest under doubling, so
    level nodes index directly into the fine solution.
    """
    if cfg.kernel.kind == "classical":
        def ref(mesh):
            return classical_solution(cfg.kernel.alpha, cfg.rhs_coeffs, mesh.nodes[1:])

        return ref
    fine_mesh = graded_mesh(2 * n_max, cfg.r, cfg.kernel.b)
    fine = solve_first_kind(pair, rhs, fine_mesh)

    def ref(mesh, _fine=fine, _n=2 * n_max):
        stride = _n // mesh.N
        return _fine.u.values[stride::stride]

    return ref


def _run_converge(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    rhs = RhsSpec.from_polynomial(cfg.rhs_coeffs)
    n_levels = [cfg.N // (2**i) for i in reversed(range(CONVERGE_LEVELS))]
    if n_levels[0] < 2:
        raise DomainError(
            f"mesh.N={cfg.N} is too small for {CONVERGE_LEVELS} halvings; need N >= "
            f"{2 ** CONVERGE_LEVELS}"
        )
    if cfg.N % (2 ** (CONVERGE_LEVELS - 1)) != 0:
        raise DomainError(
            f"mesh.N={cfg.N} must be divisible by {2 ** (CONVERGE_LEVELS - 1)} "
            "so convergence meshes nest"
        )
    ref = _converge_reference(cfg, pair, rhs, n_levels[-1])
    b = cfg.kernel.b
    errs = []
    for n in n_levels:
        mesh = graded_mesh(n, cfg.r, b)
        rep = solve_first_kind(pair, rhs, mesh)
        uref = ref(mesh)
        window = mesh.nodes[1:] >= b / 10.0
        rel = np.abs(rep.u.values[1:][window] - uref[window]) / np.maximum(
            np.abs(uref[window]), 1e-300
        )
        errs.append(float(np.max(rel)))
    orders = [float("nan")]
    for prev, cur in zip(errs, errs[1:]):
        if cur <= ORDER_FLOOR:
            orders.append(float("inf"))
        elif prev <= ORDER_FLOOR:
            orders.append(float("nan"))
        else:
            orders.append(math.log2(prev / cur))
    live = [(n, e) for n, e in zip(n_levels, errs) if e > ORDER_FLOOR]
    if len(live) < 2:
        fitted = float("inf")  # converged to roundoff at (almost) every level
    else:
        x = np.log2([n for n, _ in live])
        y = np.log2([e for _, e in live])
        fitted = -float(np.polyfit(x, y, 1)[0])
    rows = [[n, b / n, e, o] for n, e, o in zip(n_levels, errs, orders)]
    extra = {"fitted_order": fitted}
    path = _emit(cfg, ["N", "h", "max_err", "order"], rows, extra)
    print(f"order={_fmt(fitted)} finest_err={_fmt(errs[-1])} -> {path}")
    return (0 if fitted >= cfg.tolerances["min_order"] else 2), path


def _run_stability(cfg: JobConfig) -> tuple[int, str]:
    pair = _build_pair(cfg.kernel)
    mesh = graded_mesh(cfg.N, cfg.r, cfg.kernel.b)
    rhs = RhsSpec.from_polynomial(cfg.rhs_coeffs)
    delta = cfg.tolerances["delta"]
    report = check_gsc(pair, mesh)
    shifted = RhsSpec.from_polynomial(
        (cfg.rhs_coeffs[0] + delta,) + cfg.rhs_coeffs[1:]
    )
    base = solve_first_kind(pair, rhs, mesh, gsc=report)
    moved = solve_first_kind(pair, shifted, mesh, gsc=report)
    du = np.abs(moved.u.values[1:] - base.u.values[1:])
    dF = np.abs(moved.F.values[1:] - base.F.values[1:])
    max_shift = float(np.max(du))
    bound = math.exp(report.gprime_l1) * float(np.max(dF))
    rows = [[delta, max_shift, report.gprime_l1, bound]]
    extra = {"holds": bool(max_shift <= bound * (1.0 + 1e-12))}
    path = _emit(cfg, ["delta", "max_shift", "gprime_l1", "bound"], rows, extra)
    print(
        f"max_shift={_fmt(max_shift)} bound={_fmt(bound)} "
        f"holds={str(extra['holds']).lower()} -> {path}"
    )
    return (0 if extra["holds"] else 2), path


_DISPATCH = {
    "verify-pair": _run_verify_pair,
    "compute-g": _run_compute_g,
    "solve": _run_solve,
    "discover": _run_discover,
    "converge": _run_converge,
    "stability": _run_stability,
}


def run(cfg: JobConfig) -> int:
    """Execute one validated job; returns the process exit status."""
    status, _ = _DISPATCH[cfg.command](cfg)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sonine-kit",
        description="Generalized Sonine condition analysis and first-kind "
        "Volterra solves on graded meshes.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON job document")
    parser.add_argument("--out", help="output file path (overrides config)")
    parser.add_argument(
        "--format", choices=("csv", "json"), help="output format (overrides config)"
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, but this tool reserves 2 for
        # tolerance failures: usage problems are plain errors
        return 0 if exc.code == 0 else 1
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if cfg.command != args.command:
            raise DomainError(
                f"config field 'command': {cfg.command!r} does not match the "
                f"command-line command {args.command!r}"
            )
        if args.out is not None:
            cfg = replace(cfg, out_path=args.out)
        if args.format is not None:
            cfg = replace(cfg, out_format=args.format)
        return run(cfg)
    except (
        DomainError,
        GscConditionError,
        IllConditionedSystemError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
