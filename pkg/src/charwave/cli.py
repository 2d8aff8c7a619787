"""Command-line front end.

Subcommands::

    charwave solve    problem.json -o out.csv
    charwave classify problem.json
    charwave verify   problem.json
    charwave converge problem.json --levels 3

Exit codes: 0 success (or all checks passed), 1 configuration or expression
error, 2 interior iteration failed to converge, 3 verification failed.

The problem file is strict JSON with exactly these keys::

    {
      "a": 1.0, "x0": 0.0, "A": 1.0,
      "phi1": "0", "phi2": "1",
      "psi1": "0", "psi2": "0",
      "F": "0", "f": "0",
      "lipschitz": 0.0,                      # optional
      "window": {"T": 1.5, "xmin": -3.0, "xmax": 3.0},
      "grid": {"nt": 128},
      "picard": {"tol": 1e-10, "max_iter": 64}   # optional
    }

Unknown keys anywhere are rejected.  CSV output has the header
``t,x,region,u,ut,ux`` with rows ordered by time then by x, every float
printed with 17 significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import expr as ex
from .assembly import classify_case, generalized_dalembert_holds, sample_user_grid, solve
from .cauchy import GridParams, PicardParams, ProblemSpec
from .errors import ConfigError, ExpressionError, NonConvergence, NotLinear
from .verify import check_definition1, convergence_study

__all__ = ["main", "load_config", "write_csv"]


_TOP_KEYS = {
    "a", "x0", "A", "phi1", "phi2", "psi1", "psi2", "F", "f",
    "lipschitz", "window", "grid", "picard",
}
_REQUIRED = _TOP_KEYS - {"lipschitz", "picard"}
_WINDOW_KEYS = {"T", "xmin", "xmax"}
_GRID_KEYS = {"nt"}
_PICARD_KEYS = {"tol", "max_iter"}
_EXPR_KEYS = ("phi1", "phi2", "psi1", "psi2", "F", "f")


def _num(cfg: dict, key: str, where: str = "") -> float:
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"key {where}{key!r} must be a number, got {type(val).__name__}")
    return float(val)


def _int(cfg: dict, key: str, where: str = "") -> int:
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"key {where}{key!r} must be an integer, got {type(val).__name__}")
    return val


def _check_keys(cfg: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(sorted(missing))}")


def load_config(path: str) -> tuple[ProblemSpec, GridParams, PicardParams]:
    """Parse and validate a problem file; raises ConfigError on any defect."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    _check_keys(cfg, _TOP_KEYS, _REQUIRED, "problem file")
    for key in _EXPR_KEYS:
        if not isinstance(cfg[key], str):
            raise ConfigError(f"key {key!r} must be an expression string")
    _check_keys(cfg["window"], _WINDOW_KEYS, _WINDOW_KEYS, "'window'")
    _check_keys(cfg["grid"], _GRID_KEYS, _GRID_KEYS, "'grid'")
    pic_cfg = cfg.get("picard", {})
    _check_keys(pic_cfg, _PICARD_KEYS, set(), "'picard'")

    lip = None
    if "lipschitz" in cfg:
        lip = _num(cfg, "lipschitz")
    spec = ProblemSpec.from_strings(
        a=_num(cfg, "a"),
        x0=_num(cfg, "x0"),
        A=_num(cfg, "A"),
        phi1=cfg["phi1"],
        phi2=cfg["phi2"],
        psi1=cfg["psi1"],
        psi2=cfg["psi2"],
        F=cfg["F"],
        f=cfg["f"],
        lipschitz=lip,
    )
    grid = GridParams(
        T=_num(cfg["window"], "T", "window."),
        x_lo=_num(cfg["window"], "xmin", "window."),
        x_hi=_num(cfg["window"], "xmax", "window."),
        nt=_int(cfg["grid"], "nt", "grid."),
    )
    defaults = PicardParams()
    picard = PicardParams(
        tol=_num(pic_cfg, "tol", "picard.") if "tol" in pic_cfg else defaults.tol,
        max_iter=_int(pic_cfg, "max_iter", "picard.") if "max_iter" in pic_cfg else defaults.max_iter,
    )
    return spec, grid, picard


def write_csv(sol, path: str) -> None:
    times, xs, region, u, p, q = sample_user_grid(sol)
    lines = ["t,x,region,u,ut,ux"]
    for i in range(len(times)):
        for j in range(len(xs)):
            lines.append(
                "%.17g,%.17g,%d,%.17g,%.17g,%.17g"
                % (times[i], xs[j], region[i, j], u[i, j], p[i, j], q[i, j])
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# Subcommands


def _cmd_solve(args) -> int:
    spec, grid, picard = load_config(args.config)
    sol = solve(spec, grid, picard)
    write_csv(sol, args.output)
    iters = [max(sol.field1.report.iterations), max(sol.field2.report.iterations),
             max(sol.field3.report.iterations)]
    if args.json:
        print(json.dumps({
            "output": args.output,
            "case": sol.case.value,
            "iterations": iters,
            "lipschitz": sol.diagnostics.lipschitz,
        }))
    else:
        print(f"wrote {args.output}")
        print(f"case: {sol.case.value}")
        print(f"iterations (left, right, wedge): {iters[0]}, {iters[1]}, {iters[2]}")
    return 0


def _cmd_classify(args) -> int:
    spec, _, _ = load_config(args.config)
    case = classify_case(spec)
    p1 = float(ex.evaluate(spec.phi1, {"x": spec.x0}))
    p2 = float(ex.evaluate(spec.phi2, {"x": spec.x0}))
    left = spec.A - p1
    right = p2 - spec.A
    gd = generalized_dalembert_holds(spec)
    if args.json:
        print(json.dumps({
            "case": case.value,
            "phi1_at_x0": p1,
            "phi2_at_x0": p2,
            "A": spec.A,
            "left_jump_constant": left,
            "right_jump_constant": right,
            "generalized_dalembert": gd,
        }))
    else:
        print(f"case: {case.value}")
        print(f"phi1(x0) = {p1:.17g}")
        print(f"phi2(x0) = {p2:.17g}")
        print(f"A = {spec.A:.17g}")
        print(f"left jump constant  (A - phi1(x0)) = {left:.17g}")
        print(f"right jump constant (phi2(x0) - A) = {right:.17g}")
        print(f"generalized d'Alembert: {'yes' if gd else 'no'}")
    return 0


def _cmd_verify(args) -> int:
    spec, grid, picard = load_config(args.config)
    sol = solve(spec, grid, picard)
    report = check_definition1(sol)
    if args.json:
        print(json.dumps(report.to_dict()))
    else:
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{c.name:16s} {status}  measured={c.measured:.6e}  tol={c.tolerance:.6e}")
        for name, val in report.info:
            print(f"{name:20s} (reported) {val:.6e}")
        print(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 3


def _cmd_converge(args) -> int:
    spec, grid, picard = load_config(args.config)
    if args.reference is not None:
        reference: object = ex.parse(args.reference, ("t", "x"))
    else:
        reference = "oracle"
    study = convergence_study(
        spec, grid, picard, reference=reference, levels=args.levels
    )
    if args.json:
        print(json.dumps(study.to_dict()))
    else:
        for e in study.entries:
            print(f"nt={e.nt:6d}  h={e.h:.6e}  err={e.err:.6e}")
        print("order: exact" if study.exact else f"order: {study.order:.3f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="charwave",
        description="piecewise-classical solver for the 1-D quasilinear wave "
        "equation with initial data jumping at one point",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve and write the sampled field as CSV")
    p_solve.add_argument("config")
    p_solve.add_argument("-o", "--output", required=True, help="output CSV path")
    p_solve.add_argument("--json", action="store_true", help="machine-readable summary")
    p_solve.set_defaults(func=_cmd_solve)

    p_cls = sub.add_parser("classify", help="report the discontinuity case without solving")
    p_cls.add_argument("config")
    p_cls.add_argument("--json", action="store_true")
    p_cls.set_defaults(func=_cmd_classify)

    p_ver = sub.add_parser("verify", help="solve and audit the defining conditions")
    p_ver.add_argument("config")
    p_ver.add_argument("--json", action="store_true")
    p_ver.set_defaults(func=_cmd_verify)

    p_con = sub.add_parser("converge", help="grid refinement study against a reference")
    p_con.add_argument("config")
    p_con.add_argument("--levels", type=int, default=3)
    p_con.add_argument(
        "--reference",
        default=None,
        help="expression in t,x used as the reference; defaults to the "
        "closed-form quadrature (requires f = 0)",
    )
    p_con.add_argument("--json", action="store_true")
    p_con.set_defaults(func=_cmd_converge)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExpressionError, NotLinear) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NonConvergence as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
