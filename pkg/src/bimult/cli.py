"""Command-line front end.

Every command writes one JSON report ``{command, params, results, timings,
seed}`` (``results`` is deterministic given the parameters and seed) and,
where a table exists, a CSV file next to it.  The output directory defaults
to ``$BIMULT_OUTPUT_DIR`` or the working directory.

Exit codes: 0 success, 1 failed verification checks, 2 usage error,
3 numerical guard violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .bumps import ResolutionError
from .counterexamples import (FAMILIES, FitError, FamilySpec, RademacherDraw,
                              bump_symbol_hormander, bump_symbol_sobolev, scaling_sweep)
from .grid import GridError, SPACE, SampledFunction, TorusGrid, lp_norm
from .multiplier import (SizeGuardError, SupportMarginError, Symbol, apply_bilinear,
                         symbol_grid)
from .norms import CoverageError, MarginError

__all__ = ["main", "build_parser", "run"]

ENV_OUTPUT = "BIMULT_OUTPUT_DIR"
GUARD_ERRORS = (SupportMarginError, ResolutionError, MarginError, CoverageError,
                SizeGuardError)


class UsageError(ValueError):
    """Invalid parameters caught before any computation."""


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bimult", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, L=8.0, M=256, grid=True):
        if grid:
            p.add_argument("--L", type=float, default=L, help="torus length")
            p.add_argument("--M", type=int, default=M, help="points per axis")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None,
                       help="JSON report path ('-' for stdout only)")
        p.add_argument("--csv", default=None, help="CSV table path")

    p = sub.add_parser("apply", help="apply a bilinear multiplier to stored or random operands")
    common(p, L=8.0, M=256)
    p.add_argument("--symbol", default="constant-one",
                   choices=["constant-one", "bump", "lacunary"])
    p.add_argument("--index", type=int, default=0, help="member of the symbol family")
    p.add_argument("--f", default=None, help=".npy file of spatial samples of f")
    p.add_argument("--g", default=None, help=".npy file of spatial samples of g")
    p.add_argument("--output", default=None, help=".npy file for T(f, g)")
    p.add_argument("--no-strict", action="store_true", help="skip the Nyquist margin guard")

    p = sub.add_parser("norms", help="Sobolev and Hormander norms of a test symbol")
    common(p, L=8.0, M=256)
    p.add_argument("--symbol", default="bump", choices=["bump", "lacunary"])
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--s", type=float, default=0.75)

    p = sub.add_parser("decompose", help="level-set decomposition ratios of a test symbol")
    common(p, L=8.0, M=1024)
    p.add_argument("--symbol", default="lacunary", choices=["bump", "lacunary"])
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--s", type=float, default=0.75)
    p.add_argument("--lam", type=_ints, default=[1, 2, 3])
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--order", type=int, default=6, help="Daubechies order")

    for name, helptext in (("counterexample", "norms of one random-sign instance"),
                           ("sweep", "Monte-Carlo scaling sweep with fitted exponents")):
        p = sub.add_parser(name, help=helptext)
        common(p, grid=False)
        p.add_argument("--cells", type=int, default=None,
                       help="operand torus length in units of N (default 16 wide, 256 narrow)")
        p.add_argument("--family", default="bilinear_sigmaN", choices=FAMILIES)
        if name == "sweep":
            p.add_argument("--N", type=_ints, default=[8, 16, 32])
            p.add_argument("--S", type=int, default=16)
            p.add_argument("--hormander", action="store_true")
            p.add_argument("--no-sobolev", action="store_true")
        else:
            p.add_argument("--N", type=int, default=16)
        p.add_argument("--m", type=int, default=2)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--p", type=float, default=1.0)
        p.add_argument("--p1", type=float, default=2.0)
        p.add_argument("--p2", type=float, default=2.0)
        p.add_argument("--p3", type=float, default=2.0)
        p.add_argument("--r", type=float, default=2.0)
        p.add_argument("--s", type=float, default=0.5)
        p.add_argument("--mode", default="wide", choices=["wide", "narrow"])
        p.add_argument("--lattice", action="store_true",
                       help="one-bin-per-bump lattice model (L = N, M = 32)")

    p = sub.add_parser("verify", help="run a self-check suite")
    common(p, grid=False)
    p.add_argument("--suite", default="all",
                   choices=["all", "grid", "bumps", "multiplier", "wavelets"])
    return ap


# -- validation ----------------------------------------------------------------

def _validate(a) -> None:
    if hasattr(a, "M"):
        if a.M < 4 or a.M % 2:
            raise UsageError(f"--M must be an even integer >= 4, got {a.M}")
        if not a.L > 0:
            raise UsageError(f"--L must be positive, got {a.L}")
    if getattr(a, "cells", None) is not None and a.cells < 1:
        raise UsageError(f"--cells must be positive, got {a.cells}")
    if hasattr(a, "r") and not a.r > 1:
        raise UsageError(f"--r must exceed 1, got {a.r}")
    if hasattr(a, "s") and a.s < 0:
        raise UsageError(f"--s must be nonnegative, got {a.s}")
    if a.command in ("counterexample", "sweep"):
        Ns = a.N if isinstance(a.N, list) else [a.N]
        if any(N < 1 for N in Ns):
            raise UsageError("--N values must be positive")
        if a.command == "sweep":
            if len(Ns) < 3:
                raise UsageError("--N needs at least 3 values for an exponent fit")
            if a.S < 1:
                raise UsageError(f"--S must be positive, got {a.S}")
        if a.m not in (2, 3):
            raise UsageError(f"--m must be 2 or 3, got {a.m}")
        if a.family == "bilinear_sigmaN" and a.m != 2:
            raise UsageError("bilinear_sigmaN needs --m 2")
        if a.m == 3 and a.family != "single_bump" and not a.lattice:
            raise UsageError("m = 3 runs use the brute-force path; add --lattice")
        if a.k is not None and not 0 <= a.k <= a.m:
            raise UsageError(f"--k must lie in [0, m], got {a.k}")
        if min(a.p, a.p1, a.p2, a.p3) <= 0:
            raise UsageError("exponents must be positive")
    if a.command == "decompose":
        if not a.lam or min(a.lam) < 1:
            raise UsageError("--lam needs levels >= 1")
        if a.trials < 1:
            raise UsageError("--trials must be positive")
    if a.command in ("norms", "decompose", "apply") and getattr(a, "symbol", None) != "constant-one":
        if not 0 <= a.index < 5:
            raise UsageError(f"--index must be in 0..4, got {a.index}")


# -- commands ------------------------------------------------------------------

def _family_symbol(name: str, grid: TorusGrid, index: int, s: float = 0.75) -> Symbol:
    from .families import bump_family, lacunary_family
    if name == "bump":
        return bump_family(grid)[index]
    return lacunary_family(grid, s)[index]


def _cmd_apply(a) -> tuple:
    grid = TorusGrid(1, a.L, a.M)
    rng = np.random.default_rng(a.seed)

    def load(path):
        if path is None:
            return rng.normal(size=a.M) + 1j * rng.normal(size=a.M)
        v = np.load(path)
        if v.shape != (a.M,):
            raise UsageError(f"{path}: expected {a.M} samples, got shape {v.shape}")
        return v

    f = SampledFunction(grid, load(a.f), SPACE)
    g = SampledFunction(grid, load(a.g), SPACE)
    sg = symbol_grid(grid)
    if a.symbol == "constant-one":
        sigma = Symbol(sg, np.ones(sg.shape))
        strict = False
    else:
        sigma = _family_symbol(a.symbol, sg, a.index)
        strict = not a.no_strict
    T = apply_bilinear(sigma, f, g, strict=strict)
    if a.output:
        np.save(a.output, T.values)
    prod = f.values * g.values
    res = {"L1": lp_norm(T, 1), "L2": lp_norm(T, 2), "Linf": lp_norm(T, np.inf),
           "strict": strict, "output_file": a.output}
    if a.symbol == "constant-one":
        res["max_abs_diff_from_product"] = float(np.abs(T.values - prod).max())
    return res, None


def _cmd_norms(a) -> tuple:
    from .norms import hormander_norm, tl_norm
    sg = TorusGrid(2, a.L, a.M)
    sigma = _family_symbol(a.symbol, sg, a.index, a.s)
    rep = hormander_norm(sigma, a.r, a.s)
    res = rep.to_dict()
    res["triebel_lizorkin_q2"] = tl_norm(sigma, a.r, 2.0, a.s)
    return res, None


def _cmd_decompose(a) -> tuple:
    from .decomposition import CSV_COLUMNS, annulus_test_function, decomposition_sweep
    from .norms import sobolev_norm
    from .wavelets import build_system
    sg = TorusGrid(2, a.L, a.M)
    op = TorusGrid(1, a.M / a.L, a.M)
    sigma = _family_symbol(a.symbol, sg, a.index, a.s)
    ws = build_system(a.order)
    rng = np.random.default_rng(a.seed)
    pairs = [(annulus_test_function(op, rng), annulus_test_function(op, rng))
             for _ in range(a.trials)]
    sob = sobolev_norm(sigma, a.r, a.s)
    recs = decomposition_sweep(sigma, ws, a.lam, a.r, a.s, sob, pairs)
    per_lam = {}
    for rec in recs:
        d = per_lam.setdefault(str(rec.lam), {"ratio_rows": 0.0, "ratio_cols": 0.0,
                                              "ratio_imp": 0.0, "pieces": 0})
        for key in ("ratio_rows", "ratio_cols", "ratio_imp"):
            d[key] = max(d[key], getattr(rec, key))
        d["pieces"] += 1
    res = {"sobolev": sob, "per_lambda_max": per_lam}
    return res, (CSV_COLUMNS, [r.row() for r in recs])


def _p_inputs(a) -> list:
    return [a.p1, a.p2, a.p3][: a.m]


def _cmd_counterexample(a) -> tuple:
    k = a.k
    spec = FamilySpec(a.family, a.N, a.m, k, a.mode, not a.lattice, a.cells)
    draw = RademacherDraw.for_task(a.seed, a.N, 0)
    inst = spec.build(draw)
    inst.check_invariants(draw)
    res = {"N": a.N, "family": a.family, "c_window": list(inst.c_window),
           "T_Lp": lp_norm(inst.output(), a.p),
           "input_norms": inst.input_norms(_p_inputs(a))}
    if inst.m == 2:
        res["sobolev"] = bump_symbol_sobolev(inst.symbol, a.r, a.s)
        res["hormander"] = bump_symbol_hormander(inst.symbol, a.r, a.s).to_dict()
    return res, None


def _cmd_sweep(a) -> tuple:
    from .counterexamples import CSV_COLUMNS
    rep = scaling_sweep(a.family, a.N, a.S, a.p, _p_inputs(a), a.m, a.k, a.r, a.s,
                        a.seed, a.mode, not a.lattice, sobolev=not a.no_sobolev and a.m == 2,
                        hormander=a.hormander, cells=a.cells)
    return rep.to_dict(), (CSV_COLUMNS, rep.csv_rows())


def _cmd_verify(a) -> tuple:
    from .suites import run_suite
    checks = run_suite(a.suite, a.seed)
    res = {"suite": a.suite, "checks": [c.to_dict() for c in checks],
           "all_passed": all(c.passed for c in checks)}
    return res, None


COMMANDS = {
    "apply": _cmd_apply,
    "norms": _cmd_norms,
    "decompose": _cmd_decompose,
    "counterexample": _cmd_counterexample,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


# -- driver --------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _params(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items()) if k not in ("out", "csv")}


def _out_path(a) -> Path:
    if a.out:
        return Path(a.out)
    base = Path(os.environ.get(ENV_OUTPUT, "."))
    return base / f"{a.command}.json"


def run(args) -> int:
    """Execute a parsed command; returns the exit status."""
    t0 = time.perf_counter()
    try:
        _validate(args)
        results, table = COMMANDS[args.command](args)
    except (UsageError, GridError, FitError) as exc:
        _error("usage", exc)
        return 2
    except GUARD_ERRORS as exc:
        _error("guard", exc)
        return 3
    report = {"command": args.command, "params": _clean(_params(args)),
              "results": _clean(results), "seed": args.seed,
              "timings": {"total_seconds": time.perf_counter() - t0}}
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out == "-":
        print(text)
    else:
        path = _out_path(args)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        print(f"wrote {path}")
    if table is not None:
        cols, rows = table
        cpath = Path(args.csv) if args.csv else (None if args.out == "-" else
                                                 _out_path(args).with_suffix(".csv"))
        if cpath is not None:
            with open(cpath, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(cols)
                w.writerows(_clean(rows))
            print(f"wrote {cpath}")
    if args.command == "verify" and not results["all_passed"]:
        return 1
    return 0


def _error(kind: str, exc: Exception) -> None:
    rec = {"error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
