"""Command line: build -> solve -> SRE -> sweep -> fit -> verify -> bcft.

Exit codes: 0 success, 1 identity or computation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .bcft import (AMPLITUDES, casimir_energy, corner_exponent, g_factor_dirichlet,
                   g_factor_neumann, leading_weight)
from .clifford import conjugate_sum, from_gate_sequence, parse_gate_file
from .eigensolver import ground_state
from .fusion import all_identities
from .hamiltonians import build, build_named, parse_spec
from .pauli import StateVector
from .scaling import extract_defect_constant, fit, log_coefficient, read_sre_csv
from .sre import ghz_state, plus_state, sre, t_state

SWEEP_COLUMNS = ["L", "alpha", "sre", "energy", "gap", "status"]


class UsageError(Exception):
    pass


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# sre


def _state_for(name: str, L: int) -> StateVector:
    if name == "T":
        psi = t_state()
        for _ in range(L - 1):
            psi = psi.tensor(StateVector.basis(1))
        return psi
    if name == "plus":
        return plus_state(L)
    if name == "zero":
        return StateVector.basis(L)
    if name == "ghz":
        return ghz_state(L)
    raise UsageError(f"unknown built-in state {name!r}")


def _hamiltonian(cfg: dict, L: int):
    if cfg.get("named"):
        h = build_named(cfg["named"], L)
    else:
        spec = parse_spec(cfg.get("topology", "periodic"), cfg.get("lam", 1.0),
                          cfg.get("insert") or [])
        h = build(spec, L)
    if cfg.get("clifford_file"):
        gates = parse_gate_file(Path(cfg["clifford_file"]).read_text())
        h = conjugate_sum(from_gate_sequence(gates, L), h)
    return h


def sre_point(cfg: dict, L: int, alpha: float) -> dict:
    """One ``(L, alpha)`` record; raises on failure."""
    t0 = time.perf_counter()
    if cfg.get("state"):
        psi = _state_for(cfg["state"], L)
        energy = gap = None
        degenerate = False
    else:
        h = _hamiltonian(cfg, L)
        res = ground_state(h, seed=cfg.get("seed", 0), max_length=cfg.get("max_length", 14),
                           sector=cfg.get("sector"))
        if res.degenerate and not cfg.get("accept_degenerate") and cfg.get("sector") is None:
            raise RuntimeError(
                f"degenerate ground state at L={L} (gap {res.gap:.3e}); pass --sector or "
                "--accept-degenerate")
        psi, energy, gap, degenerate = res.ground, res.energy, res.gap, res.degenerate
    value = sre(psi, alpha, max_length=cfg.get("max_length", 14)).value
    if cfg.get("bits"):
        value /= math.log(2)
    return {"L": L, "alpha": alpha, "sre": value, "energy": energy, "gap": gap,
            "degenerate": degenerate, "units": "bits" if cfg.get("bits") else "nats",
            "wall_time": time.perf_counter() - t0}


def cmd_sre(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if len(args.L) != 1:
        raise UsageError("sre takes exactly one -L; use sweep for several sizes")
    rec = sre_point(cfg, args.L[0], args.alpha)
    rec.update({"config": cfg, "version": __version__})
    _emit(_dump(rec) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_worker(payload: tuple[dict, int, float]) -> dict:
    cfg, L, alpha = payload
    try:
        return sre_point(cfg, L, alpha) | {"status": "ok"}
    except Exception as exc:  # recorded in the row, not fatal for the sweep
        return {"L": L, "alpha": alpha, "sre": "", "energy": "", "gap": "",
                "status": f"error: {type(exc).__name__}: {exc}".replace("\n", " ")}


def _read_done(path: Path) -> tuple[dict, list[dict]]:
    done, rows = {}, []
    if not path.exists():
        return done, rows
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in reader:
            rows.append(row)
            if row.get("status") == "ok":
                done[(int(row["L"]), float(row["alpha"]))] = row
    return done, rows


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    sizes = sorted(set(args.L))
    if not sizes:
        raise UsageError("sweep needs at least one size")
    if not args.output:
        raise UsageError("sweep needs --output CSV")
    path = Path(args.output)
    done, old_rows = _read_done(path)
    todo = [(cfg, L, args.alpha) for L in sizes if (L, float(args.alpha)) not in done]
    if args.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            fresh = list(pool.map(_sweep_worker, todo))
    else:
        fresh = [_sweep_worker(t) for t in todo]
    merged: dict[tuple[int, float], dict] = {}
    for row in old_rows:
        merged[(int(row["L"]), float(row["alpha"]))] = row
    for row in fresh:
        merged[(int(row["L"]), float(row["alpha"]))] = row
    header = "# " + json.dumps({"version": __version__, "config": cfg}, sort_keys=True)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        w = csv.DictWriter(fh, SWEEP_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for key in sorted(merged):
            row = dict(merged[key])
            for col in ("sre", "energy", "gap"):
                if isinstance(row.get(col), float):
                    row[col] = repr(row[col])
            w.writerow(row)
    failed = [r for r in fresh if r["status"] != "ok"]
    for r in failed:
        print(f"L={r['L']}: {r['status']}", file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args: argparse.Namespace) -> int:
    data = read_sre_csv(args.csv, alpha=args.alpha)
    if args.window:
        lo, hi = args.window
        data = [(L, m) for L, m in data if lo <= L <= hi]
    if args.two_point_log:
        sizes = [L for L, _ in data if L % 2 == 0 and L // 2 in dict(data)]
        if args.sizes:
            sizes = args.sizes
        res = log_coefficient(data, sizes)
        report = res.to_dict() | {"slope": res.coef("lnL"), "slope_std_error": res.err("lnL"),
                                  "sizes": list(sizes)}
    else:
        basis = tuple(args.model.split(","))
        if args.shift is not None and "const" in basis:
            res = extract_defect_constant(data, args.shift, basis)
        else:
            res = fit(data, basis, shift=args.shift or 0)
        report = res.to_dict()
        if "const" in basis:
            report["constant_term"] = res.constant_term
    report.update({"config": _config(args), "version": __version__})
    _emit(_dump(report) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args: argparse.Namespace) -> int:
    if not args.all:
        raise UsageError("verify-fusion currently requires --all")
    if args.max_length < 4:
        raise UsageError("--max-length must be at least 4")
    reports = all_identities(args.max_length)
    out = [r.to_dict() for r in reports]
    _emit(_dump(out) + "\n", args.output)
    return 0 if all(r.holds for r in reports) else 1


# ---------------------------------------------------------------------------
# bcft


def cmd_bcft(args: argparse.Namespace) -> int:
    result: dict[str, Any] = {}
    if args.amplitude:
        fn = AMPLITUDES[args.amplitude]
        series = fn(args.qtilde, args.alpha, dps=args.dps)
        # geometric ladder qt, qt^2, ... feeds the slope extraction
        import mpmath
        with mpmath.workdps(args.dps):
            qs = [mpmath.mpf(args.qtilde) ** k for k in range(1, 5)]
            samples = [(q, fn(q, args.alpha, dps=args.dps).value) for q in qs]
        w = leading_weight(samples, 2 * args.alpha)
        result.update({"amplitude": args.amplitude, "alpha": args.alpha,
                       "value": mpmath.nstr(series.value, 20),
                       "truncation_bound": mpmath.nstr(series.truncation_bound, 5),
                       "h_estimate": w.h, "h_drift": w.drift,
                       "multiplicities": [[str(e), str(c)] for e, c in series.multiplicities(5)]})
    if args.corner:
        c, h = Fraction(args.corner[0]), Fraction(args.corner[2])
        t = _angle_over_pi(args.corner[1])
        if isinstance(t, Fraction):
            exact = corner_exponent(c, h=h, theta_over_pi=t)
            result["corner_exponent"] = float(exact)
            result["corner_exponent_exact"] = str(exact)
        else:
            result["corner_exponent"] = corner_exponent(float(c), t, float(h))
    if args.casimir:
        result["casimir_energy"] = casimir_energy(int(args.casimir[0]), float(args.casimir[1]))
    if args.g_dirichlet:
        result["g_dirichlet"] = g_factor_dirichlet(int(args.g_dirichlet[0]), float(args.g_dirichlet[1]))
    if args.g_neumann is not None:
        result["g_neumann"] = g_factor_neumann(args.g_neumann)
    if not result:
        raise UsageError("bcft needs --amplitude, --corner, --casimir, --g-dirichlet or --g-neumann")
    result.update({"config": _config(args), "version": __version__})
    _emit(_dump(result) + "\n", args.output)
    return 0


def _angle_over_pi(text: str) -> Fraction | float:
    """``pi/2``, ``2pi/3`` or ``pi`` give an exact multiple of pi; plain numbers are radians."""
    t = text.replace(" ", "").replace("π", "pi")
    if "pi" in t:
        num, _, den = t.partition("pi")
        num = num.rstrip("*") or "1"
        den = den.lstrip("/") or "1"
        try:
            return Fraction(num) / Fraction(den)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse angle {text!r}") from None
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


# ---------------------------------------------------------------------------
# parser


def _add_physics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", default="periodic", help="periodic or open:<A>,<B> (A,B in free/up/down)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="transverse field")
    p.add_argument("--insert", action="append", default=None,
                   help="defect insertion such as eta@(6,1) or duality@(1,2); repeatable")
    p.add_argument("--named", default=None, help="named Hamiltonian, e.g. D_D or T_minus")
    p.add_argument("--clifford-file", default=None, help="gate file conjugating the Hamiltonian")
    p.add_argument("--state", default=None, choices=["T", "plus", "zero", "ghz"],
                   help="use a built-in test state instead of a ground state")
    p.add_argument("-L", dest="L", type=int, action="append", default=None, help="system size")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sector", type=int, choices=[1, -1], default=None,
                   help="global spin-flip sector for degenerate ground states")
    p.add_argument("--accept-degenerate", action="store_true",
                   help="use the gauge-fixed Lanczos vector even if the ground state is degenerate")
    p.add_argument("--max-length", type=int, default=14)
    p.add_argument("--bits", action="store_true", help="report entropies in bits")
    p.add_argument("-o", "--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defectsre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="JSON file of defaults; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sre", help="SRE of one ground state or test state")
    _add_physics(p)
    p.set_defaults(func=cmd_sre)

    p = sub.add_parser("sweep", help="SRE over several sizes into a resumable CSV")
    _add_physics(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="finite-size fit of a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--model", default="L,const,invL", help="comma list from L,lnL,const,invL")
    p.add_argument("--shift", type=int, default=None, choices=[0, 1],
                   help="fit against L - shift (site removed by a fusion)")
    p.add_argument("--two-point-log", action="store_true", help="fit 2M(L/2)-M(L) against lnL")
    p.add_argument("--sizes", type=int, nargs="+", default=None)
    p.add_argument("--window", type=int, nargs=2, default=None, metavar=("LMIN", "LMAX"))
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify-fusion", help="check every defect movement and fusion identity")
    p.add_argument("--all", action="store_true")
    p.add_argument("--max-length", type=int, default=12)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bcft", help="boundary CFT oracle queries")
    p.add_argument("--amplitude", choices=sorted(AMPLITUDES), default=None)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--qtilde", default="1e-5")
    p.add_argument("--dps", type=int, default=40)
    p.add_argument("--corner", nargs=3, metavar=("C", "THETA", "H"), default=None,
                   help="corner exponent; THETA in radians or as a multiple of pi (pi/2)")
    p.add_argument("--casimir", nargs=2, metavar=("N", "L"), default=None)
    p.add_argument("--g-dirichlet", nargs=2, metavar=("N", "V0"), default=None)
    p.add_argument("--g-neumann", type=float, default=None, metavar="V0")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_bcft)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        defaults = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    if not isinstance(defaults, dict):
        parser.error("config file must hold a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
    if "lambda" in defaults:
        defaults["lam"] = defaults.pop("lambda")
    if isinstance(defaults.get("L"), int):
        defaults["L"] = [defaults["L"]]
    subparser = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _apply_config(parser, argv)
    if getattr(args, "L", None) is None and args.command in ("sre", "sweep"):
        parser.error("-L is required")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"defectsre: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # malformed specs and out-of-range inputs are usage errors
        print(f"defectsre: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, MemoryError) as exc:
        print(f"defectsre: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
