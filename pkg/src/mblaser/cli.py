"""Command-line interface binding the modules into reproducible runs.

Exit codes: 0 success, 2 validation/usage error, 3 numeric failure (including
a failing acceptance criterion in ``verify-all``).  Outputs carry no
timestamps, so re-running with the same config and seed reproduces them
byte for byte.  Set MBLASER_THREADS to pin the BLAS/OpenMP thread count.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional

import numpy as np


def _apply_thread_env() -> None:
    n = os.environ.get("MBLASER_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


_apply_thread_env()

from . import kernels  # noqa: E402
from .config import RunConfig, load_config, paper_preset  # noqa: E402
from .dynamics import simulate_trajectory  # noqa: E402
from .ensemble import sum_S, sum_Sigma  # noqa: E402
from .errors import CapacityError, NumericsError, ValidationError  # noqa: E402
from .model import ground_state  # noqa: E402
from .poincare import poincare_analytic, poincare_numeric  # noqa: E402
from .spectrum import (assemble_blocks, resonance_verdict,  # noqa: E402
                       threshold_scan)
from .verify import run_all  # noqa: E402


def _load(args) -> RunConfig:
    if getattr(args, "paper_constants", False):
        cfg = paper_preset(seed=args.seed if args.seed is not None else 0)
        return cfg
    if not args.config:
        raise ValidationError("missing --config (or use --paper-constants)")
    return load_config(args.config, seed_override=args.seed)


def _write_json(path: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(v.real), float(v.imag)] for v in obj]
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ensemble(args) -> int:
    cfg = _load(args)
    e = cfg.build_ensemble()
    s_rep = sum_S(e)
    sig_rep = sum_Sigma(e)
    summary = {
        "config": cfg.describe(),
        "S": {"empirical": s_rep.empirical, "analytic": s_rep.analytic,
              "std_error": s_rep.std_error, "ratio": s_rep.ratio},
        "Sigma": {"empirical": sig_rep.empirical, "analytic": sig_rep.analytic,
                  "std_error": sig_rep.std_error, "ratio": sig_rep.ratio},
        "n": e.n,
    }
    if args.out and args.out.endswith(".csv"):
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# S_empirical={s_rep.empirical!r} S_analytic={s_rep.analytic!r}\n")
            fh.write(f"# Sigma_empirical={sig_rep.empirical!r} "
                     f"Sigma_analytic={sig_rep.analytic!r}\n")
            writer = csv.writer(fh)
            writer.writerow(["n", "alpha", "beta", "gamma"])
            for i in range(e.n):
                writer.writerow([i, repr(float(e.alpha[i])), repr(float(e.beta[i])),
                                 repr(float(e.gamma[i]))])
        print(f"wrote {args.out}")
    else:
        summary["molecules"] = {
            "alpha": e.alpha, "beta": e.beta, "gamma": e.gamma,
        }
        _write_json(args.out, summary)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    e = cfg.build_ensemble()
    state0 = ground_state(e.n)
    t, a, b, energy, inv = simulate_trajectory(
        state0, args.periods, e, cfg.kappa, cfg.settings,
        samples_per_period=args.samples_per_period)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "a", "b", "energy", "mean_inversion"])
        for row in zip(t, a, b, energy, inv):
            writer.writerow([repr(float(v)) for v in row])
    print(f"wrote {args.out}")
    return 0


def cmd_poincare(args) -> int:
    cfg = _load(args)
    e = cfg.build_ensemble()
    rng = np.random.default_rng(cfg.seed)
    eps = args.epsilon
    z0 = eps * rng.uniform(0.2, 1.0, e.n) * np.exp(2j * np.pi * rng.uniform(size=e.n))
    a0, b0 = (eps * rng.uniform(-1, 1, 2))
    payload = {"config": cfg.describe(), "epsilon": eps,
               "initial": {"a": a0, "b": b0, "z": z0}}
    out_n = out_a = None
    if args.mode in ("numeric", "both"):
        from .model import lift_state, ReducedState
        state0 = lift_state(ReducedState(a=a0, b=b0, z=z0))
        out_n = poincare_numeric(state0, e, cfg.kappa, cfg.settings)
        payload["numeric"] = {"a": out_n.a, "b": out_n.b, "z": out_n.z}
    if args.mode in ("analytic", "both"):
        out_a = poincare_analytic(a0, b0, z0, e, cfg.kappa)
        payload["analytic"] = {"a": out_a.a, "b": out_a.b, "z": out_a.z}
    if args.mode == "both":
        payload["discrepancy"] = {
            "a": abs(out_n.a - out_a.a), "b": abs(out_n.b - out_a.b),
            "z": np.abs(out_n.z - out_a.z),
            "z_max": float(np.max(np.abs(out_n.z - out_a.z))),
        }
    _write_json(args.out, payload)
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    e = cfg.build_ensemble()
    bd = assemble_blocks(e, cfg.kappa, d_variant=args.d_variant)
    rep = resonance_verdict(bd, method=args.method, verdict_tol=cfg.verdict_tol)
    payload = {
        "config": cfg.describe(),
        "method": rep.method,
        "d_variant": args.d_variant,
        "S": bd.S,
        "gamma_sq_sum": bd.gamma_sq_sum,
        "max_abs_mu": rep.max_abs_mu,
        "resonance": rep.resonance,
        "multipliers": rep.multipliers,
        # None marks roots standing in for the molecular cluster, which carry
        # no back-substituted eigenvector
        "maxwell_components": [float(c) if np.isfinite(c) else None
                               for c in rep.maxwell_components],
        "roots_near_one": rep.roots_near_one,
    }
    if rep.polynomial_roots is not None:
        payload["polynomial_roots"] = rep.polynomial_roots
    if rep.cross_discrepancy is not None:
        payload["cross_method_max_gap"] = rep.cross_discrepancy
    _write_json(args.out, payload)
    return 0


def cmd_threshold_scan(args) -> int:
    cfg = _load(args)
    e = cfg.build_ensemble()
    if args.pump_min <= 0 or args.pump_max <= args.pump_min:
        raise ValidationError("need 0 < pump-min < pump-max")
    grid = np.geomspace(args.pump_min, args.pump_max, args.steps)
    points = threshold_scan(e, cfg.kappa, grid)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pump_amplitude", "max_abs_mu", "resonance",
                         "maxwell_component_min"])
        for p in points:
            writer.writerow([repr(float(p.pump_amplitude)), repr(float(p.max_abs_mu)),
                             int(p.resonance), repr(float(p.maxwell_floor))])
    flips = sum(1 for i in range(1, len(points))
                if points[i].resonance != points[i - 1].resonance)
    print(f"wrote {args.out} ({flips} verdict flip(s))")
    return 0


def cmd_verify_integrals(args) -> int:
    kap = args.kappa
    kc = kernels.constants_AB(kap)
    oracle = kernels.constants_AB_oracle(kap)
    tol = 10.0 * kap ** 2 + 1e-10
    rows = []
    closed = {"A1": kc.A1, "A2": kc.A2, "A3": kc.A3,
              "B1": kc.B1, "B2": kc.B2, "B3": kc.B3}
    for name, val in closed.items():
        gap = abs(val - oracle[name])
        rows.append({"name": name, "closed": complex(val),
                     "oracle": complex(oracle[name]), "abs_gap": gap,
                     "tol": tol, "pass": bool(gap <= tol)})
    j1o, j2o = kernels.constants_J_oracle(kap)
    jtol = 10.0 * kap ** 2 + 1e-9
    for name, val, orc in (("J1", kc.J1, j1o), ("J2", kc.J2, j2o)):
        gap = abs(val - orc)
        rows.append({"name": name, "closed": complex(val), "oracle": complex(orc),
                     "abs_gap": gap, "tol": jtol, "pass": bool(gap <= jtol)})
    all_pass = all(r["pass"] for r in rows)
    if args.json:
        _write_json(None, {"kappa": kap, "rows": rows, "all_pass": all_pass})
    else:
        print(f"kappa = {kap:g}   tolerance = 10 kappa^2 + 1e-10")
        print(f"{'name':<4} {'closed':>28} {'oracle':>28} {'|gap|':>11} pass")
        for r in rows:
            c, o = r["closed"], r["oracle"]
            print(f"{r['name']:<4} {c.real:>13.9f}{c.imag:>+14.9f}j "
                  f"{o.real:>13.9f}{o.imag:>+14.9f}j {r['abs_gap']:>11.2e} "
                  f"{'yes' if r['pass'] else 'NO'}")
    return 0 if all_pass else 3


def cmd_verify_all(args) -> int:
    results = run_all()
    return 0 if all(r.passed for r in results) else 3


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mblaser",
        description="Maxwell-Bloch parametric-resonance laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--paper-constants", action="store_true",
                       help="use the built-in ruby preset instead of a config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        if needs_out:
            p.add_argument("--out", required=False, default=None,
                           help="output path (stdout when omitted)")

    p = sub.add_parser("ensemble", help="sample molecules, dump couplings and sums")
    add_common(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("simulate", help="integrate the full system, stream CSV")
    add_common(p, needs_out=False)
    p.add_argument("--periods", type=float, default=1.0)
    p.add_argument("--samples-per-period", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("poincare", help="one period-map application")
    add_common(p)
    p.add_argument("--mode", choices=["numeric", "analytic", "both"],
                   default="both")
    p.add_argument("--epsilon", type=float, default=1e-4,
                   help="perturbation size of the sampled initial point")
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("spectrum", help="multipliers and resonance verdict")
    add_common(p)
    p.add_argument("--method", choices=["polynomial", "dense", "both"],
                   default="both")
    p.add_argument("--d-variant", choices=["identity", "gamma"],
                   default="gamma", dest="d_variant")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("threshold-scan", help="sweep the pumping amplitude")
    add_common(p, needs_out=False)
    p.add_argument("--pump-min", type=float, required=True)
    p.add_argument("--pump-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_threshold_scan)

    p = sub.add_parser("verify-integrals",
                       help="closed forms vs quadrature oracle table")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_integrals)

    p = sub.add_parser("verify-all", help="run the full acceptance suite")
    add_common(p, needs_out=False)
    p.set_defaults(func=cmd_verify_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValidationError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
