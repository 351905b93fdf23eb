"""Command-line interface: ``switchgrowth <command> [flags]``.

Every command writes its data files plus a ``run.json`` record into ``--out``.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .baire import (DEFAULT_MARGIN_FACTOR, DEFAULT_Q_MAX, E1, E2, CertificateChain,
                    ConstructionError, GrowthTarget, construct, verify)
from .classify import Kind, SlopeCertificate, StabilityCertificate, classify
from .core import RationalAngle, SystemParams
from .growth import BRUTE_FORCE_MAX_T, DEFAULT_PRUNE_TOL, brute_force, growth_series
from .records import (GROWTH_COLUMNS, ORACLE_COLUMNS, SWEEP_COLUMNS, RunRecord, ensure_dir,
                      growth_rows, read_json, write_csv, write_json)
from .sequences import SequenceSyntaxError

log = logging.getLogger("switchgrowth")

ORACLE_TOL = 1e-9
DEFAULT_ORACLE_T = 12

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers like '0,1', got {text!r}")
    return x, y


def _add_params(p: argparse.ArgumentParser, angle: bool = True):
    g = p.add_argument_group("system parameters")
    g.add_argument("--lambda", dest="lam", type=float, default=0.0, help="A0 eigenvalue, |lambda| < 1")
    if angle:
        g.add_argument("--theta", type=float, help="rotation angle in radians")
        g.add_argument("--p", type=int, help="numerator of theta = p*pi/q")
        g.add_argument("--q", type=int, help="denominator of theta = p*pi/q")
    g.add_argument("--a", type=float, default=0.0, help="first offset component of A0")
    g.add_argument("--b", type=float, default=0.0, help="second offset component of A0")
    g.add_argument("--r", type=float, default=1.0, help="offset radius of A1")
    g.add_argument("--phi", type=float, default=0.0, help="offset direction of A1")
    g.add_argument("--seed", type=int, help="draw a, b, r, phi at random from this seed")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-plot", action="store_true", help="skip SVG figures")


def random_offsets(seed: int) -> dict:
    """A generic offset draw: a, b standard normal, r in [0.5, 2], phi uniform."""
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(2)
    return {"a": float(a), "b": float(b), "r": float(rng.uniform(0.5, 2.0)),
            "phi": float(rng.uniform(0.0, 2 * math.pi))}


def _offsets(args) -> dict:
    if args.seed is not None:
        return random_offsets(args.seed)
    return {"a": args.a, "b": args.b, "r": args.r, "phi": args.phi}


def _params(args, require_rational: bool = False) -> SystemParams:
    off = _offsets(args)
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise ValueError("--p and --q must be given together")
        if args.theta is not None:
            raise ValueError("give either --theta or --p/--q, not both")
        return SystemParams(args.lam, 0.0, angle=RationalAngle(args.p, args.q), **off)
    if require_rational:
        raise ValueError("this command needs a rational angle via --p and --q")
    if args.theta is None:
        raise ValueError("give --theta or --p/--q")
    return SystemParams(args.lam, args.theta, **off)


def _flags(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def cmd_growth(args) -> int:
    params = _params(args)
    out = ensure_dir(args.out)
    rec = RunRecord(__version__, "growth", _flags(args), params.to_dict(), args.seed)
    series = growth_series(params, args.T, args.prune_tol)
    rec.outputs.append(write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(series)).name)
    if not args.no_plot:
        from .plots import plot_growth
        rec.outputs.append(plot_growth(series, out / "growth.svg",
                                       f"lambda={params.lam:g}, theta={params.theta:.6g}").name)
    rec.summary = {"T": args.T, "beta_T": float(series.beta[-1]), "eps_T": float(series.eps[-1]),
                   "max_beta": float(series.beta.max())}
    rec.finish(out)
    print(f"beta_{args.T} = {series.beta[-1]:.12g} (+{series.eps[-1]:.3g}); wrote {out}")
    return EXIT_OK


def cmd_classify(args) -> int:
    params = _params(args, require_rational=True)
    out = ensure_dir(args.out)
    rec = RunRecord(__version__, "classify", _flags(args), params.to_dict(), args.seed)
    result = classify(params)
    doc = {"version": __version__, "params": params.to_dict(), "classification": result.to_dict()}
    rec.outputs.append(write_json(out / "classification.json", doc).name)
    rec.summary = {"kind": result.kind.value}
    rec.finish(out)
    print(result.summary())
    return EXIT_OK


def sweep_angles(q_max: int) -> list[RationalAngle]:
    """All reduced ``p*pi/q`` in ``(0, 2*pi)`` with ``q <= q_max``, ordered by ``(q, p)``."""
    return [RationalAngle(p, q) for q in range(1, q_max + 1) for p in range(1, 2 * q)
            if math.gcd(p, q) == 1]


def sweep_row(task) -> tuple:
    lam, off, p, q = task
    angle = RationalAngle(p, q)
    c = classify(SystemParams(lam, 0.0, angle=angle, **off))
    cert = c.certificate
    if isinstance(cert, SlopeCertificate):
        first, second = cert.coupling, cert.slope_lower_bound
    elif isinstance(cert, StabilityCertificate):
        first, second = cert.kappa, cert.overall_bound
    else:
        first = second = float("nan")
    return p, q, angle.value, c.kind.value, first, second


def run_sweep(lam: float, offsets: dict, q_max: int, jobs: int = 1) -> list[tuple]:
    tasks = [(lam, offsets, a.p, a.q) for a in sweep_angles(q_max)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(sweep_row, tasks, chunksize=8))
    return [sweep_row(t) for t in tasks]


def cmd_sweep(args) -> int:
    if args.q_max < 1:
        raise ValueError("--q-max must be >= 1")
    off = _offsets(args)
    out = ensure_dir(args.out)
    rec = RunRecord(__version__, "sweep", _flags(args), {"lambda": args.lam, **off}, args.seed)
    rows = run_sweep(args.lam, off, args.q_max, args.jobs)
    rec.outputs.append(write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows).name)
    if not args.no_plot:
        from .plots import plot_sweep
        dicts = [dict(zip(SWEEP_COLUMNS, r)) for r in rows]
        rec.outputs.append(plot_sweep(dicts, out / "sweep.svg").name)
    counts = {k.value: sum(r[3] == k.value for r in rows) for k in Kind}
    rec.summary = {"angles": len(rows), "counts": counts}
    rec.finish(out)
    print(f"{len(rows)} angles: " + ", ".join(f"{k}={v}" for k, v in counts.items() if v))
    return EXIT_OK


def _write_chain(chain: CertificateChain, out: Path, plot: bool, rec: RunRecord):
    rec.outputs.append(write_json(out / "chain.json", chain.to_dict(__version__)).name)
    if plot:
        from .plots import plot_chain
        rec.outputs.append(plot_chain(chain, out / "chain.svg").name)


def cmd_construct(args) -> int:
    target = GrowthTarget.parse(args.a_spec, args.b_spec)
    out = ensure_dir(args.out)
    rec = RunRecord(__version__, "construct", _flags(args), {"lambda": args.lam})
    status = EXIT_OK
    try:
        chain = construct(tuple(args.interval), args.depth, target, args.w, args.w_prime,
                          args.lam, margin_factor=args.margin_factor, q_max=args.q_max,
                          prune_tol=args.prune_tol)
        error = None
    except ConstructionError as exc:
        chain, error, status = exc.chain, str(exc), EXIT_FAIL
        print(f"construction stopped: {error}", file=sys.stderr)
    report = verify(chain)
    if not report.ok:
        status = EXIT_FAIL
    for line in report.checks:
        print(line)
    print(f"verify: {'ok' if report.ok else 'FAILED'} ({report.message})")
    _write_chain(chain, out, not args.no_plot, rec)
    rec.summary = {"stages": len(chain.stages), "requested_depth": args.depth,
                   "completed": error is None, "error": error, "verified": report.ok,
                   "final_interval": list(chain.final_interval)}
    rec.finish(out)
    return status


def cmd_verify(args) -> int:
    chain = CertificateChain.from_dict(read_json(args.chain))
    report = verify(chain)
    for line in report.checks:
        print(line)
    print(f"verify: {'ok' if report.ok else 'FAILED'} ({report.message})")
    return EXIT_OK if report.ok else EXIT_FAIL


def oracle_rows(params: SystemParams, t_max: int, prune_tol: float = 0.0,
                tol: float = ORACLE_TOL) -> list[tuple]:
    """Compare hull-DP against enumeration for ``t <= t_max``.

    With ``prune_tol == 0`` the two must agree to ``tol``; otherwise the true
    value must sit inside the hull bracket ``[beta, beta + eps]``.
    """
    if not 0 <= t_max <= BRUTE_FORCE_MAX_T:
        raise ValueError(f"t_max must lie in [0, {BRUTE_FORCE_MAX_T}], got {t_max}")
    series = growth_series(params, t_max, prune_tol)
    rows = []
    for t in range(t_max + 1):
        bf = brute_force(params, t)
        beta, eps = float(series.beta[t]), float(series.eps[t])
        diff = abs(beta - bf.beta)
        if prune_tol == 0:
            ok = diff <= tol
        else:
            ok = beta - tol <= bf.beta <= beta + eps + tol
        rows.append((t, beta, eps, bf.beta, bf.alpha, diff, "ok" if ok else "MISMATCH"))
    return rows


def cmd_oracle(args) -> int:
    params = _params(args)
    out = ensure_dir(args.out)
    rec = RunRecord(__version__, "oracle", _flags(args), params.to_dict(), args.seed)
    rows = oracle_rows(params, args.t_max, args.prune_tol)
    rec.outputs.append(write_csv(out / "oracle.csv", ORACLE_COLUMNS, rows).name)
    bad = [r[0] for r in rows if r[-1] != "ok"]
    rec.summary = {"t_max": args.t_max, "mismatches": bad}
    rec.finish(out)
    for r in rows:
        print(f"t={r[0]:2d} hull={r[1]:.15g} brute={r[3]:.15g} eps={r[2]:.3g} {r[6]}")
    return EXIT_FAIL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchgrowth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("growth", help="beta_t series and alpha bracket")
    _add_params(p)
    _add_common(p)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--prune-tol", type=float, default=DEFAULT_PRUNE_TOL)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("classify", help="classify a rational angle p*pi/q")
    _add_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="classify every reduced p*pi/q with q <= q_max")
    _add_params(p, angle=False)
    _add_common(p)
    p.add_argument("--q-max", type=int, default=9)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("construct", help="build and verify a nested-interval certificate chain")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--interval", type=float, nargs=2, default=(2.0, 3.3), metavar=("LO", "HI"))
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--a-spec", default="1+log(t)")
    p.add_argument("--b-spec", default="t/(1+log(t))")
    p.add_argument("--w", type=_pair, default=E2, help="offset of A0 in the unstable witness")
    p.add_argument("--w-prime", type=_pair, default=E1, help="offset of A1 in the unstable witness")
    p.add_argument("--margin-factor", type=float, default=DEFAULT_MARGIN_FACTOR)
    p.add_argument("--q-max", type=int, default=DEFAULT_Q_MAX)
    p.add_argument("--prune-tol", type=float, default=DEFAULT_PRUNE_TOL)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="re-verify a certificate chain JSON")
    p.add_argument("chain", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="hull-DP against brute-force enumeration")
    _add_params(p)
    _add_common(p)
    p.add_argument("--t-max", type=int, default=DEFAULT_ORACLE_T)
    p.add_argument("--prune-tol", type=float, default=0.0)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, SequenceSyntaxError, OSError) as exc:
        print(f"switchgrowth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
