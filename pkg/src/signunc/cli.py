"""Command-line interface.

Exit codes: 0 success, 2 bad arguments or unmet preconditions, 3 kernel
construction failed, 4 numerical non-convergence, 5 counterexample budget
exhausted, 6 a quadrature check failed.  Reports go to stdout (or
``--output``), logs to stderr.  ``SIGNUNC_TOL`` overrides the default
tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import debranges as db
from .extremal import BudgetExhausted, NoZero, certify, counterexample, extremizer, sharp_constant
from .kernelbuild import ConstructionFailed, IllConditioned, WeightedPWSpace, build_gram, structure_function, validate_c4
from .measures import Measure, parse_measure
from .numerics import DomainError, NonConvergence

SCHEMA = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_NONCONVERGENCE = 4
EXIT_BUDGET = 5
EXIT_QUADCHECK = 6

log = logging.getLogger("signunc")


@dataclass(frozen=True)
class RunConfig:
    command: str
    measure_spec: str
    delta: float | None
    r: float | None = None
    max_degree: int = 40
    N: int = 40
    tol: float | None = None
    output_path: str | None = None
    format: str = "json"
    seed: int = 0
    method: str = "lsq"
    trials: int = 5
    points: int = 801
    c4_trials: int = 3
    csv_path: str | None = None
    certificate_path: str | None = None
    flipped: bool = False


@dataclass
class Resolved:
    measure: Measure
    hb: db.HermiteBiehler
    method: str
    diagnostics: dict


def default_tol() -> float | None:
    raw = os.environ.get("SIGNUNC_TOL")
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise DomainError(f"SIGNUNC_TOL is not a number: {raw!r}") from None


def resolve(mu: Measure, delta: float, N: int = 40, c4_trials: int = 0) -> Resolved:
    """Closed-form E for Lebesgue and power weights, the kernel pipeline otherwise."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    tau = 0.5 * delta
    if mu.label in ("lebesgue", "power:-0.5"):
        return Resolved(mu, db.paley_wiener(tau), "closed_form", {})
    if mu.kind == "power":
        return Resolved(mu, db.homogeneous(mu.nu, tau), "closed_form", {})
    if mu.level is None:
        raise DomainError(
            f"{mu.label} has no closed-form structure function and no constant level at infinity; "
            "use the counterexample command for measures with exponential moments"
        )
    bk = build_gram(WeightedPWSpace(tau, mu, N))
    hb = structure_function(bk)
    if c4_trials:
        validate_c4(bk, hb, trials=c4_trials)
    diag = {k: bk.diagnostics[k] for k in ("N", "condition_number", "reproducing_residual", "c4_gap") if k in bk.diagnostics}
    return Resolved(mu, hb, "kernel", diag)


def _delta(args) -> float:
    if args.delta is not None and args.delta_from_support is not None:
        raise DomainError("give either --delta or --delta-from-support, not both")
    if args.delta_from_support is not None:
        return 2.0 * math.pi * args.delta_from_support
    if args.delta is None:
        raise DomainError("--delta or --delta-from-support is required")
    return args.delta


def cmd_constant(cfg: RunConfig) -> tuple[dict, int]:
    res = resolve(parse_measure(cfg.measure_spec), cfg.delta, cfg.N, cfg.c4_trials)
    xi1 = sharp_constant(res.hb)
    return {
        "command": "constant",
        "measure": res.measure.to_dict(),
        "delta": cfg.delta,
        "xi1": xi1,
        "method": res.method,
        "diagnostics": res.diagnostics,
    }, EXIT_OK


def cmd_extremizer(cfg: RunConfig) -> tuple[dict, int, str]:
    res = resolve(parse_measure(cfg.measure_spec), cfg.delta, cfg.N, cfg.c4_trials)
    F = extremizer(res.hb)
    tol = cfg.tol if cfg.tol is not None else (1e-8 if res.method == "closed_form" else 1e-4)
    cert = certify(F, res.measure, F.xi1, cfg.delta, tol)
    x = np.linspace(-4.0 * F.xi1, 4.0 * F.xi1, cfg.points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "F"])
    for xi, fi in zip(x, F(x)):
        w.writerow([repr(float(xi)), repr(float(fi))])
    report = {
        "command": "extremizer",
        "measure": res.measure.to_dict(),
        "delta": cfg.delta,
        "xi1": F.xi1,
        "method": res.method,
        "diagnostics": res.diagnostics,
        "certificate": cert.to_dict(),
    }
    return report, EXIT_OK, buf.getvalue()


def cmd_counterexample(cfg: RunConfig) -> tuple[dict, int]:
    if cfg.r is None:
        raise DomainError("--r is required")
    mu = parse_measure(cfg.measure_spec)
    out = counterexample(mu, cfg.r, cfg.max_degree, method=cfg.method)
    return {"command": "counterexample", "measure": mu.to_dict(), **out.to_dict()}, EXIT_OK


def cmd_quadcheck(cfg: RunConfig) -> tuple[dict, int]:
    if cfg.flipped:
        hb, label = db.flipped_exponential(), "flipped"
    else:
        res = resolve(parse_measure(cfg.measure_spec), cfg.delta)
        if res.method != "closed_form":
            raise DomainError("quadcheck needs a closed-form structure function (lebesgue or power:<nu>)")
        hb, label = res.hb, res.measure.label
    tol = cfg.tol if cfg.tol is not None else 1e-6
    rep = db.quadrature_check(hb, trials=cfg.trials, tol=tol, seed=cfg.seed)
    report = {"command": "quadcheck", "measure": label, "delta": cfg.delta, **rep.to_dict()}
    return report, EXIT_OK if rep.passed else EXIT_QUADCHECK


def dumps(report: dict) -> str:
    return json.dumps({"schema": SCHEMA, **report}, sort_keys=True, indent=2) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="signunc", description="Sharp sign-uncertainty constants for band-limited functions.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_delta=True):
        sp.add_argument("--measure", required=True, help="lebesgue | power:<nu> | ks:<U|Sp|O|SOeven|SOodd> | expdecay:<eps> | uniform:<R>")
        if needs_delta:
            sp.add_argument("--delta", type=float, help="exponential type of the competing functions")
            sp.add_argument("--delta-from-support", type=float, help="Fourier support radius; sets delta = 2 pi * value")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--output", default=None, help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("constant", help="sharp constant xi1")
    common(sp)
    sp.add_argument("--N", type=int, default=40, help="cardinal basis size for the kernel pipeline")
    sp.add_argument("--c4-trials", type=int, default=3)

    sp = sub.add_parser("extremizer", help="extremizer samples and certificate")
    common(sp)
    sp.add_argument("--N", type=int, default=40)
    sp.add_argument("--c4-trials", type=int, default=3)
    sp.add_argument("--points", type=int, default=801)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--csv", dest="csv_path", default=None, help="also write samples to this CSV file")
    sp.add_argument("--certificate", dest="certificate_path", default=None, help="also write the certificate JSON here")

    sp = sub.add_parser("counterexample", help="polynomial witness that the constant vanishes")
    common(sp, needs_delta=False)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--max-degree", type=int, default=40)
    sp.add_argument("--method", choices=("lsq", "ritz"), default="lsq")

    sp = sub.add_parser("quadcheck", help="Hermite-Biehler, exactness and Parseval checks")
    sp.add_argument("--measure", default="lebesgue")
    sp.add_argument("--delta", type=float, default=2.0)
    sp.add_argument("--delta-from-support", type=float, default=None)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--output", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--flipped", action="store_true", help=argparse.SUPPRESS)
    return p


def _config(args) -> RunConfig:
    tol = args.tol if args.tol is not None else default_tol()
    if args.command == "counterexample":
        delta = None
    elif args.command == "quadcheck" and args.delta_from_support is not None:
        delta = 2.0 * math.pi * args.delta_from_support
    elif args.command == "quadcheck":
        delta = args.delta
    else:
        delta = _delta(args)
    return RunConfig(
        command=args.command,
        measure_spec=args.measure,
        delta=delta,
        r=getattr(args, "r", None),
        max_degree=getattr(args, "max_degree", 40),
        N=getattr(args, "N", 40),
        tol=tol,
        output_path=args.output,
        format=getattr(args, "format", "json"),
        seed=args.seed,
        method=getattr(args, "method", "lsq"),
        trials=getattr(args, "trials", 5),
        points=getattr(args, "points", 801),
        c4_trials=getattr(args, "c4_trials", 3),
        csv_path=getattr(args, "csv_path", None),
        certificate_path=getattr(args, "certificate_path", None),
        flipped=getattr(args, "flipped", False),
    )


def run(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    if cfg.command == "extremizer":
        report, code, samples = cmd_extremizer(cfg)
        if cfg.format == "csv":
            _write(cfg.output_path, samples)
            if cfg.certificate_path:
                _write(cfg.certificate_path, dumps(report))
        else:
            _write(cfg.output_path, dumps(report))
            if cfg.csv_path:
                _write(cfg.csv_path, samples)
    else:
        handler = {"constant": cmd_constant, "counterexample": cmd_counterexample, "quadcheck": cmd_quadcheck}[cfg.command]
        report, code = handler(cfg)
        _write(cfg.output_path, dumps(report))
    log.info("%s finished in %.2f s", cfg.command, time.perf_counter() - t0)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return run(_config(args))
    except (ConstructionFailed, IllConditioned) as exc:
        log.error("construction failed: %s", exc)
        return EXIT_CONSTRUCTION
    except BudgetExhausted as exc:
        log.error("%s", exc)
        return EXIT_BUDGET
    except (NonConvergence, NoZero, db.ScanTooCoarse) as exc:
        log.error("no convergence: %s", exc)
        return EXIT_NONCONVERGENCE
    except (DomainError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
