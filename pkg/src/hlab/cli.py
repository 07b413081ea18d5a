"""Command-line front end.

Commands
--------
constants      evaluate a closed-form sharp constant
verify         closed form vs. quadrature and Monte Carlo oracles
extremal       check that extremal powers attain the constant
search         random modulated tuples vs. the norm upper bound
geometry       ball volume / sphere measure plus a Monte Carlo check
discrepancies  the convention/typo findings report

Exit codes: 0 all checks passed, 1 a verification failed, 2 usage or
validation error.  The default seed comes from ``HLAB_SEED`` and is
overridden by ``--seed``.  JSON output is byte-identical for identical
configurations (including seed); all run-dependent timing lives under the
``metadata`` key.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .hgroup import Convention, GroupDim, unit_ball_volume
from .integrate import SeededStream, rejection_volume_estimate
from .operators import OperatorKind, OperatorSpec
from .specfun import AlphaProfile, DivergentConstantError
from .verify import (
    discrepancy_report,
    mc_convergence,
    upper_bound_search,
    verify_constant,
    verify_extremal,
)

__all__ = ["Format", "RunConfig", "main", "run"]

_CONVENTIONS = {"geometric": Convention.GEOMETRIC, "paper": Convention.PAPER_FORMULA}
_OPERATORS = {
    "hardy": OperatorKind.HARDY,
    "hlp": OperatorKind.HLP,
    "hilbert": OperatorKind.HILBERT,
}


class Format(enum.Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 1
    m: int = 1
    alphas: tuple[float, ...] = ()
    operator: str = "hardy"
    convention: Convention = Convention.GEOMETRIC
    samples: int = 1_000_000
    seed: int = 0
    tol: float | None = None
    format: Format = Format.TEXT
    output_path: str | None = None
    workers: int = 1
    trials: int = 100
    gauges: tuple[float, ...] = (0.5, 1.0, 2.0, 10.0)
    directions: int = 5
    n_values: tuple[int, ...] = (1, 2)
    convergence_path: str | None = None
    details: dict = field(default_factory=dict)


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"{flag}: expected a comma-separated list of numbers")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hlab",
        description="Sharp-constant computations and verification for m-linear "
        "integral operators in gauge geometry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, spec_args: bool = True) -> None:
        if spec_args:
            p.add_argument("--operator", choices=sorted(_OPERATORS), default="hardy")
            p.add_argument("--n", type=int, default=1, help="group index n (Q = 2n + 2)")
            p.add_argument("--m", type=int, default=1, help="operator arity")
            p.add_argument(
                "--alphas",
                type=lambda s: _parse_floats(s, "--alphas"),
                default=None,
                help="comma-separated exponents alpha_1..alpha_m",
            )
        p.add_argument("--convention", choices=sorted(_CONVENTIONS), default="geometric")
        p.add_argument("--seed", type=int, default=None, help="default from HLAB_SEED, else 0")
        p.add_argument("--samples", type=int, default=1_000_000)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=[f.value for f in Format], default="text")
        p.add_argument("--output", dest="output_path", default=None)

    p = sub.add_parser("constants", help="evaluate a closed-form sharp constant")
    add_common(p)

    p = sub.add_parser("verify", help="closed form vs. quadrature + Monte Carlo oracles")
    add_common(p)
    p.add_argument(
        "--convergence",
        dest="convergence_path",
        default=None,
        help="write a CSV convergence curve (n_samples,estimate,std_error,closed_form)",
    )

    p = sub.add_parser("extremal", help="extremal attainment across gauges and directions")
    add_common(p)
    p.add_argument(
        "--gauges", type=lambda s: _parse_floats(s, "--gauges"), default=(0.5, 1.0, 2.0, 10.0)
    )
    p.add_argument("--directions", type=int, default=5)

    p = sub.add_parser("search", help="random modulated tuples vs. the norm upper bound")
    add_common(p)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("geometry", help="ball volume and sphere measure with an MC check")
    add_common(p, spec_args=False)
    p.add_argument("--n", type=int, default=1)

    p = sub.add_parser("discrepancies", help="convention/typo findings report")
    add_common(p, spec_args=False)
    p.add_argument(
        "--n-values",
        dest="n_values",
        type=lambda s: tuple(int(x) for x in s.split(",")),
        default=(1, 2),
    )
    return parser


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("HLAB_SEED", "")
    try:
        return int(env) if env else 0
    except ValueError:
        return 0


def _make_spec(cfg: RunConfig) -> OperatorSpec:
    if len(cfg.alphas) != cfg.m:
        raise DivergentConstantError(
            f"--alphas must list exactly m={cfg.m} exponents, got {len(cfg.alphas)}"
        )
    return OperatorSpec(
        _OPERATORS[cfg.operator],
        GroupDim(cfg.n),
        AlphaProfile(cfg.alphas),
        cfg.convention,
    )


def _base_report(cfg: RunConfig, spec_rec: dict) -> dict:
    return {
        "command": cfg.command,
        "spec": spec_rec,
        "convention": cfg.convention.value,
        "closed_form": None,
        "oracles": [],
        "pass": None,
        "seed": cfg.seed,
        "findings": [],
    }


def _dispatch(cfg: RunConfig) -> dict:
    if cfg.command == "constants":
        spec = _make_spec(cfg)
        result = spec.constant()
        report = _base_report(cfg, _rec_spec(spec))
        report["closed_form"] = result.value
        report["pass"] = True
        return report

    if cfg.command == "verify":
        spec = _make_spec(cfg)
        vr = verify_constant(
            spec, n_samples=cfg.samples, seed=cfg.seed, tol=cfg.tol, workers=cfg.workers
        )
        report = _base_report(cfg, _rec_spec(spec))
        rec = vr.to_record()
        report["convention"] = rec["convention"]
        report["closed_form"] = rec["closed_form"]
        report["oracles"] = rec["oracles"]
        report["pass"] = rec["pass"]
        report["findings"] = [{"id": "tolerances", **rec["details"]}]
        if cfg.convergence_path:
            _write_convergence(cfg, spec)
        return report

    if cfg.command == "extremal":
        spec = _make_spec(cfg)
        vr = verify_extremal(
            spec,
            gauges=cfg.gauges,
            directions=cfg.directions,
            seed=cfg.seed,
            tol=cfg.tol if cfg.tol is not None else 1e-6,
        )
        rec = vr.to_record()
        report = _base_report(cfg, _rec_spec(spec))
        report["closed_form"] = rec["closed_form"]
        report["oracles"] = rec["oracles"]
        report["pass"] = rec["pass"]
        report["findings"] = [{"id": "attainment", **rec["details"]}]
        return report

    if cfg.command == "search":
        spec = _make_spec(cfg)
        sr = upper_bound_search(
            spec, trials=cfg.trials, seed=cfg.seed, tol=cfg.tol if cfg.tol is not None else 1e-3
        )
        rec = sr.to_record()
        report = _base_report(cfg, _rec_spec(spec))
        report["closed_form"] = rec["bound"]
        report["pass"] = rec["pass"]
        report["findings"] = [
            {
                "id": "upper-bound-search",
                "trials": rec["trials"],
                "max_ratio": rec["max_ratio"],
                "violations": rec["violations"],
                "attaining_description": rec["attaining_description"],
            }
        ]
        return report

    if cfg.command == "geometry":
        dim = GroupDim(cfg.n)
        est = rejection_volume_estimate(dim, cfg.samples, SeededStream(cfg.seed), cfg.workers)
        geom = unit_ball_volume(dim, Convention.GEOMETRIC)
        tab = unit_ball_volume(dim, Convention.PAPER_FORMULA)
        sigma = (est.value - geom) / est.std_error if est.std_error else 0.0
        report = _base_report(
            cfg, {"operator": "geometry", "n": cfg.n, "m": 0, "alphas": []}
        )
        report["closed_form"] = geom if cfg.convention is Convention.GEOMETRIC else tab
        report["oracles"] = [
            {
                "method": "mc",
                "value": est.value,
                "std_error": est.std_error,
                "n_samples": est.n_samples,
                "sigma_distance": sigma,
            }
        ]
        report["pass"] = abs(sigma) <= 3.0
        report["findings"] = [
            {
                "id": "geometry",
                "Q": dim.Q,
                "geometric_volume": geom,
                "tabulated_volume": tab,
                "sphere_measure_geometric": dim.Q * geom,
                "sphere_measure_tabulated": dim.Q * tab,
            }
        ]
        return report

    if cfg.command == "discrepancies":
        rep = discrepancy_report(cfg.n_values, n_samples=cfg.samples, seed=cfg.seed)
        report = _base_report(
            cfg, {"operator": "discrepancies", "n": cfg.n_values[0], "m": 0, "alphas": []}
        )
        report["pass"] = all(f.get("pass", True) for f in rep.findings)
        report["findings"] = rep.findings
        report["details_text"] = rep.text
        return report

    raise ValueError(f"unknown command {cfg.command!r}")


def _rec_spec(spec: OperatorSpec) -> dict:
    return {
        "operator": spec.kind.value,
        "n": spec.dim.n,
        "m": spec.m,
        "alphas": list(spec.profile.alphas),
    }


def _write_convergence(cfg: RunConfig, spec: OperatorSpec) -> None:
    rows = mc_convergence(spec, cfg.samples, cfg.seed)
    with open(cfg.convergence_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_samples", "estimate", "std_error", "closed_form"])
        for n, est, se, closed in rows:
            writer.writerow([n, repr(est), repr(se), repr(closed)])


def _render(report: dict, fmt: Format, runtime_ms: int) -> str:
    doc = dict(report)
    doc["metadata"] = {
        "runtime_ms": runtime_ms,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if fmt is Format.JSON:
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt is Format.CSV:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["key", "value"])
        for key in sorted(report):
            writer.writerow([key, json.dumps(report[key], sort_keys=True)])
        return buf.getvalue()
    lines = [f"command: {report['command']}"]
    lines.append(f"spec: {json.dumps(report['spec'], sort_keys=True)}")
    lines.append(f"convention: {report['convention']}")
    if report["closed_form"] is not None:
        lines.append(f"closed form: {report['closed_form']:.12g}")
    for oracle in report["oracles"]:
        extra = ""
        if oracle.get("rel_err") is not None:
            extra = f"  rel_err={oracle['rel_err']:.3e}"
        if oracle.get("sigma_distance") is not None:
            extra += f"  sigma={oracle['sigma_distance']:+.2f}"
        lines.append(
            f"oracle[{oracle['method']}]: {oracle['value']:.12g} "
            f"+/- {oracle['std_error']:.3g} (N={oracle['n_samples']}){extra}"
        )
    for finding in report["findings"]:
        lines.append(f"finding: {json.dumps(finding, sort_keys=True, default=str)}")
    if "details_text" in report:
        lines.append(report["details_text"])
    if report["pass"] is not None:
        lines.append(f"pass: {report['pass']}")
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, dispatch, and write the report.

    Returns 0 when all checks pass, 1 when a verification fails, 2 on
    usage or validation errors.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    ns = vars(args)
    seed = _resolve_seed(ns.get("seed"))
    alphas = ns.get("alphas")
    if alphas is None and "m" in ns and ns.get("command") not in ("geometry", "discrepancies"):
        alphas = tuple([1.0] * ns.get("m", 1))
    cfg = RunConfig(
        command=ns["command"],
        n=ns.get("n", 1),
        m=ns.get("m", 1),
        alphas=tuple(alphas) if alphas is not None else (),
        operator=ns.get("operator", "hardy"),
        convention=_CONVENTIONS[ns.get("convention", "geometric")],
        samples=ns.get("samples", 1_000_000),
        seed=seed,
        tol=ns.get("tol"),
        format=Format(ns.get("format", "text")),
        output_path=ns.get("output_path"),
        workers=ns.get("workers", 1),
        trials=ns.get("trials", 100),
        gauges=tuple(ns.get("gauges", (0.5, 1.0, 2.0, 10.0))),
        directions=ns.get("directions", 5),
        n_values=tuple(ns.get("n_values", (1, 2))),
        convergence_path=ns.get("convergence_path"),
    )

    start = time.perf_counter()
    try:
        report = _dispatch(cfg)
    except DivergentConstantError as exc:
        print(f"hlab {cfg.command}: --alphas: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"hlab {cfg.command}: {exc}", file=sys.stderr)
        return 2
    runtime_ms = int((time.perf_counter() - start) * 1000)

    text = _render(report, cfg.format, runtime_ms)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if (report["pass"] is None or report["pass"]) else 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
