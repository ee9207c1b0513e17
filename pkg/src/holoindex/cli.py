"""Command line surface over the library.

Each subcommand parses a ``.germ`` map definition, runs one computation,
and emits a single structured report in a human table layout or as JSON
(``--format machine``).  One seed controls every random choice, so reports
are reproducible; flags can also be supplied through ``HOLOINDEX_*``
environment variables (flag ``--eps`` becomes ``HOLOINDEX_EPS`` and so on).

Exit status: 0 on success, 2 when a mathematical check fails (index
instability, census inconsistency, a disagreeing theorem verdict, an
unstable perturbation experiment), 1 on usage problems including malformed
map definitions.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import dsl
from ._newton import NewtonBudget
from .dold import dold_local, theorem_1_verdict
from .errors import (ConstantTermError, DimensionError, HoloindexError,
                     ParseError)
from .indices import fixed_point_index
from .jets import iterate
from .normal_form import normalize
from .orbits import Ball, find_periodic, perturb_and_count
from .spectra import spectrum_of_germ

ENV_PREFIX = "HOLOINDEX_"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2


def format_complex(value):
    """Render a complex number as a+bi with 17 significant digits."""
    z = complex(value)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _document(value):
    """Normalize nested values into JSON-serializable trees."""
    if isinstance(value, dict):
        return {str(k): _document(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_document(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_document(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.17g}")
    if isinstance(value, (complex, np.complexfloating)):
        return format_complex(value)
    return value


def render_human(doc, indent=0):
    lines = []
    pad = "  " * indent
    if isinstance(doc, dict):
        for key, value in doc.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.append(render_human(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(doc, list):
        if not doc:
            lines.append(f"{pad}(none)")
        for value in doc:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(render_human(value, indent + 1))
            else:
                lines.append(f"{pad}- {value}")
    else:
        lines.append(f"{pad}{doc}")
    return "\n".join(lines)


def _index_document(report):
    doc = {
        "value": report.value,
        "method": report.method,
    }
    if report.ball_radius is not None:
        doc["ball_radius"] = report.ball_radius
    if report.regular_value is not None:
        doc["regular_value"] = [format_complex(v) for v in report.regular_value]
    if report.witnesses is not None:
        doc["witnesses"] = [
            {
                "point": [format_complex(v) for v in point],
                "jacobian_condition": float(cond),
            }
            for point, cond in zip(report.witnesses, report.conditions)
        ]
    details = dict(report.details)
    details.pop("block_matrix", None)
    doc.update(_document(details))
    return doc


def _census_document(census):
    return {
        "region_radius": census.region.radius,
        "period": census.M,
        "period_counts": {str(m): c for m, c in sorted(census.counts.items())},
        "fixed_point_counts": {str(d): c for d, c in sorted(census.fixed_counts.items())},
        "cross_check": [
            {"divisor": d, "fixed_points": L, "divisor_sum": s, "match": L == s}
            for d, L, s in census.table
        ],
        "orbits": [
            {
                "period": record.period,
                "representative": [format_complex(v) for v in record.representative],
                "multipliers": [format_complex(v) for v in record.multipliers],
                "simple": record.simple,
                "hyperbolic": record.hyperbolic,
            }
            for record in census.records
        ],
    }


def run_command(command, ast, options):
    """Execute one subcommand against a parsed map definition.

    Returns ``(document, exit_code)``; mathematical failures are reported
    in-band with their stable error codes rather than raised.
    """
    seed = int(options.get("seed", 0))
    rng = np.random.default_rng(seed)
    degree = options.get("degree")
    germ = dsl.to_germ(ast, int(degree) if degree is not None else None)
    radius = float(options.get("radius") or dsl.working_radius(ast))
    budget = NewtonBudget()
    doc = {
        "command": command,
        "dimension": germ.dim,
        "truncation_degree": germ.degree,
        "seed": seed,
    }
    try:
        if command == "index":
            power = int(options.get("power") or 1)
            target = germ if power == 1 else iterate(germ, power)
            report = fixed_point_index(
                target, options.get("strategy", "auto"),
                radius=radius / max(power, 1), rng=rng, budget=budget)
            doc["power"] = power
            doc["index"] = _index_document(report)
            return doc, EXIT_OK
        if command == "dold":
            period = int(options.get("period") or 1)
            report = dold_local(germ, period, strategy=options.get("strategy", "auto"),
                                radius=radius, rng=rng, budget=budget)
            doc["period"] = period
            doc["dold_index"] = report.value
            doc["divisor_indices"] = {str(d): v for d, v in sorted(report.indices.items())}
            doc["methods"] = {str(d): m for d, m in sorted(report.methods.items())}
            doc["plan"] = [
                {"divisor": d, "sign": sign} for d, sign in report.plan.weights
            ]
            if report.negative_fault:
                doc["error"] = {
                    "code": "E_NEGATIVE_DOLD",
                    "message": "local Dold index is negative: numerical fault",
                }
                return doc, EXIT_MATH
            return doc, EXIT_OK
        if command == "census":
            period = int(options.get("period") or 1)
            census = find_periodic(germ, Ball.at_origin(germ.dim, radius), period,
                                   rng=rng, budget=budget)
            doc["census"] = _census_document(census)
            return doc, EXIT_OK
        if command == "perturb":
            period = int(options.get("period") or 1)
            eps = float(options.get("eps") or 1e-3)
            trials = int(options.get("trials") or 5)
            outcome = perturb_and_count(
                germ, period, eps, trials, radius=radius, rng=rng,
                budget=budget, mode=options.get("mode", "full"))
            doc["period"] = period
            doc["magnitude"] = eps
            doc["trials"] = trials
            doc["per_trial_counts"] = outcome.period_counts
            doc["modal_count"] = outcome.modal_count
            doc["stable"] = outcome.stable
            return doc, EXIT_OK if outcome.stable else EXIT_MATH
        if command == "normalform":
            r = int(options.get("nf_degree") or options.get("degree") or 7)
            result = normalize(germ.with_degree(max(r, germ.degree)), r)
            support = sorted(result.resonant_support)
            doc["degree"] = r
            doc["eigenvalues"] = [format_complex(v) for v in result.eigenvalues]
            doc["resonant_support"] = [
                {"component": j + 1, "exponents": list(e)} for j, e in support
            ]
            doc["retained_terms"] = len(support)
            doc["conjugacy_residual"] = result.conjugacy_residual()
            return doc, EXIT_OK
        if command == "verify-theorem":
            period = int(options.get("period") or 1)
            verdict = theorem_1_verdict(germ, period, radius=radius, rng=rng,
                                        budget=budget)
            spec = spectrum_of_germ(germ)
            doc["period"] = period
            doc["eigenvalues"] = [format_complex(v) for v in spec.eigenvalues]
            doc["unity_orders"] = [m if m is not None else "none"
                                   for m in spec.unity_orders]
            doc["predicted_positive"] = verdict.predicted
            doc["computed_dold_index"] = verdict.computed_P_M
            doc["agree"] = verdict.agree
            doc["divisor_indices"] = {
                str(d): v for d, v in sorted(verdict.report.indices.items())
            }
            return doc, EXIT_OK if verdict.agree else EXIT_MATH
        raise ValueError(f"unknown command {command!r}")
    except HoloindexError as err:
        doc["error"] = {"code": err.code, "message": str(err)}
        return doc, EXIT_MATH


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="holoindex",
        description="Fixed point indices, Dold indices and periodic point "
                    "censuses of holomorphic map germs.",
    )

    def env_default(name, fallback=None):
        return os.environ.get(ENV_PREFIX + name, fallback)

    parser.add_argument("--format", choices=("human", "machine"),
                        default=env_default("FORMAT", "human"),
                        help="report format (env HOLOINDEX_FORMAT)")
    parser.add_argument("--seed", type=int,
                        default=int(env_default("SEED", "0")),
                        help="seed for every stochastic component (env HOLOINDEX_SEED)")
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("germ_file", help="path to a .germ map definition")
        p.add_argument("--radius", type=float,
                       default=env_default("RADIUS"),
                       help="working ball radius (env HOLOINDEX_RADIUS)")
        p.add_argument("--degree", type=int,
                       default=env_default("DEGREE"),
                       help="jet truncation degree (env HOLOINDEX_DEGREE)")
        p.add_argument("--strategy", choices=("auto", "cronin", "numerical"),
                       default=env_default("STRATEGY", "auto"),
                       help="index computation strategy (env HOLOINDEX_STRATEGY)")

    p = sub.add_parser("index", help="fixed point index of an iterate")
    add_common(p)
    p.add_argument("--power", type=int, default=env_default("POWER", 1),
                   help="iterate exponent m (env HOLOINDEX_POWER)")

    p = sub.add_parser("dold", help="local Dold index for a period")
    add_common(p)
    p.add_argument("--period", type=int, default=env_default("PERIOD", 1),
                   help="period M (env HOLOINDEX_PERIOD)")

    p = sub.add_parser("census", help="periodic point census in a ball")
    add_common(p)
    p.add_argument("--period", type=int, default=env_default("PERIOD", 1),
                   help="period M (env HOLOINDEX_PERIOD)")

    p = sub.add_parser("perturb", help="perturbed periodic point counts")
    add_common(p)
    p.add_argument("--period", type=int, default=env_default("PERIOD", 1),
                   help="period M (env HOLOINDEX_PERIOD)")
    p.add_argument("--eps", type=float, default=env_default("EPS", 1e-3),
                   help="perturbation magnitude (env HOLOINDEX_EPS)")
    p.add_argument("--trials", type=int, default=env_default("TRIALS", 5),
                   help="number of perturbation trials (env HOLOINDEX_TRIALS)")
    p.add_argument("--mode", choices=("full", "resonance_preserving"),
                   default=env_default("MODE", "full"),
                   help="perturbation family (env HOLOINDEX_MODE)")

    p = sub.add_parser("normalform", help="resonant normal form")
    add_common(p)
    p.add_argument("--nf-degree", dest="nf_degree", type=int,
                   default=env_default("NF_DEGREE"),
                   help="normalization degree r (env HOLOINDEX_NF_DEGREE)")

    p = sub.add_parser("verify-theorem",
                       help="compare the Dold index against the linear-part criterion")
    add_common(p)
    p.add_argument("--period", type=int, default=env_default("PERIOD", 1),
                   help="period M (env HOLOINDEX_PERIOD)")

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.germ_file, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        print(f"holoindex: cannot read {args.germ_file}: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        ast = dsl.parse(text)
    except (ParseError, DimensionError, ConstantTermError) as err:
        print(f"holoindex: {args.germ_file}: [{err.code}] {err}", file=sys.stderr)
        return EXIT_USAGE
    options = {key: value for key, value in vars(args).items()
               if key not in ("command", "germ_file", "format") and value is not None}
    try:
        doc, status = run_command(args.command, ast, options)
    except (DimensionError, ConstantTermError, ParseError) as err:
        print(f"holoindex: {args.germ_file}: [{err.code}] {err}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "machine":
        print(json.dumps(doc, indent=2, sort_keys=False))
    else:
        print(render_human(doc))
    return status


if __name__ == "__main__":
    sys.exit(main())
