"""Command-line front end: compute, verify, lattice, witness.

Exit codes: 0 success (and all verify checks passing), 1 verify residual
above tolerance, 2 scenario/schema violation, 3 solver failure.  Reports
are JSON with sorted keys and repr-exact floats, so identical inputs give
byte-identical output; infinities are rendered as the strings "inf" and
"-inf".
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .continuous import FAMILIES, demonstrate_entropy_divergence
from .errors import LossInfoError, ScenarioError, SolverError
from .losses import log_loss, square_error, tsallis_score, bregman_loss, BUILTIN_CONVEX
from .scenario import LossSpec, Scenario, load_scenario, parse_loss_string
from .space import RandomElement, SampleSpace, enumerate_partitions, is_refinement, trivial_partition
from .uncertainty import (
    UncertaintyReport,
    conditional_entropy,
    conditional_information,
    entropy,
    information,
    optimal_risk,
    uncertainty_reduction,
)
from .verify import SUITES, run_suite

LATTICE_CSV_HEADER = "partition_id,block_count,optimal_risk,uncertainty_from_trivial"
_LN2 = math.log(2.0)
_MAX_LATTICE_ATOMS = 8
_FULL_PAIR_SWEEP_LIMIT = 7  # all Bell(n)^2 refinement pairs up to here
_SAMPLED_PAIRS = 200_000


def _engine_header() -> dict:
    return {"name": "lossinfo", "version": __version__}


def _digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _render_partition(partition) -> list:
    return [list(block) for block in partition.blocks]


def _query_result(scenario: Scenario, query) -> dict:
    space = scenario.space()
    loss = scenario.loss_model(query.loss, query.target)
    x = scenario.element_for(query.loss, query.target)
    if query.quantity == "H":
        report = entropy(space, x, loss)
    elif query.quantity == "H_cond":
        report = conditional_entropy(space, x, loss, scenario.partition_for(query.given))
    elif query.quantity == "I":
        report = information(space, x, loss, scenario.partition_for(query.given))
    elif query.quantity == "I_cond":
        report = conditional_information(
            space,
            x,
            loss,
            scenario.partition_for(query.conditioned_on),
            scenario.partition_for(query.given),
        )
    else:  # "U"
        from_part = (
            scenario.partition_for(query.from_vars) if query.from_vars else trivial_partition(space)
        )
        report = uncertainty_reduction(
            space, x, loss, from_part, scenario.partition_for(query.to_vars)
        )
    return _render_report(query, report)


def _render_report(query, report: UncertaintyReport) -> dict:
    row = {
        "quantity": report.quantity,
        "target": query.target,
        "given": list(query.given),
        "conditioned_on": list(query.conditioned_on),
        "from": list(query.from_vars),
        "to": list(query.to_vars),
        "loss": query.loss.render(),
        "loss_name": report.loss_name,
        "value": report.value.render(),
        "risk_from": report.risk_from.render(),
        "risk_to": report.risk_to.render(),
        "partition_from": _render_partition(report.partition_from),
        "partition_to": _render_partition(report.partition_to),
    }
    if report.loss_name == "log_loss" and report.value.is_finite:
        row["value_nats"] = report.value.value
        row["value_bits"] = report.value.value / _LN2
    return row


def _format_table(rows: list) -> str:
    lines = []
    for row in rows:
        given = ",".join(row.get("given", [])) or "-"
        value = row["value"]
        value_text = value if isinstance(value, str) else f"{value:.9f}"
        lines.append(
            f"{row['quantity']:<7} target={row['target']:<8} given={given:<12} "
            f"loss={row['loss']:<16} value={value_text}"
        )
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_compute(args) -> int:
    scenario = load_scenario(args.scenario)
    results = [_query_result(scenario, q) for q in scenario.queries]
    report = {
        "command": "compute",
        "engine": _engine_header(),
        "input_digest": _digest(args.scenario),
        "results": results,
    }
    text = _format_table(results) if args.format == "table" else _dump(report)
    _emit(text, args.out)
    return 0


def _cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    suite_report = run_suite(scenario, args.suite)
    report = {
        "command": "verify",
        "engine": _engine_header(),
        "input_digest": _digest(args.scenario),
        **suite_report,
    }
    if args.format == "table":
        lines = [
            f"{c['check']:<22} residual={c['residual']:.3e} "
            f"{'PASS' if c['pass'] else 'FAIL'}  {c['detail']}"
            for c in suite_report["checks"]
        ]
        lines.append(f"suite={args.suite} all_pass={suite_report['all_pass']}")
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(report)
    _emit(text, args.out)
    return 0 if suite_report["all_pass"] else 1


def _lattice_loss_and_element(loss_spec: LossSpec, atoms: int, rng) -> tuple:
    if loss_spec.name == "log":
        values = rng.integers(0, atoms, size=atoms).astype(float)
        return log_loss(atoms), RandomElement.real(values)
    if loss_spec.name == "tsallis":
        values = rng.integers(0, atoms, size=atoms).astype(float)
        return tsallis_score(atoms, float(loss_spec.param("q", 2.0))), RandomElement.real(values)
    values = rng.uniform(-2.0, 2.0, size=atoms)
    if loss_spec.name == "bregman":
        phi_name = str(loss_spec.param("phi", "squared_norm"))
        if phi_name == "negative_entropy":
            values = rng.uniform(0.1, 2.0, size=atoms)
        return bregman_loss(BUILTIN_CONVEX[phi_name](), 1, (-10.0, 10.0)), RandomElement.real(values)
    return square_error(1), RandomElement.real(values)


def _cmd_lattice(args) -> int:
    if not 1 <= args.atoms <= _MAX_LATTICE_ATOMS:
        raise ScenarioError("atoms", f"must be in 1..{_MAX_LATTICE_ATOMS}")
    loss_spec = parse_loss_string(args.loss)
    rng = np.random.default_rng(args.seed)
    probs = rng.random(args.atoms) + 0.1
    space = SampleSpace(probs / probs.sum())
    loss, x = _lattice_loss_and_element(loss_spec, args.atoms, rng)
    partitions = enumerate_partitions(args.atoms)
    risks = [float(optimal_risk(space, x, loss, p)) for p in partitions]
    trivial_risk = risks[0]  # enumeration starts at the all-in-one-block partition

    lines = [LATTICE_CSV_HEADER]
    for pid, (part, risk) in enumerate(zip(partitions, risks)):
        reduction = trivial_risk - risk
        lines.append(f"{pid},{part.block_count},{risk!r},{reduction!r}")
    csv_text = "\n".join(lines) + "\n"

    if args.atoms <= _FULL_PAIR_SWEEP_LIMIT:
        pairs = [
            (a, b)
            for a in range(len(partitions))
            for b in range(len(partitions))
            if a != b and is_refinement(partitions[a], partitions[b])
        ]
    else:
        pair_rng = np.random.default_rng(args.seed + 1)
        candidates = pair_rng.integers(0, len(partitions), size=(_SAMPLED_PAIRS, 2))
        pairs = [
            (int(a), int(b))
            for a, b in candidates
            if a != b and is_refinement(partitions[a], partitions[b])
        ]
    margins = [risks[b] - risks[a] for a, b in pairs]
    min_margin = float(min(margins)) if margins else 0.0
    violations = sum(1 for m in margins if m < -1e-9)
    report = {
        "command": "lattice",
        "engine": _engine_header(),
        "atoms": args.atoms,
        "seed": args.seed,
        "loss": loss_spec.render(),
        "partitions": len(partitions),
        "monotonicity": {
            "pairs_checked": len(pairs),
            "violations": violations,
            "min_margin": min_margin,
        },
    }
    if args.out:
        Path(args.out).write_text(csv_text)
        report["csv_path"] = str(args.out)
        sys.stdout.write(_dump(report))
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_witness(args) -> int:
    if args.family not in FAMILIES:
        raise ScenarioError("family", f"must be one of {FAMILIES}")
    try:
        n_values = [float(piece) for piece in args.n.split(",") if piece.strip()]
    except ValueError:
        raise ScenarioError("n", "must be a comma-separated list of numbers") from None
    ladder = demonstrate_entropy_divergence(args.family, n_values)
    decreasing = all(b < a for (_, a), (_, b) in zip(ladder, ladder[1:]))
    report = {
        "command": "witness",
        "engine": _engine_header(),
        "family": args.family,
        "entropy": "inf",
        "ladder": [[n, bound] for n, bound in ladder],
        "strictly_decreasing": decreasing,
    }
    _emit(_dump(report), args.out)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossinfo",
        description="Uncertainty, entropy, and information under pluggable loss functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="answer the queries in a scenario file")
    compute.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    compute.add_argument("--format", choices=("json", "table"), default="json")
    compute.add_argument("--out", default=None, help="also write the output to this path")
    compute.set_defaults(func=_cmd_compute)

    verify = sub.add_parser("verify", help="run an identity-verification suite")
    verify.add_argument("--scenario", required=True)
    verify.add_argument("--suite", required=True, choices=SUITES)
    verify.add_argument("--format", choices=("json", "table"), default="json")
    verify.add_argument("--out", default=None)
    verify.set_defaults(func=_cmd_verify)

    lattice = sub.add_parser("lattice", help="sweep every partition of a random space")
    lattice.add_argument("--atoms", type=int, required=True, help=f"1..{_MAX_LATTICE_ATOMS}")
    lattice.add_argument("--loss", default="square", help="loss spec, e.g. square or tsallis:q=2")
    lattice.add_argument("--seed", type=int, default=0)
    lattice.add_argument("--out", default=None, help="CSV destination (stdout if omitted)")
    lattice.set_defaults(func=_cmd_lattice)

    witness = sub.add_parser("witness", help="print a diverging risk ladder")
    witness.add_argument("--family", required=True, help="|".join(FAMILIES))
    witness.add_argument("--n", default="1,10,100,1000", help="comma-separated ladder indices")
    witness.add_argument("--out", default=None)
    witness.set_defaults(func=_cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        sys.stderr.write(f"scenario error: {exc}\n")
        return 2
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return 3
    except LossInfoError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
