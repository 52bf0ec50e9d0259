"""Identity-verification suites over a scenario: residuals against fixed tolerances.

Each suite turns a scenario's joint table into engine objects and checks
one family of structural identities:

  telescope   H = I + H_cond for every (target, mid-variable, loss) triple
  prop1       lattice sweep: refinement monotonicity, maximality of full
              knowledge, nonnegativity of all named quantities
  pythagoras  Bregman three-point decomposition over knowledge partitions
  bridge      KL-loss entropy of conditional rows equals log-loss information
  belief      total = relative + entropy against fixed belief distributions

Every check reports a residual (or worst margin) and a pass flag; the
caller decides what to do with failures.
"""

from __future__ import annotations

import numpy as np

from .losses import (
    BUILTIN_CONVEX,
    WeightedStates,
    kl_loss,
    log_loss,
    square_error,
    tsallis_score,
)
from .scenario import Scenario
from .space import (
    Partition,
    RandomElement,
    enumerate_partitions,
    is_refinement,
    partition_of_element,
)
from .uncertainty import (
    belief_decomposition,
    check_pythagoras,
    check_telescope,
    conditional_information,
    entropy,
    information,
    optimal_risk,
)

SUITES = ("telescope", "prop1", "pythagoras", "bridge", "belief")
TOLERANCE = 1e-9
_SUITE_SEED = 20240809
_MAX_ENUM_ATOMS = 6
_SAMPLED_PARTITIONS = 120


def run_suite(scenario: Scenario, suite: str) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}, expected one of {SUITES}")
    checks = _SUITE_RUNNERS[suite](scenario)
    return {
        "suite": suite,
        "tolerance": TOLERANCE,
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
    }


def _loss_element_pairs(scenario: Scenario, target: str):
    pairs = [("log", log_loss(scenario.variable(target).size), scenario.symbol_element(target))]
    if target in scenario.real_values:
        pairs.append(("square", square_error(1), scenario.real_element(target)))
    return pairs


def _suite_telescope(scenario: Scenario) -> list:
    space = scenario.space()
    checks = []
    names = [v.name for v in scenario.variables]
    for target in names:
        for mid in names:
            if mid == target:
                continue
            for loss_name, loss, x in _loss_element_pairs(scenario, target):
                residual = check_telescope(space, x, loss, scenario.variable_partition(mid))
                checks.append(
                    {
                        "check": "telescope",
                        "detail": f"H({target}) = I({target};{mid}) + H({target}|{mid}) [{loss_name}]",
                        "residual": residual,
                        "pass": residual < TOLERANCE,
                    }
                )
    return checks


def _candidate_partitions(scenario: Scenario) -> list:
    n = scenario.atom_count
    if n <= _MAX_ENUM_ATOMS:
        return enumerate_partitions(n)
    rng = np.random.default_rng(_SUITE_SEED)
    seen = set()
    parts = []
    for name in [v.name for v in scenario.variables]:
        part = scenario.variable_partition(name)
        if part not in seen:
            seen.add(part)
            parts.append(part)
    while len(parts) < _SAMPLED_PARTITIONS:
        labels = rng.integers(0, n, size=n)
        blocks = [tuple(np.flatnonzero(labels == lab)) for lab in np.unique(labels)]
        part = Partition(tuple(b for b in blocks if b))
        if part not in seen:
            seen.add(part)
            parts.append(part)
    return parts


def _suite_prop1(scenario: Scenario) -> list:
    space = scenario.space()
    partitions = _candidate_partitions(scenario)
    refinement_pairs = [
        (a, b)
        for a in range(len(partitions))
        for b in range(len(partitions))
        if a != b and is_refinement(partitions[a], partitions[b])
    ]
    names = [v.name for v in scenario.variables]
    checks = []
    for target in names:
        for loss_name, loss, x in _loss_element_pairs(scenario, target):
            risks = np.array(
                [float(optimal_risk(space, x, loss, p)) for p in partitions]
            )
            sigma_x_risk = float(optimal_risk(space, x, loss, partition_of_element(space, x)))
            if refinement_pairs:
                margins = [risks[b] - risks[a] for a, b in refinement_pairs]
                worst = float(min(margins))
            else:
                worst = 0.0
            checks.append(
                {
                    "check": "prop1.monotonicity",
                    "detail": f"{target} [{loss_name}], {len(refinement_pairs)} refinement pairs",
                    "residual": max(0.0, -worst),
                    "pass": worst >= -TOLERANCE,
                }
            )
            worst_max = float((risks - sigma_x_risk).min())
            checks.append(
                {
                    "check": "prop1.maximality",
                    "detail": f"{target} [{loss_name}], {len(partitions)} partitions vs sigma(X)",
                    "residual": max(0.0, -worst_max),
                    "pass": worst_max >= -TOLERANCE,
                }
            )
            quantity_values = [entropy(space, x, loss).value.value]
            for mid in names:
                if mid == target:
                    continue
                mid_part = scenario.variable_partition(mid)
                quantity_values.append(information(space, x, loss, mid_part).value.value)
                for other in names:
                    if other in (target, mid):
                        continue
                    quantity_values.append(
                        conditional_information(
                            space, x, loss, mid_part, scenario.variable_partition(other)
                        ).value.value
                    )
            worst_q = float(min(quantity_values))
            checks.append(
                {
                    "check": "prop1.nonnegativity",
                    "detail": f"{target} [{loss_name}], {len(quantity_values)} quantities",
                    "residual": max(0.0, -worst_q),
                    "pass": worst_q >= -TOLERANCE,
                }
            )
    return checks


def _suite_pythagoras(scenario: Scenario) -> list:
    space = scenario.space()
    rng = np.random.default_rng(_SUITE_SEED)
    checks = []
    names = [v.name for v in scenario.variables]
    for target in names:
        if target in scenario.real_values:
            x = scenario.real_element(target)
        else:
            x = scenario.symbol_element(target)
        phis = ["squared_norm"]
        if float(np.abs(x.values).max()) <= 50.0:
            phis.append("exponential_sum")
        if float(x.values.min()) > 0.0:
            phis.append("negative_entropy")
        for mid in names:
            part = scenario.variable_partition(mid)
            for phi_name in phis:
                phi = BUILTIN_CONVEX[phi_name]()
                lo = float(x.values.min())
                hi = float(x.values.max())
                span = max(hi - lo, 1.0)
                y_vals = np.empty_like(x.values)
                for block in part.blocks:
                    if phi_name == "negative_entropy":
                        draw = rng.uniform(max(lo, 1e-3), hi + 0.1 * span)
                    else:
                        draw = rng.uniform(lo - 0.2 * span, hi + 0.2 * span)
                    y_vals[list(block)] = draw
                y = RandomElement.real(y_vals)
                residual = check_pythagoras(space, x, phi, part, y)
                checks.append(
                    {
                        "check": "pythagoras",
                        "detail": f"{target} over sigma({mid}), phi={phi_name}",
                        "residual": residual,
                        "pass": residual < TOLERANCE,
                    }
                )
    return checks


def _suite_bridge(scenario: Scenario) -> list:
    space = scenario.space()
    checks = []
    names = [v.name for v in scenario.variables]
    for target in names:
        k = scenario.variable(target).size
        for given in names:
            if given == target:
                continue
            rows = scenario.conditional_rows_element(target, [given])
            h_kl = entropy(space, rows, kl_loss(k)).value
            i_log = information(
                space,
                scenario.symbol_element(target),
                log_loss(k),
                scenario.variable_partition(given),
            ).value
            residual = abs(h_kl.value - i_log.value)
            checks.append(
                {
                    "check": "bridge",
                    "detail": f"H_kl(P({target}|{given})) vs I_log({target};{given})",
                    "residual": residual,
                    "pass": residual < TOLERANCE,
                }
            )
    return checks


def _suite_belief(scenario: Scenario) -> list:
    space = scenario.space()
    rng = np.random.default_rng(_SUITE_SEED)
    checks = []
    for var in scenario.variables:
        k = var.size
        x = scenario.symbol_element(var.name)
        beliefs = [np.full(k, 1.0 / k)]
        draw = rng.random(k) + 0.05
        beliefs.append(draw / draw.sum())
        for loss_name, loss in (("log", log_loss(k)), ("tsallis:q=2", tsallis_score(k, 2.0))):
            for b_idx, belief in enumerate(beliefs):
                decomp = belief_decomposition(
                    space, x, loss, WeightedStates.over_symbols(belief)
                )
                residual = abs(
                    decomp.total.value - decomp.relative.value - decomp.entropy_term.value
                )
                checks.append(
                    {
                        "check": "belief",
                        "detail": f"{var.name} [{loss_name}], belief #{b_idx}",
                        "residual": residual,
                        "pass": residual < TOLERANCE,
                    }
                )
    return checks


_SUITE_RUNNERS = {
    "telescope": _suite_telescope,
    "prop1": _suite_prop1,
    "pythagoras": _suite_pythagoras,
    "bridge": _suite_bridge,
    "belief": _suite_belief,
}
