"""Uncertainty reduction between knowledge levels, and its named special cases.

Everything here is one quantity viewed from different pairs of knowledge
states.  For a partition sigma, the optimal risk of a random element X is

    R(sigma) = sum over blocks B of  P(B) * BayesRisk(X restricted to B),

because a sigma-measurable action is exactly one action per block.  The
reduction in uncertainty from sigma1 to sigma2 is R(sigma1) - R(sigma2),
and the named quantities are:

    entropy                 H(X)        = R(trivial) - R(sigma(X))
    conditional entropy     H(X|sigma)  = R(sigma)   - R(sigma(X))
    information             I(X;sigma)  = R(trivial) - R(sigma)
    conditional information I(X;s2|s1)  = R(s1)      - R(join(s1, s2))

Under log loss these are the Shannon quantities; under square error they
are variances; under a Bregman loss the information is the Jensen gap of
the convex generator.  The checkers at the bottom verify the structural
identities (telescoping, the Bregman Pythagorean decomposition, and the
belief decomposition against a fixed prior guess) as residuals, leaving
thresholds to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InfiniteQuantityError,
    UndefinedArithmeticError,
    ValidationError,
)
from .extreal import ExtendedReal
from .losses import (
    ConvexFunction,
    LossModel,
    WeightedStates,
    bayes_act,
    scoring_divergence,
)
from .space import (
    KIND_REAL,
    Partition,
    RandomElement,
    SampleSpace,
    conditional_expectation,
    expectation,
    partition_join,
    partition_of_element,
    restrict_to_support,
    trivial_partition,
)


@dataclass(frozen=True, eq=False)
class UncertaintyReport:
    """One computed quantity with the two risks and knowledge states behind it."""

    quantity: str
    value: ExtendedReal
    risk_from: ExtendedReal
    risk_to: ExtendedReal
    loss_name: str
    partition_from: Partition
    partition_to: Partition


@dataclass(frozen=True, eq=False)
class BeliefDecomposition:
    """Total uncertainty against a fixed belief q, split into its two parts.

    total   = E[D(delta_X || q)]    everything between q and the realized X
    relative= D(p_X || q)           what q misses about the true distribution
    entropy = E[D(delta_X || p_X)]  the irreducible spread of X itself
    """

    total: ExtendedReal
    relative: ExtendedReal
    entropy_term: ExtendedReal


# ---------------------------------------------------------------------------
# Optimal risk and uncertainty reduction
# ---------------------------------------------------------------------------


def optimal_risk(
    space: SampleSpace, x: RandomElement, loss: LossModel, partition: Partition
) -> ExtendedReal:
    """Best achievable expected loss when actions may depend on the partition block.

    Zero-probability atoms are dropped up front (0 * loss = 0), so every
    surviving block carries positive mass.  Infinite block risks propagate;
    mixed +inf and -inf blocks raise.
    """
    _check_state_kind(x, loss)
    space, x, (partition,) = restrict_to_support(space, x, (partition,))
    probs = space.probabilities
    finite_total = 0.0
    has_pos_inf = False
    has_neg_inf = False
    for block in partition.blocks:
        idx = list(block)
        mass = float(probs[idx].sum())
        ws = WeightedStates.normalized(x.values[idx], probs[idx])
        risk = bayes_act(loss, ws).risk
        if risk.is_pos_inf:
            has_pos_inf = True
        elif risk.is_neg_inf:
            has_neg_inf = True
        else:
            finite_total += mass * risk.value
    if has_pos_inf and has_neg_inf:
        raise UndefinedArithmeticError("blocks with +inf and -inf risk cannot be summed")
    if has_pos_inf:
        return ExtendedReal.pos_inf()
    if has_neg_inf:
        return ExtendedReal.neg_inf()
    return ExtendedReal(finite_total)


def uncertainty_reduction(
    space: SampleSpace,
    x: RandomElement,
    loss: LossModel,
    from_partition: Partition,
    to_partition: Partition,
    quantity: str = "U",
) -> UncertaintyReport:
    """R(from) - R(to): positive when `to` knows more, negative when it knows less."""
    risk_from = optimal_risk(space, x, loss, from_partition)
    risk_to = optimal_risk(space, x, loss, to_partition)
    return UncertaintyReport(
        quantity=quantity,
        value=risk_from - risk_to,
        risk_from=risk_from,
        risk_to=risk_to,
        loss_name=loss.name,
        partition_from=from_partition,
        partition_to=to_partition,
    )


def entropy(space: SampleSpace, x: RandomElement, loss: LossModel) -> UncertaintyReport:
    """Uncertainty reduction from no knowledge to full knowledge of x."""
    return uncertainty_reduction(
        space, x, loss, trivial_partition(space), partition_of_element(space, x), "H"
    )


def conditional_entropy(
    space: SampleSpace, x: RandomElement, loss: LossModel, knowledge: Partition
) -> UncertaintyReport:
    """Uncertainty reduction from partial knowledge to full knowledge of x."""
    return uncertainty_reduction(
        space, x, loss, knowledge, partition_of_element(space, x), "H_cond"
    )


def information(
    space: SampleSpace, x: RandomElement, loss: LossModel, knowledge: Partition
) -> UncertaintyReport:
    """Uncertainty reduction from no knowledge to the given partial knowledge."""
    return uncertainty_reduction(
        space, x, loss, trivial_partition(space), knowledge, "I"
    )


def conditional_information(
    space: SampleSpace,
    x: RandomElement,
    loss: LossModel,
    inner: Partition,
    outer: Partition,
) -> UncertaintyReport:
    """Extra information about x in `outer` on top of `inner`.

    Computed from `inner` to join(inner, outer); the join refines `inner`
    by construction, so the value is nonnegative.
    """
    return uncertainty_reduction(
        space, x, loss, inner, partition_join(inner, outer), "I_cond"
    )


# ---------------------------------------------------------------------------
# Bregman information (Jensen gap)
# ---------------------------------------------------------------------------


def bregman_information(
    space: SampleSpace, x: RandomElement, phi: ConvexFunction, knowledge: Partition
) -> ExtendedReal:
    """E[phi(E[x | knowledge])] - phi(E[x]): the Jensen gap of the coarse-graining.

    Agrees with information(x, bregman_loss(phi), knowledge); this route
    never touches the gradient, only phi at the conditional means.
    """
    if x.kind != KIND_REAL:
        raise ValidationError("bregman_information needs a real-vector element")
    space, x, (knowledge,) = restrict_to_support(space, x, (knowledge,))
    cond_mean = conditional_expectation(space, x, knowledge)
    mean = expectation(space, x)
    values = phi.batch_value(cond_mean.values)
    outer = float(space.probabilities @ values)
    center = float(phi.value(mean))
    result = outer - center
    if not np.isfinite(result):
        raise ValidationError(
            f"phi {phi.name} is undefined or infinite at a conditional mean"
        )
    return ExtendedReal(result)


# ---------------------------------------------------------------------------
# Identity checkers (residuals, not booleans)
# ---------------------------------------------------------------------------


def check_telescope(
    space: SampleSpace, x: RandomElement, loss: LossModel, mid: Partition
) -> float:
    """|H(x) - I(x; mid) - H(x | mid)|; exact telescoping gives ~0."""
    h = entropy(space, x, loss)
    i_mid = information(space, x, loss, mid)
    h_mid = conditional_entropy(space, x, loss, mid)
    for report in (h, i_mid, h_mid):
        if not report.value.is_finite:
            raise InfiniteQuantityError(
                f"telescope check needs finite terms, got {report.quantity} = {report.value}"
            )
    return abs(h.value.value - i_mid.value.value - h_mid.value.value)


def _bregman_rows(phi: ConvexFunction, rows: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    grad = np.asarray(phi.gradient(anchor), dtype=float)
    base = float(phi.value(anchor))
    return phi.batch_value(rows) - base - (rows - anchor) @ grad


def check_pythagoras(
    space: SampleSpace,
    x: RandomElement,
    phi: ConvexFunction,
    knowledge: Partition,
    y: RandomElement,
) -> float:
    """Residual of E[d(X,Y)] = E[d(X, E[X|sigma])] + E[d(E[X|sigma], Y)].

    Requires Y to be measurable for `knowledge` (exactly constant on blocks).
    """
    if x.kind != KIND_REAL or y.kind != KIND_REAL:
        raise ValidationError("pythagoras check needs real-vector elements")
    if y.dimension != x.dimension or y.atom_count != x.atom_count:
        raise ValidationError("x and y must share atoms and dimension")
    keep = np.flatnonzero(space.probabilities > 0)
    if keep.size != space.atom_count:
        y = RandomElement(KIND_REAL, y.values[keep])
    space, x, (knowledge,) = restrict_to_support(space, x, (knowledge,))
    for block in knowledge.blocks:
        first = y.values[block[0]]
        if any(not np.array_equal(y.values[i], first) for i in block[1:]):
            raise ValidationError("y must be constant on every knowledge block")
    probs = space.probabilities
    proj = conditional_expectation(space, x, knowledge)
    direct = 0.0
    to_proj = 0.0
    proj_to_y = 0.0
    for block in knowledge.blocks:
        idx = list(block)
        y_row = y.values[idx[0]]
        m_row = proj.values[idx[0]]
        w = probs[idx]
        direct += float(w @ _bregman_rows(phi, x.values[idx], y_row))
        to_proj += float(w @ _bregman_rows(phi, x.values[idx], m_row))
        proj_to_y += float(w.sum()) * float(_bregman_rows(phi, m_row.reshape(1, -1), y_row)[0])
    return abs(direct - to_proj - proj_to_y)


# ---------------------------------------------------------------------------
# State distributions and divergence-form representations
# ---------------------------------------------------------------------------


def _distinct_states(x: RandomElement):
    """Distinct value rows (bitwise) in first-appearance order, plus atom labels."""
    seen: dict[bytes, int] = {}
    labels = np.empty(x.atom_count, dtype=int)
    rows = []
    for i, row in enumerate(x.values):
        key = row.tobytes()
        if key not in seen:
            seen[key] = len(rows)
            rows.append(row)
        labels[i] = seen[key]
    return np.asarray(rows), labels


def state_distribution(
    space: SampleSpace, x: RandomElement, block=None
) -> WeightedStates:
    """Distribution of x's distinct values, optionally conditioned on an atom set."""
    states, labels = _distinct_states(x)
    if block is None:
        idx = np.arange(space.atom_count)
    else:
        idx = np.asarray(list(block), dtype=int)
    weights = np.zeros(states.shape[0])
    np.add.at(weights, labels[idx], space.probabilities[idx])
    return WeightedStates.normalized(states, weights)


def _delta_states(states: np.ndarray):
    """One WeightedStates point mass per distinct state row."""
    return [
        WeightedStates(states[i].reshape(1, -1), np.array([1.0]))
        for i in range(states.shape[0])
    ]


def entropy_via_divergence(
    space: SampleSpace, x: RandomElement, loss: LossModel
) -> ExtendedReal:
    """H(x) as E[D(delta_X || p_X)], using only the scoring-rule divergence."""
    space, x, _ = restrict_to_support(space, x)
    states, labels = _distinct_states(x)
    p_x = state_distribution(space, x)
    deltas = _delta_states(states)
    per_state = [scoring_divergence(loss, d, p_x) for d in deltas]
    return _mix(space.probabilities, [per_state[labels[i]] for i in range(space.atom_count)])


def conditional_entropy_via_divergence(
    space: SampleSpace, x: RandomElement, loss: LossModel, knowledge: Partition
) -> ExtendedReal:
    """H(x | knowledge) as E[D(delta_X || p_{X|block})]."""
    space, x, (knowledge,) = restrict_to_support(space, x, (knowledge,))
    states, labels = _distinct_states(x)
    deltas = _delta_states(states)
    weights = []
    values = []
    for block in knowledge.blocks:
        cond = state_distribution(space, x, block)
        for atom in block:
            weights.append(space.probabilities[atom])
            values.append(scoring_divergence(loss, deltas[labels[atom]], cond))
    return _mix(np.asarray(weights), values)


def information_via_divergence(
    space: SampleSpace, x: RandomElement, loss: LossModel, knowledge: Partition
) -> ExtendedReal:
    """I(x; knowledge) as E[D(p_{X|block} || p_X)]."""
    space, x, (knowledge,) = restrict_to_support(space, x, (knowledge,))
    p_x = state_distribution(space, x)
    weights = []
    values = []
    for block in knowledge.blocks:
        weights.append(space.block_mass(block))
        values.append(scoring_divergence(loss, state_distribution(space, x, block), p_x))
    return _mix(np.asarray(weights), values)


def conditional_information_via_divergence(
    space: SampleSpace,
    x: RandomElement,
    loss: LossModel,
    inner: Partition,
    outer: Partition,
) -> ExtendedReal:
    """I(x; outer | inner) as E[D(p_{X|joined block} || p_{X|inner block})]."""
    space, x, (inner, outer) = restrict_to_support(space, x, (inner, outer))
    joined = partition_join(inner, outer)
    inner_labels = inner.block_labels()
    inner_conds = [state_distribution(space, x, b) for b in inner.blocks]
    weights = []
    values = []
    for block in joined.blocks:
        parent = inner_conds[int(inner_labels[block[0]])]
        weights.append(space.block_mass(block))
        values.append(scoring_divergence(loss, state_distribution(space, x, block), parent))
    return _mix(np.asarray(weights), values)


def _mix(weights, extended_values) -> ExtendedReal:
    """Weighted sum of extended reals with positive weights, fixed order."""
    finite_total = 0.0
    has_pos = has_neg = False
    for w, v in zip(weights, extended_values):
        if v.is_pos_inf:
            has_pos = True
        elif v.is_neg_inf:
            has_neg = True
        else:
            finite_total += float(w) * v.value
    if has_pos and has_neg:
        raise UndefinedArithmeticError("mixture of +inf and -inf terms")
    if has_pos:
        return ExtendedReal.pos_inf()
    if has_neg:
        return ExtendedReal.neg_inf()
    return ExtendedReal(finite_total)


# ---------------------------------------------------------------------------
# Belief decomposition against a fixed prior guess
# ---------------------------------------------------------------------------


def belief_decomposition(
    space: SampleSpace, x: RandomElement, loss: LossModel, belief_q: WeightedStates
) -> BeliefDecomposition:
    """Split E[D(delta_X || q)] into D(p_X || q) plus E[D(delta_X || p_X)].

    The belief q is a fixed distribution over states (independent of X by
    construction).  The identity total = relative + entropy_term holds for
    every loss with Bayes acts.
    """
    space, x, _ = restrict_to_support(space, x)
    states, labels = _distinct_states(x)
    p_x = state_distribution(space, x)
    relative = scoring_divergence(loss, p_x, belief_q)

    act_q = bayes_act(loss, belief_q).action
    act_p = bayes_act(loss, p_x).action
    deltas = _delta_states(states)
    loss_q = np.empty(states.shape[0])
    loss_p = np.empty(states.shape[0])
    loss_min = np.empty(states.shape[0])
    for s in range(states.shape[0]):
        act_delta = bayes_act(loss, deltas[s]).action
        loss_q[s] = loss.eval_single(states[s], act_q)
        loss_p[s] = loss.eval_single(states[s], act_p)
        loss_min[s] = loss.eval_single(states[s], act_delta)
    atom_weights = space.probabilities
    total = _mix(atom_weights, [ExtendedReal(loss_q[labels[i]] - loss_min[labels[i]])
                                for i in range(space.atom_count)])
    entropy_term = _mix(atom_weights, [ExtendedReal(loss_p[labels[i]] - loss_min[labels[i]])
                                       for i in range(space.atom_count)])
    return BeliefDecomposition(total=total, relative=relative, entropy_term=entropy_term)


def _check_state_kind(x: RandomElement, loss: LossModel):
    if x.kind != loss.state_kind.kind:
        raise ValidationError(
            f"{loss.name} expects {loss.state_kind.kind} states, element is {x.kind}"
        )
    if x.dimension != loss.state_kind.dimension:
        raise ValidationError(
            f"{loss.name} expects dimension {loss.state_kind.dimension}, "
            f"element has {x.dimension}"
        )
