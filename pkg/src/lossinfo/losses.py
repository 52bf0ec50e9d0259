"""Loss functions, Bayes acts, and scoring-rule divergences.

A loss pairs states with actions.  Acting under a distribution means
picking one action for all states it may produce; the best such action is
a Bayes act, and its expected loss is the Bayes risk of the distribution.
Built-in losses ship a closed-form Bayes rule (weighted mean for square
error and Bregman losses, the weight vector itself for proper scoring
rules on a finite alphabet, the weighted mixture for KL on distributions);
a numeric fallback covers everything else: cyclic coordinate-wise
golden-section search inside a bounded box, or exponentiated-gradient
descent on the probability simplex.

The divergence of a loss between two distributions is the expected excess
loss of acting on the wrong one:  D(p||q) = E_p[l(X, a_q) - l(X, a_p)].
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SolverError, UnboundedSearchError, ValidationError
from .extreal import ExtendedReal

PROB_TOL = 1e-12
NEG_ENTROPY_GRAD_FLOOR = -1e100  # stand-in for log(0)+1 where the pairing zeroes it


# ---------------------------------------------------------------------------
# Action spaces and state kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealBox:
    """Axis-aligned box in R^d; bounds may be infinite (numeric search then fails)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValidationError("box bounds must be non-empty and of equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValidationError("box lower bounds must be below upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dimension: int, lower: float, upper: float) -> "RealBox":
        return cls((lower,) * dimension, (upper,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(v) for v in self.lower + self.upper)


@dataclass(frozen=True)
class Simplex:
    """Probability simplex over a finite alphabet."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError("simplex size must be >= 1")


@dataclass(frozen=True)
class StateKind:
    """What a single state looks like: a real d-vector or a distribution row."""

    kind: str  # "real" | "distribution"
    dimension: int


# ---------------------------------------------------------------------------
# Convex generators for Bregman losses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvexFunction:
    """A convex phi with gradient, plus a vectorized evaluation over rows."""

    name: str
    value: Callable
    gradient: Callable
    batch_value: Callable


def squared_norm() -> ConvexFunction:
    return ConvexFunction(
        name="squared_norm",
        value=lambda x: float(np.dot(x, x)),
        gradient=lambda x: 2.0 * np.asarray(x, dtype=float),
        batch_value=lambda rows: np.einsum("ij,ij->i", rows, rows),
    )


def negative_entropy() -> ConvexFunction:
    """phi(x) = sum x log x on the nonnegative orthant, 0 log 0 = 0.

    Gradient components at zero coordinates are clamped to a large negative
    constant; inside a Bregman evaluation they are always paired with a
    zero factor (or represent a genuinely enormous divergence).
    """

    def _value(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValidationError("negative_entropy requires nonnegative coordinates")
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0).sum())

    def _gradient(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValidationError("negative_entropy requires nonnegative coordinates")
        with np.errstate(divide="ignore"):
            g = np.where(x > 0, np.log(np.where(x > 0, x, 1.0)) + 1.0, NEG_ENTROPY_GRAD_FLOOR)
        return g

    def _batch(rows):
        rows = np.asarray(rows, dtype=float)
        if np.any(rows < 0):
            raise ValidationError("negative_entropy requires nonnegative coordinates")
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(rows > 0, rows * np.log(np.where(rows > 0, rows, 1.0)), 0.0)
        return terms.sum(axis=1)

    return ConvexFunction("negative_entropy", _value, _gradient, _batch)


def exponential_sum() -> ConvexFunction:
    def _exp(x):
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(x, dtype=float))

    return ConvexFunction(
        name="exponential_sum",
        value=lambda x: float(_exp(x).sum()),
        gradient=_exp,
        batch_value=lambda rows: _exp(rows).sum(axis=1),
    )


BUILTIN_CONVEX = {
    "squared_norm": squared_norm,
    "negative_entropy": negative_entropy,
    "exponential_sum": exponential_sum,
}


# ---------------------------------------------------------------------------
# Weighted states (a distribution restricted to a knowledge block)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightedStates:
    """A finite list of states with nonnegative weights summing to one."""

    states: np.ndarray  # (m, d)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        s = np.asarray(self.states, dtype=float)
        if s.ndim == 1:
            s = s.reshape(-1, 1)
        w = np.asarray(self.weights, dtype=float)
        if s.ndim != 2 or w.ndim != 1 or s.shape[0] != w.shape[0] or w.size == 0:
            raise ValidationError("states (m, d) and weights (m,) must align")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and nonnegative")
        if abs(float(w.sum()) - 1.0) > PROB_TOL:
            raise ValidationError("weights must sum to 1 within 1e-12")
        s = s.copy()
        w = w.copy()
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, states, weights) -> "WeightedStates":
        w = np.asarray(weights, dtype=float)
        total = float(w.sum())
        if total <= 0:
            raise ValidationError("weights must have positive total mass")
        return cls(states, w / total)

    @classmethod
    def over_symbols(cls, probs) -> "WeightedStates":
        """States 0..k-1 (as real scalars) weighted by a probability vector."""
        p = np.asarray(probs, dtype=float)
        return cls(np.arange(p.size, dtype=float).reshape(-1, 1), p)

    @property
    def count(self) -> int:
        return int(self.weights.size)

    def mean_state(self) -> np.ndarray:
        return self.weights @ self.states


# ---------------------------------------------------------------------------
# Loss models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LossModel:
    """A loss l(state, action) with optional closed-form Bayes machinery.

    ``eval_fn`` is vectorized over states: (m, d) x action -> (m,).
    ``bayes_rule`` maps WeightedStates to an optimal action; ``pointwise_min``
    gives inf_a l(x, a) for a single state.  Either may be None, in which
    case numeric search is used.
    """

    name: str
    state_kind: StateKind
    action_space: "RealBox | Simplex"
    eval_fn: Callable
    bayes_rule: Callable | None = None
    pointwise_min: Callable | None = None
    params: dict = field(default_factory=dict)

    def eval(self, states, action) -> np.ndarray:
        s = np.asarray(states, dtype=float)
        if s.ndim == 1:
            s = s.reshape(-1, 1)
        return np.asarray(self.eval_fn(s, np.asarray(action, dtype=float)), dtype=float)

    def eval_single(self, state, action) -> float:
        return float(self.eval(np.asarray(state, dtype=float).reshape(1, -1), action)[0])

    def without_closed_forms(self) -> "LossModel":
        """Copy with the closed-form Bayes rule and pointwise min disabled."""
        return dataclasses.replace(self, bayes_rule=None, pointwise_min=None)

    def __repr__(self) -> str:
        return f"LossModel({self.name})"


def _symbol_indices(states: np.ndarray, alphabet_size: int) -> np.ndarray:
    idx = states[:, 0].astype(int)
    if np.any(states[:, 0] != idx) or np.any(idx < 0) or np.any(idx >= alphabet_size):
        raise ValidationError(
            f"states must be integer symbols in 0..{alphabet_size - 1}"
        )
    return idx


def _aggregate_symbol_weights(ws: WeightedStates, alphabet_size: int) -> np.ndarray:
    idx = _symbol_indices(ws.states, alphabet_size)
    out = np.zeros(alphabet_size)
    np.add.at(out, idx, ws.weights)
    return out


def square_error(dimension: int = 1, bounds: tuple = (-1e6, 1e6)) -> LossModel:
    """l(x, a) = ||x - a||^2 on real d-vectors; Bayes act is the weighted mean."""

    def _eval(states, action):
        diff = states - action
        return np.einsum("ij,ij->i", diff, diff)

    return LossModel(
        name="square_error",
        state_kind=StateKind("real", dimension),
        action_space=RealBox.cube(dimension, bounds[0], bounds[1]),
        eval_fn=_eval,
        bayes_rule=lambda ws: ws.mean_state(),
        pointwise_min=lambda x: 0.0,
        params={"dimension": dimension},
    )


def log_loss(alphabet_size: int) -> LossModel:
    """l(x, q) = -log q(x) for symbols x; proper, so the Bayes act is the weights."""

    def _eval(states, action):
        idx = _symbol_indices(states, alphabet_size)
        with np.errstate(divide="ignore"):
            return -np.log(action[idx])

    return LossModel(
        name="log_loss",
        state_kind=StateKind("real", 1),
        action_space=Simplex(alphabet_size),
        eval_fn=_eval,
        bayes_rule=lambda ws: _aggregate_symbol_weights(ws, alphabet_size),
        pointwise_min=lambda x: 0.0,
        params={"alphabet_size": alphabet_size},
    )


def bregman_loss(
    phi: ConvexFunction, dimension: int, bounds: tuple = (-1e6, 1e6), name: str | None = None
) -> LossModel:
    """d_phi(x, a) = phi(x) - phi(a) - <grad phi(a), x - a>; Bayes act is the mean."""

    def _eval(states, action):
        grad = np.asarray(phi.gradient(action), dtype=float)
        base = float(phi.value(action))
        with np.errstate(invalid="ignore", over="ignore"):
            return phi.batch_value(states) - base - (states - action) @ grad

    return LossModel(
        name=name or f"bregman_{phi.name}",
        state_kind=StateKind("real", dimension),
        action_space=RealBox.cube(dimension, bounds[0], bounds[1]),
        eval_fn=_eval,
        bayes_rule=lambda ws: ws.mean_state(),
        pointwise_min=lambda x: 0.0,
        params={"phi": phi.name, "dimension": dimension},
    )


def kl_loss(alphabet_size: int) -> LossModel:
    """l(p, q) = KL(p || q) on distribution-valued states; Bayes act is the mixture."""

    def _eval(states, action):
        with np.errstate(divide="ignore", invalid="ignore"):
            log_states = np.log(np.where(states > 0, states, 1.0))
            log_action = np.log(action)
            terms = np.where(states > 0, states * (log_states - log_action), 0.0)
        return terms.sum(axis=1)

    return LossModel(
        name="kl_loss",
        state_kind=StateKind("distribution", alphabet_size),
        action_space=Simplex(alphabet_size),
        eval_fn=_eval,
        bayes_rule=lambda ws: ws.mean_state(),
        pointwise_min=lambda x: 0.0,
        params={"alphabet_size": alphabet_size},
    )


def tsallis_score(alphabet_size: int, q: float) -> LossModel:
    """The Tsallis score of order q on a finite alphabet (q = 2 is the Brier score).

    Defining formula, from the convex generator (sum_y p(y)^q - 1)/(q - 1):

        l(x, p) = sum_y p(y)^q + 1/(q-1) - q/(q-1) * p(x)^(q-1)

    Proper, with zero loss at p = delta_x, so both the Bayes rule (report
    the weights) and pointwise minimum (zero) are exact.
    """
    if q <= 0 or q == 1.0:
        raise ValidationError("tsallis order must be positive and != 1")

    def _eval(states, action):
        idx = _symbol_indices(states, alphabet_size)
        with np.errstate(divide="ignore"):
            norm_term = float(np.sum(action**q))
            picked = action[idx] ** (q - 1.0)
        return norm_term + 1.0 / (q - 1.0) - (q / (q - 1.0)) * picked

    return LossModel(
        name="tsallis_score",
        state_kind=StateKind("real", 1),
        action_space=Simplex(alphabet_size),
        eval_fn=_eval,
        bayes_rule=lambda ws: _aggregate_symbol_weights(ws, alphabet_size),
        pointwise_min=lambda x: 0.0,
        params={"alphabet_size": alphabet_size, "q": q},
    )


# ---------------------------------------------------------------------------
# Expected loss and Bayes acts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BayesActResult:
    """An optimal (or numerically optimized) action and its achieved risk."""

    action: np.ndarray
    risk: ExtendedReal
    method: str  # "closed_form" | "numeric"
    solver_iterations: int


@dataclass(frozen=True)
class PointwiseMin:
    """inf_a l(x, a); ``exact`` is False when only a numeric upper bound is known."""

    value: ExtendedReal
    exact: bool


def expected_loss(loss: LossModel, ws: WeightedStates, action) -> float:
    """Sum of weight * loss over states, in fixed order; 0-weight terms drop out.

    May return +inf (e.g. log loss against an action without full support).
    Raises SolverError if the loss evaluates to NaN.
    """
    terms = loss.eval(ws.states, action)
    mask = ws.weights > 0
    val = float(ws.weights[mask] @ terms[mask])
    if math.isnan(val):
        raise SolverError(f"{loss.name} evaluated to NaN during risk computation")
    return val


def bayes_act(loss: LossModel, ws: WeightedStates) -> BayesActResult:
    """Optimal action under weighted states: closed form if available, else numeric.

    Ties (which do not occur for the strictly convex built-ins) are broken
    by keeping the candidate the search itself converges to; the achieved
    risk is identical across minimizers, so every downstream quantity is
    unaffected by the choice.
    """
    if loss.bayes_rule is not None:
        action = np.asarray(loss.bayes_rule(ws), dtype=float)
        risk = expected_loss(loss, ws, action)
        return BayesActResult(action, ExtendedReal(risk), "closed_form", 0)
    space = loss.action_space
    if isinstance(space, Simplex):
        action, risk, iters = _solve_simplex(loss, ws, space.size)
    elif isinstance(space, RealBox):
        if not space.bounded:
            raise UnboundedSearchError(
                f"numeric Bayes search over unbounded box for {loss.name}"
            )
        action, risk, iters = _solve_box(loss, ws, space)
    else:  # pragma: no cover - no other action spaces exist
        raise SolverError(f"no solver for action space {space!r}")
    return BayesActResult(action, ExtendedReal(risk), "numeric", iters)


def pointwise_min_loss(loss: LossModel, state) -> PointwiseMin:
    """inf over actions of l(x, .): closed form if known, else a flagged upper bound."""
    if loss.pointwise_min is not None:
        return PointwiseMin(ExtendedReal(float(loss.pointwise_min(state))), True)
    single = WeightedStates(np.asarray(state, dtype=float).reshape(1, -1), np.array([1.0]))
    result = bayes_act(loss, single)
    return PointwiseMin(result.risk, False)


def scoring_divergence(
    loss: LossModel, p: WeightedStates, q: WeightedStates
) -> ExtendedReal:
    """Expected excess loss of acting on q when the truth is p.

    D(p||q) = E_p[l(X, a_q)] - E_p[l(X, a_p)].  Nonnegative for proper
    built-ins; may be +inf when a_q gives a p-state no support.
    """
    act_q = bayes_act(loss, q)
    act_p = bayes_act(loss, p)
    cross = expected_loss(loss, p, act_q.action)
    return ExtendedReal(cross) - act_p.risk


# ---------------------------------------------------------------------------
# Numeric solvers
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0

RISK_IMPROVEMENT_TOL = 1e-12
MAX_SOLVER_ITERATIONS = 100_000


def _golden_min(f, lo: float, hi: float):
    """Golden-section minimum of a unimodal f on [lo, hi]: (x, f(x), evals)."""
    a, b = lo, hi
    h = b - a
    tol = 1e-13 * max(1.0, abs(lo), abs(hi))
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = f(c), f(d)
    evals = 2
    while h > tol and evals < 300:
        if fc < fd:
            b = d
            d, fd = c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a = c
            c, fc = d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
        evals += 1
    if fc < fd:
        return c, fc, evals
    return d, fd, evals


def _solve_box(loss: LossModel, ws: WeightedStates, box: RealBox):
    """Cyclic coordinate-wise golden-section descent inside a bounded box."""
    lo = np.asarray(box.lower)
    hi = np.asarray(box.upper)
    action = (lo + hi) / 2.0
    risk = expected_loss(loss, ws, action)
    iterations = 0
    while iterations < MAX_SOLVER_ITERATIONS:
        sweep_start = risk
        for j in range(box.dimension):
            def coord_risk(t, j=j):
                trial = action.copy()
                trial[j] = t
                return expected_loss(loss, ws, trial)

            t, ft, _ = _golden_min(coord_risk, float(lo[j]), float(hi[j]))
            iterations += 1
            if ft < risk:
                action[j] = t
                risk = ft
        if sweep_start - risk < RISK_IMPROVEMENT_TOL:
            break
    if not math.isfinite(risk):
        raise SolverError(f"numeric Bayes search for {loss.name} did not reach a finite risk")
    return action, risk, iterations


def _solve_simplex(loss: LossModel, ws: WeightedStates, size: int):
    """Exponentiated-gradient descent on the simplex with backtracking steps.

    The free gradient comes from central differences of the loss formula,
    which extends to positive off-simplex vectors for every built-in;
    multiplicative updates keep all iterates strictly interior.
    """
    action = np.full(size, 1.0 / size)
    risk = expected_loss(loss, ws, action)
    if size == 1:
        return action, risk, 0
    eta = 1.0
    iterations = 0
    while iterations < MAX_SOLVER_ITERATIONS:
        grad = np.empty(size)
        for j in range(size):
            h = action[j] * 1e-6
            up = action.copy()
            up[j] += h
            down = action.copy()
            down[j] -= h
            grad[j] = (expected_loss(loss, ws, up) - expected_loss(loss, ws, down)) / (2 * h)
        if not np.all(np.isfinite(grad)):
            raise SolverError(f"non-finite gradient in simplex search for {loss.name}")
        shifted = grad - grad.min()  # constant shifts cancel after normalization
        improved = False
        while eta > 1e-16:
            trial = action * np.exp(-eta * shifted)
            trial = np.maximum(trial, 1e-300)
            trial /= trial.sum()
            trial_risk = expected_loss(loss, ws, trial)
            iterations += 1
            if trial_risk < risk:
                gain = risk - trial_risk
                action, risk = trial, trial_risk
                eta = min(eta * 2.0, 1e3)
                improved = gain >= RISK_IMPROVEMENT_TOL
                break
            eta *= 0.5
        if not improved:
            break
    if not math.isfinite(risk):
        raise SolverError(f"numeric Bayes search for {loss.name} did not reach a finite risk")
    return action, risk, iterations
