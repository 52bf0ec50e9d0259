"""Grid-density realizations of the continuous log loss and Hyvärinen loss.

Full knowledge of a continuous variable makes both losses unboundedly
good: density-valued actions can spike at the observed point.  Entropy is
therefore exactly +inf, and the verifiable content is a witness sequence,
a family of actions whose risks decrease without bound:

  * log-loss witness: Gaussians G_n centered at the observation with
    shrinking width, achieving risk -log(n / sqrt(pi));
  * Hyvärinen witness: the same bump shifted by 1/n^2 so that the score
    at the observation stays exactly -1/2 while the Laplacian term drags
    the risk to -inf.

Information, by contrast, stays finite, and is computed by composite
trapezoid quadrature on uniform grids: the expected KL between
conditional and marginal densities (log loss), or the expected squared
difference of conditional and marginal scores (Hyvärinen).  Scores are
finite differences of log densities in ratio form, so multiplicative
constants drop out analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, ValidationError
from .extreal import ExtendedReal

SQRT_PI = math.sqrt(math.pi)
GRID_NORMALIZATION_TOL = 1e-6
MARGINAL_FLOOR = 1e-12

FAMILY_LOGLOSS = "gaussian_logloss"
FAMILY_HYVARINEN = "shifted_gaussian_hyvarinen"
FAMILIES = (FAMILY_LOGLOSS, FAMILY_HYVARINEN)


def _trapezoid_weights(count: int, step: float) -> np.ndarray:
    w = np.full(count, step)
    w[0] = w[-1] = step / 2.0
    return w


# ---------------------------------------------------------------------------
# Grid densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A density sampled on a uniform 1-D grid; trapezoid integral must be ~1."""

    lower: float
    upper: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise GridError("grid density needs a 1-D value vector with >= 2 nodes")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise GridError("density values must be finite and nonnegative")
        if not self.lower < self.upper:
            raise GridError("grid bounds must satisfy lower < upper")
        integral = float(_trapezoid_weights(v.size, (self.upper - self.lower) / (v.size - 1)) @ v)
        if abs(integral - 1.0) > GRID_NORMALIZATION_TOL:
            raise GridError(f"density integrates to {integral!r}, not 1 within 1e-6")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.count)

    def integral(self) -> float:
        return float(_trapezoid_weights(self.count, self.step) @ self.values)


@dataclass(frozen=True, eq=False)
class GridDensity2D:
    """A joint density f(x, y) on a uniform rectangle; values[i, j] = f(x_i, y_j)."""

    x_lower: float
    x_upper: float
    y_lower: float
    y_upper: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise GridError("joint density needs a 2-D value matrix, >= 2 nodes per axis")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise GridError("density values must be finite and nonnegative")
        if not (self.x_lower < self.x_upper and self.y_lower < self.y_upper):
            raise GridError("grid bounds must satisfy lower < upper")
        wx = _trapezoid_weights(v.shape[0], (self.x_upper - self.x_lower) / (v.shape[0] - 1))
        wy = _trapezoid_weights(v.shape[1], (self.y_upper - self.y_lower) / (v.shape[1] - 1))
        integral = float(wx @ v @ wy)
        if abs(integral - 1.0) > GRID_NORMALIZATION_TOL:
            raise GridError(f"joint integrates to {integral!r}, not 1 within 1e-6")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def y_count(self) -> int:
        return int(self.values.shape[1])

    @property
    def x_step(self) -> float:
        return (self.x_upper - self.x_lower) / (self.x_count - 1)

    @property
    def y_step(self) -> float:
        return (self.y_upper - self.y_lower) / (self.y_count - 1)

    @property
    def x_nodes(self) -> np.ndarray:
        return np.linspace(self.x_lower, self.x_upper, self.x_count)

    @property
    def y_nodes(self) -> np.ndarray:
        return np.linspace(self.y_lower, self.y_upper, self.y_count)


def gaussian_density(
    mean: float = 0.0, sd: float = 1.0, half_width: float = 8.0, count: int = 801
) -> GridDensity:
    """A (grid-truncated) normal density, wide enough to be normalized to ~1."""
    lower = mean - half_width * sd
    upper = mean + half_width * sd
    x = np.linspace(lower, upper, count)
    values = np.exp(-0.5 * ((x - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    return GridDensity(lower, upper, values)


def bivariate_gaussian_density(
    rho: float, half_width: float = 5.0, count: int = 201
) -> GridDensity2D:
    """Standard bivariate normal with correlation rho, renormalized on the grid."""
    if not -1.0 < rho < 1.0:
        raise ValidationError("correlation must lie strictly inside (-1, 1)")
    x = np.linspace(-half_width, half_width, count)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    det = 1.0 - rho * rho
    quad = (xx * xx - 2.0 * rho * xx * yy + yy * yy) / det
    values = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    w = _trapezoid_weights(count, x[1] - x[0])
    values = values / float(w @ values @ w)  # grid renormalization
    return GridDensity2D(-half_width, half_width, -half_width, half_width, values)


def product_density(fx: GridDensity, fy: GridDensity) -> GridDensity2D:
    """Joint density of independent coordinates: the outer product of the marginals."""
    return GridDensity2D(
        fx.lower, fx.upper, fy.lower, fy.upper, np.outer(fx.values, fy.values)
    )


# ---------------------------------------------------------------------------
# Witness sequences: certified divergence of the full-knowledge risk
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessSequence:
    """One member of a witness family: actions indexed by a sharpness parameter n."""

    family: str
    n: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown witness family {self.family!r}")
        if not self.n > 0:
            raise ValidationError("witness index n must be positive")


@dataclass(frozen=True, eq=False)
class ContinuousEntropyEvidence:
    """Entropy of a continuous variable: exactly +inf, with the witness ladder."""

    family: str
    value: ExtendedReal
    witness: tuple  # ((n, risk_upper_bound), ...)


def logloss_witness_value(n: float) -> float:
    """Risk of the width-1/n Gaussian witness under continuous log loss.

    The witness evaluated at its own center equals n / sqrt(pi) no matter
    where the center is, so the risk is -log(n / sqrt(pi)) for every
    source density: strictly decreasing and unbounded below in n.
    """
    if not n > 0:
        raise ValidationError("witness index n must be positive")
    return -math.log(n / SQRT_PI)


def logloss_witness_quadrature(n: float, density: GridDensity) -> float:
    """Evaluate the log-loss witness risk by quadrature against a test density."""
    if not n > 0:
        raise ValidationError("witness index n must be positive")
    if density.step > 1.0 / (4.0 * n):
        raise GridError(
            f"grid step {density.step!r} too coarse for witness n={n} (needs <= 1/(4n))"
        )
    # the witness density at its own center: G_n^x(x) = n / sqrt(pi), independent of x
    loss_at_nodes = np.full(density.count, -math.log(n / SQRT_PI))
    w = _trapezoid_weights(density.count, density.step)
    return float(w @ (density.values * loss_at_nodes))


def hyvarinen_witness_score_at_center(n: float) -> float:
    """Score of the shifted Gaussian witness at the observation point.

    The witness log-density has slope -(n^2/2) * (xi - x + 1/n^2); at
    xi = x this is -1/2 for every n.
    """
    if not n > 0:
        raise ValidationError("witness index n must be positive")
    return -(n * n / 2.0) * (1.0 / (n * n))


def hyvarinen_witness_bound(n: float) -> float:
    """Risk of the shifted Gaussian witness under the Hyvärinen loss.

    At the observation the squared-score term is constant 1/8 while the
    Laplacian term equals (n / (2 sqrt(pi))) e^{-1/(4 n^2)} (1/4 - n^2/2),
    which decreases without bound: the witness ladder certifies -inf.
    """
    if not n > 0:
        raise ValidationError("witness index n must be positive")
    score = hyvarinen_witness_score_at_center(n)
    amplitude = n / (2.0 * SQRT_PI)
    laplacian = amplitude * math.exp(-1.0 / (4.0 * n * n)) * (0.25 - n * n / 2.0)
    return 0.5 * score * score + laplacian


def witness_density(family: str, n: float, center: float = 0.0) -> GridDensity:
    """The witness action as a grid density around its peak (window +-8/n)."""
    seq = WitnessSequence(family, n)
    if seq.family == FAMILY_LOGLOSS:
        peak = center
        rate = n * n  # exponent -n^2 u^2, amplitude n / sqrt(pi)
        amplitude = n / SQRT_PI
    else:
        peak = center - 1.0 / (n * n)
        rate = n * n / 4.0  # exponent -(n^2/4) u^2, amplitude n / (2 sqrt(pi))
        amplitude = n / (2.0 * SQRT_PI)
    half = 8.0 / n
    x = np.linspace(peak - half, peak + half, 4001)
    values = amplitude * np.exp(-rate * (x - peak) ** 2)
    return GridDensity(peak - half, peak + half, values)


def demonstrate_entropy_divergence(
    family: str, n_values, test_density: GridDensity | None = None
) -> list:
    """Risk upper bounds along a witness ladder: the certificate that H = +inf.

    With a test density, each bound is evaluated by quadrature (the
    integrand is constant in the observation, so this checks grid fidelity
    more than anything); the grid must resolve the witness width, step
    <= 1/(4n).
    """
    ns = [float(n) for n in n_values]
    if not ns or any(n <= 0 for n in ns):
        raise ValidationError("n_values must be positive")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValidationError("n_values must be strictly ascending")
    if family == FAMILY_LOGLOSS:
        bound = logloss_witness_value
    elif family == FAMILY_HYVARINEN:
        bound = hyvarinen_witness_bound
    else:
        raise ValidationError(f"unknown witness family {family!r}")
    ladder = []
    for n in ns:
        value = bound(n)
        if test_density is not None:
            if test_density.step > 1.0 / (4.0 * n):
                raise GridError(
                    f"grid step {test_density.step!r} too coarse for witness n={n}"
                )
            w = _trapezoid_weights(test_density.count, test_density.step)
            value = float(w @ (test_density.values * value))
        ladder.append((n, value))
    return ladder


def continuous_entropy(family: str, n_values=(10.0, 100.0, 1000.0)) -> ContinuousEntropyEvidence:
    """Continuous entropy is +inf by construction; the ladder is the evidence."""
    ladder = demonstrate_entropy_divergence(family, n_values)
    return ContinuousEntropyEvidence(
        family=family, value=ExtendedReal.pos_inf(), witness=tuple(ladder)
    )


# ---------------------------------------------------------------------------
# Information between continuous variables (finite, by quadrature)
# ---------------------------------------------------------------------------


def continuous_information(joint: GridDensity2D) -> float:
    """E[KL(f(.|Y) || f_X)] by double trapezoid quadrature; 0 log 0 = 0.

    Conditionals are formed by row normalization wherever the Y-marginal
    exceeds 1e-12; everything below that threshold carries no usable mass.
    """
    v = joint.values
    wx = _trapezoid_weights(joint.x_count, joint.x_step)
    wy = _trapezoid_weights(joint.y_count, joint.y_step)
    f_x = v @ wy
    f_y = wx @ v
    weight = np.outer(wx, wy)
    mask = (v > 0) & (f_y[None, :] > MARGINAL_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = v / (f_y[None, :] * f_x[:, None])
        terms = np.where(mask, v * np.log(np.where(mask, ratio, 1.0)), 0.0)
    return float((weight * terms).sum())


def log_density_slope(values: np.ndarray, step: float) -> np.ndarray:
    """Finite-difference score d/dx log f in ratio form.

    Central differences log(f[i+1]/f[i-1]) / (2h) on the interior,
    one-sided at the two boundary nodes.  Taking ratios before the log
    makes multiplicative constants cancel analytically (and bit-exactly
    whenever the scaling itself is exact, e.g. powers of two).
    Works column-wise on 2-D input.
    """
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:-1] = np.log(v[2:] / v[:-2]) / (2.0 * step)
        out[0] = np.log(v[1] / v[0]) / step
        out[-1] = np.log(v[-1] / v[-2]) / step
    return out


def hyvarinen_information(joint: GridDensity2D) -> float:
    """E[(score of f(.|y) - score of f_X)^2] with finite-difference scores.

    The score is invariant to positive scaling of a conditional slice, so
    no normalization of the slices is needed (or performed).  Boundary
    nodes use one-sided differences and carry half trapezoid weight.
    """
    v = joint.values
    if np.any(v[1:-1, :] <= 0):
        raise GridError("joint density must be positive on interior grid nodes")
    wx = _trapezoid_weights(joint.x_count, joint.x_step)
    wy = _trapezoid_weights(joint.y_count, joint.y_step)
    f_x = v @ wy
    score_cond = log_density_slope(v, joint.x_step)  # column-wise: d/dx log f(x | y)
    score_marg = log_density_slope(f_x, joint.x_step)
    diff = score_cond - score_marg[:, None]
    weight = np.outer(wx, wy)
    with np.errstate(invalid="ignore"):
        terms = np.where(v > 0, v * diff * diff, 0.0)
    return float((weight * terms).sum())
