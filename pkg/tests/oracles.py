"""Independent oracles for the test suite.

Everything here recomputes expected values from first principles (closed
formulas, brute-force enumeration, direct summation) without touching the
engine's risk machinery, so tests compare two genuinely different routes
to the same number.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# Shannon quantities straight from their closed formulas
# ---------------------------------------------------------------------------


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(-sum(pi * math.log(pi) for pi in p if pi > 0))


def shannon_conditional_entropy(joint_xy) -> float:
    """H(X|Y) from a joint table with axis 0 = X, axis 1 = Y."""
    j = np.asarray(joint_xy, dtype=float)
    p_y = j.sum(axis=0)
    total = 0.0
    for xi in range(j.shape[0]):
        for yi in range(j.shape[1]):
            if j[xi, yi] > 0:
                total -= j[xi, yi] * math.log(j[xi, yi] / p_y[yi])
    return total


def shannon_mutual_information(joint_xy) -> float:
    j = np.asarray(joint_xy, dtype=float)
    p_x = j.sum(axis=1)
    p_y = j.sum(axis=0)
    total = 0.0
    for xi in range(j.shape[0]):
        for yi in range(j.shape[1]):
            if j[xi, yi] > 0:
                total += j[xi, yi] * math.log(j[xi, yi] / (p_x[xi] * p_y[yi]))
    return total


def shannon_conditional_mutual_information(joint_xyz) -> float:
    """I(X;Y|Z) from a joint table with axes (X, Y, Z)."""
    j = np.asarray(joint_xyz, dtype=float)
    p_z = j.sum(axis=(0, 1))
    p_xz = j.sum(axis=1)
    p_yz = j.sum(axis=0)
    total = 0.0
    for xi in range(j.shape[0]):
        for yi in range(j.shape[1]):
            for zi in range(j.shape[2]):
                pxyz = j[xi, yi, zi]
                if pxyz > 0:
                    total += pxyz * math.log(
                        pxyz * p_z[zi] / (p_xz[xi, zi] * p_yz[yi, zi])
                    )
    return total


def kl_divergence(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(sum(pi * math.log(pi / qi) for pi, qi in zip(p, q) if pi > 0))


def cross_entropy(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(-sum(pi * math.log(qi) for pi, qi in zip(p, q) if pi > 0))


# ---------------------------------------------------------------------------
# Variance quantities by direct summation
# ---------------------------------------------------------------------------


def variance(probs, values) -> float:
    p = np.asarray(probs, dtype=float)
    x = np.asarray(values, dtype=float)
    mu = float(p @ x)
    return float(p @ (x - mu) ** 2)


def expected_conditional_variance(probs, values, blocks) -> float:
    """E[V(X | block)] over a partition given as lists of atom indices."""
    p = np.asarray(probs, dtype=float)
    x = np.asarray(values, dtype=float)
    total = 0.0
    for block in blocks:
        idx = list(block)
        mass = float(p[idx].sum())
        if mass == 0:
            continue
        w = p[idx] / mass
        mu = float(w @ x[idx])
        total += mass * float(w @ (x[idx] - mu) ** 2)
    return total


def variance_of_conditional_means(probs, values, blocks) -> float:
    p = np.asarray(probs, dtype=float)
    x = np.asarray(values, dtype=float)
    means = np.empty_like(x)
    for block in blocks:
        idx = list(block)
        mass = float(p[idx].sum())
        if mass == 0:
            means[idx] = 0.0
            continue
        means[idx] = float(p[idx] @ x[idx] / mass)
    return variance(p, means)


# ---------------------------------------------------------------------------
# Set partitions by brute force (all label assignments, deduplicated)
# ---------------------------------------------------------------------------


def brute_force_partitions(n: int) -> set:
    """Every partition of range(n) as a frozenset of frozensets, via n^n labelings."""
    out = set()
    for code in range(n**n):
        labels = []
        c = code
        for _ in range(n):
            labels.append(c % n)
            c //= n
        blocks = {}
        for atom, lab in enumerate(labels):
            blocks.setdefault(lab, set()).add(atom)
        out.add(frozenset(frozenset(b) for b in blocks.values()))
    return out


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_joint(rng, shape, floor: float = 0.05) -> np.ndarray:
    """A strictly positive joint table normalized to 1."""
    t = rng.random(shape) + floor
    return t / t.sum()


def random_probs(rng, n: int, floor: float = 0.05) -> np.ndarray:
    p = rng.random(n) + floor
    return p / p.sum()


# ---------------------------------------------------------------------------
# Joint-table plumbing independent of the engine's scenario module
# ---------------------------------------------------------------------------


def flatten_joint(table) -> np.ndarray:
    return np.asarray(table, dtype=float).reshape(-1)


def axis_symbols(shape, axis) -> np.ndarray:
    """Per-flat-atom symbol index of one axis of a row-major table."""
    grids = np.indices(shape)
    return grids[axis].reshape(-1)


def axis_blocks(shape, axis) -> list:
    """Atom-index blocks grouping a row-major table by one axis's symbol."""
    symbols = axis_symbols(shape, axis)
    return [tuple(np.flatnonzero(symbols == s)) for s in range(shape[axis])]


def multi_axis_blocks(shape, axes) -> list:
    """Blocks grouping by a tuple of axes (the join of their partitions)."""
    cols = [axis_symbols(shape, a) for a in axes]
    keys = {}
    for atom in range(int(np.prod(shape))):
        key = tuple(int(c[atom]) for c in cols)
        keys.setdefault(key, []).append(atom)
    return [tuple(v) for v in keys.values()]
