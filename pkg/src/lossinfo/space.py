"""Finite probability spaces, partitions as knowledge states, conditional expectation.

On a finite sample space every sub-sigma-algebra is generated by a unique
partition of the atoms, so knowledge levels are represented as partitions:

  * the trivial partition (one block) is "no knowledge",
  * the partition induced by a random element X groups atoms by the value
    of X and is "full knowledge about X",
  * anything in between is partial knowledge.

Conditional expectation is the per-block probability-weighted mean, i.e.
the orthogonal projection of X onto the block-constant vectors.  All
values are immutable; partitions are kept in a canonical form (members
ascending, blocks ordered by smallest member) so equality and hashing
are structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    PartitionMismatchError,
    ValidationError,
    ZeroMassBlockError,
)

PROB_TOL = 1e-12  # probability vectors must sum to 1 within this
MAX_ENUM_ATOMS = 10  # Bell(10) = 115975; larger lattices are not enumerable here


# ---------------------------------------------------------------------------
# Sample space
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleSpace:
    """A finite probability space: atoms 0..n-1 with a probability vector."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("probabilities must be a non-empty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValidationError("probabilities must be finite")
        if np.any(p < 0):
            raise ValidationError("probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > PROB_TOL:
            raise ValidationError(
                f"probabilities must sum to 1 within {PROB_TOL}, got {p.sum()!r}"
            )
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, atom_count: int) -> "SampleSpace":
        if atom_count < 1:
            raise ValidationError("atom_count must be >= 1")
        return cls(np.full(atom_count, 1.0 / atom_count))

    @property
    def atom_count(self) -> int:
        return int(self.probabilities.size)

    def block_mass(self, block: Sequence[int]) -> float:
        """Total probability of a set of atoms (fixed ascending-index order)."""
        idx = np.asarray(block, dtype=int)
        return float(self.probabilities[idx].sum())

    def __repr__(self) -> str:
        return f"SampleSpace(n={self.atom_count})"


# ---------------------------------------------------------------------------
# Random elements
# ---------------------------------------------------------------------------

KIND_REAL = "real"
KIND_DISTRIBUTION = "distribution"


@dataclass(frozen=True, eq=False)
class RandomElement:
    """Per-atom values: real d-vectors, or distributions over a finite alphabet.

    ``values`` has shape (atom_count, dimension).  For the distribution
    kind each row is a probability vector (nonnegative, sums to 1 within
    1e-12) over an alphabet of size ``dimension``.
    """

    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in (KIND_REAL, KIND_DISTRIBUTION):
            raise ValidationError(f"unknown random-element kind {self.kind!r}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("values must have shape (atom_count, dimension)")
        if not np.all(np.isfinite(v)):
            raise ValidationError("random-element values must be finite")
        if self.kind == KIND_DISTRIBUTION:
            if np.any(v < 0):
                raise ValidationError("distribution values must be nonnegative")
            sums = v.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > PROB_TOL):
                raise ValidationError(
                    "each distribution row must sum to 1 within 1e-12"
                )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def real(cls, values) -> "RandomElement":
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        return cls(KIND_REAL, v)

    @classmethod
    def distribution(cls, rows) -> "RandomElement":
        return cls(KIND_DISTRIBUTION, np.asarray(rows, dtype=float))

    @property
    def atom_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.values.shape[1])

    def as_real(self) -> "RandomElement":
        """Reinterpret distribution rows as plain real vectors."""
        if self.kind == KIND_REAL:
            return self
        return RandomElement(KIND_REAL, self.values)

    def __repr__(self) -> str:
        return f"RandomElement({self.kind}, n={self.atom_count}, d={self.dimension})"


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Disjoint covering blocks of atom indices, in canonical form.

    Canonical form (applied on construction): members of each block
    ascending, blocks ordered by their smallest member.  Together with the
    covering/disjointness check this makes equality and hashing structural.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = []
        total = 0
        seen: set[int] = set()
        for raw in self.blocks:
            block = tuple(sorted(int(i) for i in raw))
            if not block:
                raise ValidationError("partition blocks must be non-empty")
            for i in block:
                if i in seen:
                    raise ValidationError(f"atom {i} appears in two blocks")
                seen.add(i)
            total += len(block)
            blocks.append(block)
        if not blocks:
            raise ValidationError("a partition needs at least one block")
        if min(seen) != 0 or max(seen) != total - 1:
            raise ValidationError(
                "blocks must cover exactly the atom range 0..n-1 with no gaps"
            )
        blocks.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def atom_count(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def block_labels(self) -> np.ndarray:
        """Per-atom block index (position of the block in canonical order)."""
        labels = np.empty(self.atom_count, dtype=int)
        for k, block in enumerate(self.blocks):
            labels[list(block)] = k
        return labels

    def __repr__(self) -> str:
        inner = "|".join(",".join(str(i) for i in b) for b in self.blocks)
        return f"Partition[{inner}]"


def trivial_partition(space: SampleSpace) -> Partition:
    """The single-block partition: no knowledge."""
    return Partition((tuple(range(space.atom_count)),))


def discrete_partition(space: SampleSpace) -> Partition:
    """The all-singletons partition: finest possible knowledge."""
    return Partition(tuple((i,) for i in range(space.atom_count)))


def partition_of_element(space: SampleSpace, x: RandomElement) -> Partition:
    """Group atoms by the exact value of x: the partition generated by x.

    Equality of real values is bitwise per coordinate; callers that want a
    tolerance must quantize first (silent tolerancing would change the
    generated knowledge unpredictably).
    """
    _check_atoms(space, x)
    groups: dict[bytes, list[int]] = {}
    for i, row in enumerate(x.values):
        groups.setdefault(row.tobytes(), []).append(i)
    return Partition(tuple(tuple(g) for g in groups.values()))


def partition_join(p1: Partition, p2: Partition) -> Partition:
    """Coarsest common refinement: nonempty pairwise block intersections.

    Realizes combined knowledge sigma(Y, Z) from sigma(Y) and sigma(Z).
    """
    if p1.atom_count != p2.atom_count:
        raise PartitionMismatchError(
            f"atom sets differ: {p1.atom_count} vs {p2.atom_count}"
        )
    l1 = p1.block_labels()
    l2 = p2.block_labels()
    groups: dict[tuple[int, int], list[int]] = {}
    for i in range(p1.atom_count):
        groups.setdefault((int(l1[i]), int(l2[i])), []).append(i)
    return Partition(tuple(tuple(g) for g in groups.values()))


def is_refinement(fine: Partition, coarse: Partition) -> bool:
    """True iff every block of ``fine`` is contained in one block of ``coarse``."""
    if fine.atom_count != coarse.atom_count:
        raise PartitionMismatchError(
            f"atom sets differ: {fine.atom_count} vs {coarse.atom_count}"
        )
    coarse_labels = coarse.block_labels()
    for block in fine.blocks:
        first = coarse_labels[block[0]]
        for i in block[1:]:
            if coarse_labels[i] != first:
                return False
    return True


def conditional_expectation(
    space: SampleSpace, x: RandomElement, partition: Partition
) -> RandomElement:
    """Project x onto block-constant vectors: per-block weighted means.

    Requires every block to carry positive probability; run
    :func:`restrict_to_support` first if the space has zero-mass atoms.
    """
    if x.kind != KIND_REAL:
        raise ValidationError("conditional expectation is defined for real elements")
    _check_atoms(space, x)
    if partition.atom_count != space.atom_count:
        raise PartitionMismatchError("partition does not match the space's atoms")
    out = np.empty_like(x.values)
    p = space.probabilities
    for block in partition.blocks:
        idx = list(block)
        mass = float(p[idx].sum())
        if mass <= 0.0:
            raise ZeroMassBlockError(
                f"block {block} has zero probability; drop zero-mass atoms first"
            )
        mean = p[idx] @ x.values[idx] / mass
        out[idx] = mean
    return RandomElement(KIND_REAL, out)


def expectation(space: SampleSpace, x: RandomElement) -> np.ndarray:
    """Plain mean vector E[x] under the space's probabilities."""
    _check_atoms(space, x)
    return space.probabilities @ x.values


def restrict_to_support(
    space: SampleSpace,
    x: RandomElement | None = None,
    partitions: Iterable[Partition] = (),
):
    """Drop zero-probability atoms and re-index everything consistently.

    Returns ``(space, x, partitions)`` with atoms of probability zero
    removed (the 0 * loss = 0 convention: null atoms cannot affect any
    expectation).  Blocks that become empty disappear.  When there is
    nothing to drop the inputs are returned unchanged.
    """
    p = space.probabilities
    keep = np.flatnonzero(p > 0.0)
    parts = list(partitions)
    if keep.size == p.size:
        return space, x, parts
    if keep.size == 0:
        raise ValidationError("space has no atoms with positive probability")
    new_index = {int(old): new for new, old in enumerate(keep)}
    new_space = SampleSpace(p[keep] / float(p[keep].sum()))
    new_x = None
    if x is not None:
        new_x = RandomElement(x.kind, x.values[keep])
    new_parts = []
    for part in parts:
        blocks = []
        for block in part.blocks:
            nb = tuple(new_index[i] for i in block if i in new_index)
            if nb:
                blocks.append(nb)
        new_parts.append(Partition(tuple(blocks)))
    return new_space, new_x, new_parts


def enumerate_partitions(atom_count: int) -> list[Partition]:
    """All set partitions of {0..n-1}, canonical, in a fixed deterministic order.

    The order is lexicographic in restricted-growth labellings, which also
    happens to list blocks by smallest member.  Capped at n = 10
    (Bell(10) = 115975).
    """
    if not 1 <= atom_count <= MAX_ENUM_ATOMS:
        raise ValidationError(
            f"atom_count must be in 1..{MAX_ENUM_ATOMS}, got {atom_count}"
        )
    results: list[Partition] = []
    labels = [0] * atom_count

    def extend(i: int, max_label: int):
        if i == atom_count:
            blocks: list[list[int]] = [[] for _ in range(max_label + 1)]
            for atom, lab in enumerate(labels):
                blocks[lab].append(atom)
            results.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        for lab in range(max_label + 2):
            labels[i] = lab
            extend(i + 1, max(max_label, lab))

    extend(1, 0)
    return results


def _check_atoms(space: SampleSpace, x: RandomElement):
    if x.atom_count != space.atom_count:
        raise ValidationError(
            f"element has {x.atom_count} atoms, space has {space.atom_count}"
        )
