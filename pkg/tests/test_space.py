"""Core-space tests: partitions, conditional expectation, the partition lattice."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lossinfo import (
    Partition,
    PartitionMismatchError,
    RandomElement,
    SampleSpace,
    ValidationError,
    ZeroMassBlockError,
    conditional_expectation,
    enumerate_partitions,
    is_refinement,
    partition_join,
    partition_of_element,
    restrict_to_support,
    trivial_partition,
)
from oracles import brute_force_partitions

# ---------------------------------------------------------------------------
# Construction and invariants
# ---------------------------------------------------------------------------


def test_space_validation():
    SampleSpace(np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        SampleSpace(np.array([0.5, 0.6]))
    with pytest.raises(ValidationError):
        SampleSpace(np.array([-0.1, 1.1]))
    with pytest.raises(ValidationError):
        SampleSpace(np.array([]))


def test_partition_canonical_form():
    p = Partition(((2,), (1, 0)))
    assert p.blocks == ((0, 1), (2,))
    assert p == Partition(((0, 1), (2,)))
    assert hash(p) == hash(Partition(((1, 0), (2,))))


def test_partition_rejects_overlap_and_gaps():
    with pytest.raises(ValidationError):
        Partition(((0, 1), (1, 2)))
    with pytest.raises(ValidationError):
        Partition(((0,), (2,)))
    with pytest.raises(ValidationError):
        Partition(((0,), ()))


def test_distribution_element_validation():
    RandomElement.distribution([[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValidationError):
        RandomElement.distribution([[0.5, 0.6]])
    with pytest.raises(ValidationError):
        RandomElement.real([[np.inf]])


# ---------------------------------------------------------------------------
# Operations: worked examples
# ---------------------------------------------------------------------------


def test_trivial_partition():
    assert trivial_partition(SampleSpace.uniform(3)).blocks == ((0, 1, 2),)
    assert trivial_partition(SampleSpace.uniform(1)).blocks == ((0,),)
    assert trivial_partition(SampleSpace.uniform(5)).blocks == ((0, 1, 2, 3, 4),)


def test_partition_of_element():
    sp = SampleSpace.uniform(3)
    distinct = partition_of_element(sp, RandomElement.real([1.0, 3.0, 5.0]))
    assert distinct.blocks == ((0,), (1,), (2,))
    grouped = partition_of_element(sp, RandomElement.real([2.0, 2.0, 5.0]))
    assert grouped.blocks == ((0, 1), (2,))
    constant = partition_of_element(sp, RandomElement.real([7.0, 7.0, 7.0]))
    assert constant == trivial_partition(sp)


def test_partition_of_element_is_bitwise():
    sp = SampleSpace.uniform(2)
    # +0.0 and -0.0 are numerically equal but bitwise distinct
    p = partition_of_element(sp, RandomElement.real([0.0, -0.0]))
    assert p.block_count == 2


def test_partition_join_examples():
    p1 = Partition(((0, 1), (2,)))
    p2 = Partition(((0,), (1, 2)))
    assert partition_join(p1, p2).blocks == ((0,), (1,), (2,))
    trivial = Partition(((0, 1, 2),))
    assert partition_join(p1, trivial) == p1
    assert partition_join(p1, p1) == p1
    with pytest.raises(PartitionMismatchError):
        partition_join(p1, Partition(((0, 1),)))


def test_is_refinement_examples():
    discrete = Partition(((0,), (1,), (2,)))
    p1 = Partition(((0, 1), (2,)))
    p2 = Partition(((0,), (1, 2)))
    assert is_refinement(discrete, p1)
    assert not is_refinement(p1, p2)
    assert is_refinement(p1, p1)


def test_conditional_expectation_examples():
    sp = SampleSpace.uniform(3)
    x = RandomElement.real([1.0, 3.0, 5.0])
    ce = conditional_expectation(sp, x, Partition(((0, 1), (2,))))
    assert np.array_equal(ce.values.ravel(), [2.0, 2.0, 5.0])
    # trivial partition: the global mean everywhere
    ce_triv = conditional_expectation(sp, x, trivial_partition(sp))
    assert np.allclose(ce_triv.values.ravel(), 3.0, atol=1e-15)
    # projecting onto the element's own partition returns the element
    ce_own = conditional_expectation(sp, x, partition_of_element(sp, x))
    assert np.array_equal(ce_own.values, x.values)


def test_conditional_expectation_zero_mass_block():
    sp = SampleSpace(np.array([0.5, 0.5, 0.0]))
    x = RandomElement.real([1.0, 2.0, 3.0])
    part = Partition(((0, 1), (2,)))
    with pytest.raises(ZeroMassBlockError):
        conditional_expectation(sp, x, part)
    # the documented preprocessing removes the offending atom
    sp2, x2, (p2,) = restrict_to_support(sp, x, (part,))
    assert sp2.atom_count == 2
    assert p2.blocks == ((0, 1),)
    conditional_expectation(sp2, x2, p2)


def test_restrict_to_support_noop_when_all_positive():
    sp = SampleSpace.uniform(3)
    x = RandomElement.real([1.0, 2.0, 3.0])
    sp2, x2, _ = restrict_to_support(sp, x)
    assert sp2 is sp and x2 is x


# ---------------------------------------------------------------------------
# Partition enumeration against brute force
# ---------------------------------------------------------------------------


def test_enumerate_partition_counts():
    assert len(enumerate_partitions(1)) == 1
    assert len(enumerate_partitions(3)) == 5  # Bell(3)
    assert len(enumerate_partitions(5)) == 52  # Bell(5)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_enumerate_matches_brute_force(n):
    enumerated = enumerate_partitions(n)
    as_sets = {frozenset(frozenset(b) for b in p.blocks) for p in enumerated}
    assert len(as_sets) == len(enumerated)  # no duplicates
    assert as_sets == brute_force_partitions(n)


def test_enumerate_is_deterministic_and_bounded():
    assert enumerate_partitions(4) == enumerate_partitions(4)
    assert enumerate_partitions(4)[0].block_count == 1  # trivial first
    with pytest.raises(ValidationError):
        enumerate_partitions(11)
    with pytest.raises(ValidationError):
        enumerate_partitions(0)


# ---------------------------------------------------------------------------
# Structural properties
# ---------------------------------------------------------------------------


def _partition_from_labels(labels):
    blocks = {}
    for atom, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(atom)
    return Partition(tuple(tuple(b) for b in blocks.values()))


def partitions_strategy(n):
    return st.lists(
        st.integers(min_value=0, max_value=n - 1), min_size=n, max_size=n
    ).map(_partition_from_labels)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(partitions_strategy(n), partitions_strategy(n))))
def test_join_commutative_idempotent(pair):
    p, q = pair
    assert partition_join(p, q) == partition_join(q, p)
    assert partition_join(p, p) == p


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 5).flatmap(
        lambda n: st.tuples(
            partitions_strategy(n), partitions_strategy(n), partitions_strategy(n)
        )
    )
)
def test_join_associative_and_refines(triple):
    p, q, r = triple
    assert partition_join(partition_join(p, q), r) == partition_join(p, partition_join(q, r))
    j = partition_join(p, q)
    assert is_refinement(j, p) and is_refinement(j, q)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 5).flatmap(
        lambda n: st.tuples(
            partitions_strategy(n), partitions_strategy(n), partitions_strategy(n)
        )
    )
)
def test_refinement_partial_order(triple):
    p, q, r = triple
    assert is_refinement(p, p)
    if is_refinement(p, q) and is_refinement(q, p):
        assert p == q
    if is_refinement(p, q) and is_refinement(q, r):
        assert is_refinement(p, r)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 6).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n),
            st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n),
            partitions_strategy(n),
        )
    )
)
def test_law_of_total_expectation(args):
    values, raw_probs, partition = args
    probs = np.asarray(raw_probs)
    sp = SampleSpace(probs / probs.sum())
    x = RandomElement.real(values)
    ce = conditional_expectation(sp, x, partition)
    assert abs(float(sp.probabilities @ ce.values.ravel()) -
               float(sp.probabilities @ x.values.ravel())) < 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 6).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n),
            partitions_strategy(n),
            partitions_strategy(n),
        )
    )
)
def test_tower_property(args):
    values, pa, pb = args
    n = pa.atom_count
    sp = SampleSpace.uniform(n)
    x = RandomElement.real(values)
    fine = partition_join(pa, pb)  # refines pa by construction
    coarse = pa
    inner = conditional_expectation(sp, x, fine)
    towered = conditional_expectation(sp, inner, coarse)
    direct = conditional_expectation(sp, x, coarse)
    assert np.max(np.abs(towered.values - direct.values)) < 1e-12


def test_orthogonality_of_residual():
    # uniform space: the residual x - E[x|p] is orthogonal to block indicators
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        sp = SampleSpace.uniform(n)
        x = RandomElement.real(rng.uniform(-3, 3, n))
        labels = rng.integers(0, n, n)
        part = _partition_from_labels(labels)
        residual = x.values.ravel() - conditional_expectation(sp, x, part).values.ravel()
        for block in part.blocks:
            indicator = np.zeros(n)
            indicator[list(block)] = 1.0
            assert abs(float(sp.probabilities @ (residual * indicator))) < 1e-12
