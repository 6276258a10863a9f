import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgreedy.lattice import (BoxConstraint, box_points, budget_points, check_lattice_vector, iter_box,
                               join, l1_norm, leq, meet, multiset, unit, zeros)

vec = st.lists(st.integers(0, 6), min_size=1, max_size=5)


def test_check_rejects_bad_input():
    with pytest.raises(ValueError):
        check_lattice_vector([1, -1])
    with pytest.raises(ValueError):
        check_lattice_vector([1.5])
    with pytest.raises(ValueError):
        check_lattice_vector([[1, 2]])
    with pytest.raises(ValueError):
        check_lattice_vector([1, 2], n=3)
    v = check_lattice_vector([1.0, 2.0])
    assert v.dtype == np.int64 and not v.flags.writeable


def test_join_meet_examples():
    assert join([1, 3, 0], [2, 1, 0]).tolist() == [2, 3, 0]
    assert meet([1, 3, 0], [2, 1, 0]).tolist() == [1, 1, 0]
    with pytest.raises(ValueError):
        join([1, 2], [1, 2, 3])


def test_unit_and_zeros():
    assert unit(3, 1, 4).tolist() == [0, 4, 0]
    assert zeros(2).tolist() == [0, 0]
    with pytest.raises(IndexError):
        unit(2, 2)
    assert multiset([2, 0, 1]) == [0, 0, 2]
    assert l1_norm([2, 0, 1]) == 3


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(*(st.lists(st.integers(0, 5), min_size=n, max_size=n)
                                                        for _ in range(3)))))
def test_lattice_laws(triple):
    v, w, u = (np.array(x) for x in triple)
    # idempotence, commutativity, absorption, distributivity
    assert np.array_equal(join(v, v), v) and np.array_equal(meet(v, v), v)
    assert np.array_equal(join(v, w), join(w, v))
    assert np.array_equal(meet(v, join(v, w)), v)
    assert np.array_equal(join(v, meet(v, w)), v)
    assert np.array_equal(meet(v, join(w, u)), join(meet(v, w), meet(v, u)))
    assert leq(meet(v, w), v) and leq(v, join(v, w))


def test_box_constraint_clamps_to_budget():
    box = BoxConstraint([None, 2, 9], budget=4)
    assert box.bounds.tolist() == [4, 2, 4]
    assert box.feasible([1, 2, 1]) and not box.feasible([2, 2, 1]) and not box.contains([0, 3, 0])
    assert BoxConstraint.uniform(2, None, 3).bounds.tolist() == [3, 3]
    with pytest.raises(ValueError):
        BoxConstraint([1], -1)


def test_box_enumeration_matches_product():
    b = [2, 0, 3]
    expected = list(itertools.product(range(3), range(1), range(4)))
    assert list(iter_box(b)) == expected
    assert [tuple(r) for r in box_points(b)] == expected


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                                                      st.lists(st.integers(0, 3), min_size=n, max_size=n),
                                                      st.integers(0, 6))))
def test_budget_points_is_the_filtered_box(args):
    lo, extra, k = args
    lo = np.array(lo)
    hi = lo + np.array(extra)
    got = sorted(tuple(r) for r in budget_points(lo, hi, k))
    want = sorted(p for p in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
                  if sum(p) - lo.sum() <= k)
    assert got == want
