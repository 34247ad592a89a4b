"""Core space behaviour.

Claims covered here: mixed-radix outcome ranking with the last factor
fastest, rank/unrank inversion, projection and pair variables, level-set
blocks partitioning the space, size caps (including the environment
override), and lossless document round-trips.
"""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from facthist import (
    Block,
    Factor,
    FactoredSpace,
    FormatError,
    IndexSet,
    InvalidOutcomeError,
    InvalidRankError,
    SpaceCapError,
    SpaceMismatchError,
    UnknownFactorError,
    blocks_of,
    factor_var,
    fold_pair,
    full_block,
    outcome_rank,
    outcome_unrank,
    pair_var,
    space_from_doc,
    space_to_doc,
    trivial_var,
)
from facthist.space import OUTCOME_CAP_ENV

from helpers import make_space, make_var, xor_bundle


def test_rank_is_mixed_radix_with_last_factor_fastest():
    space = make_space(2, 2)
    assert outcome_rank(space, (0, 0)) == 0
    assert outcome_rank(space, (0, 1)) == 1
    assert outcome_rank(space, (1, 0)) == 2
    assert outcome_rank(space, (1, 1)) == 3
    space23 = make_space(2, 3)
    assert outcome_rank(space23, (1, 2)) == 5
    assert outcome_unrank(space23, 4) == (1, 1)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_rank_unrank_roundtrip(sizes, data):
    space = make_space(*sizes)
    r = data.draw(st.integers(0, space.outcome_count - 1))
    assert outcome_rank(space, outcome_unrank(space, r)) == r


def test_rank_rejects_bad_outcomes():
    space = make_space(2, 2)
    with pytest.raises(InvalidOutcomeError):
        outcome_rank(space, (0,))
    with pytest.raises(InvalidOutcomeError):
        outcome_rank(space, (0, 2))
    with pytest.raises(InvalidRankError):
        outcome_unrank(space, 4)
    with pytest.raises(InvalidRankError):
        outcome_unrank(space, -1)


def test_factor_var_projects_coordinates():
    space = make_space(2, 3)
    u0 = factor_var(space, 0)
    u1 = factor_var(space, 1)
    assert u0.table == (0, 0, 0, 1, 1, 1)
    assert u1.table == (0, 1, 2, 0, 1, 2)
    assert u0.codomain == ("0", "1")
    with pytest.raises(UnknownFactorError):
        factor_var(space, 2)


def test_trivial_var_has_one_block_covering_everything():
    space = make_space(2, 3)
    z = trivial_var(space)
    blocks = blocks_of(space, z)
    assert list(blocks) == ["*"]
    assert blocks["*"].ranks == tuple(range(6))
    assert blocks["*"] == full_block(space)


def test_pair_var_attained_codomain():
    space, u0, u1, xor = xor_bundle()
    both = pair_var(space, u0, u1)
    assert len(both.codomain) == 4
    assert both.table == (0, 1, 2, 3)
    same = pair_var(space, u0, u0)
    assert len(same.codomain) == 2
    const = make_var(space, "c", 1, [0, 0, 0, 0])
    with_const = pair_var(space, u0, const)
    assert len(with_const.codomain) == 2


@given(
    st.lists(st.integers(1, 3), min_size=1, max_size=3),
    st.data(),
)
def test_pair_var_recovers_components(sizes, data):
    space = make_space(*sizes)
    n = space.outcome_count
    kx = data.draw(st.integers(1, 3))
    ky = data.draw(st.integers(1, 3))
    x = make_var(space, "x", kx, data.draw(st.lists(st.integers(0, kx - 1), min_size=n, max_size=n)))
    y = make_var(space, "y", ky, data.draw(st.lists(st.integers(0, ky - 1), min_size=n, max_size=n)))
    xy = pair_var(space, x, y)
    # Equal pair values at two outcomes force equal component values.
    for r in range(n):
        for s in range(n):
            if xy.table[r] == xy.table[s]:
                assert x.table[r] == x.table[s]
                assert y.table[r] == y.table[s]


def test_blocks_partition_and_keys_are_attained():
    space, u0, u1, xor = xor_bundle()
    blocks = blocks_of(space, xor)
    assert blocks["0"].ranks == (0, 3)
    assert blocks["1"].ranks == (1, 2)
    partial = make_var(space, "p", 3, [0, 0, 2, 2])
    keys = list(blocks_of(space, partial))
    assert keys == ["0", "2"]


def test_fold_pair_empty_is_trivial():
    space = make_space(2, 2)
    assert fold_pair(space, []).codomain == ("*",)
    u0 = factor_var(space, 0)
    assert fold_pair(space, [u0]) is u0


def test_index_set_operations():
    a = IndexSet.of([0, 2], 4)
    b = IndexSet.of([1, 2], 4)
    assert (a | b).members() == (0, 1, 2)
    assert (a & b).members() == (2,)
    assert (a - b).members() == (0,)
    assert a.complement().members() == (1, 3)
    assert len(a) == 2 and 2 in a and 1 not in a
    assert IndexSet.empty(4).issubset(a)
    assert not a.issubset(b)
    assert a.isdisjoint(IndexSet.of([1, 3], 4))
    with pytest.raises(ValueError):
        IndexSet(mask=16, size=4)
    with pytest.raises(ValueError):
        IndexSet.of([4], 4)
    with pytest.raises(ValueError):
        a | IndexSet.empty(3)


def test_outcome_cap_enforced_and_overridable(monkeypatch):
    with pytest.raises(SpaceCapError):
        make_space(101, 101, max_outcomes=10_000)
    monkeypatch.setenv(OUTCOME_CAP_ENV, "5000")
    with pytest.raises(SpaceCapError):
        make_space(101, 101)
    monkeypatch.setenv(OUTCOME_CAP_ENV, "20000")
    assert make_space(101, 101).outcome_count == 10201
    monkeypatch.setenv(OUTCOME_CAP_ENV, "bogus")
    with pytest.raises(FormatError):
        make_space(2, 2)


def test_factor_count_cap():
    factors = [Factor(f"u{i}", ("0", "1")) for i in range(21)]
    with pytest.raises(SpaceCapError):
        FactoredSpace(factors)
    assert FactoredSpace(factors, max_factors=21, max_outcomes=2**21).factor_count == 21


def test_validation_of_building_blocks():
    with pytest.raises(ValueError):
        Factor("", ("0",))
    with pytest.raises(ValueError):
        Factor("u", ())
    with pytest.raises(ValueError):
        Factor("u", ("0", "0"))
    with pytest.raises(ValueError):
        make_var(make_space(2), "x", 2, [0, 2])
    with pytest.raises(ValueError):
        Block(label="b", ranks=())
    with pytest.raises(ValueError):
        Block(label="b", ranks=(2, 1))
    with pytest.raises(ValueError):
        FactoredSpace([])
    with pytest.raises(ValueError):
        FactoredSpace([Factor("u", ("0",)), Factor("u", ("0",))])


def test_space_mismatch_detected():
    space = make_space(2, 2)
    other = make_var(make_space(2, 3), "x", 2, [0] * 6)
    with pytest.raises(SpaceMismatchError):
        blocks_of(space, other)


def test_space_doc_roundtrip():
    space, u0, u1, xor = xor_bundle()
    doc = space_to_doc(space, {"XOR": xor, "U0": u0})
    space2, variables = space_from_doc(doc)
    assert [f.name for f in space2.factors] == ["u0", "u1"]
    assert variables["XOR"].table == xor.table
    assert variables["XOR"].name == "XOR"
    assert space_to_doc(space2, variables) == doc


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {},
        {"factors": []},
        {"factors": [{"name": "u", "domain": []}]},
        {"factors": [{"name": 3, "domain": ["0"]}]},
        {"factors": [{"name": "u", "domain": ["0", "1"]}], "variables": {"x": {}}},
        {
            "factors": [{"name": "u", "domain": ["0", "1"]}],
            "variables": {"x": {"codomain": ["a"], "table": [0]}},
        },
        {
            "factors": [{"name": "u", "domain": ["0", "1"]}],
            "variables": {"x": {"codomain": ["a"], "table": [0, 1]}},
        },
    ],
)
def test_space_doc_rejects_malformed(doc):
    with pytest.raises(FormatError):
        space_from_doc(doc)
