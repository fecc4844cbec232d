import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import full_rank_matrices, gf2_apply
from wiretap_lab.errors import DegenerateDomain, NonUniformMarginal, ValidationError
from wiretap_lab.hashing import (
    HashFamily,
    HashRealization,
    all_bit_strings,
    all_realizations,
    apply,
    bits_of,
    collision_test,
    count_full_rank,
    gf2_rank,
    hash_lemma_check,
    index_of,
    invert,
    pushforward,
    sample,
)


def test_family_validation():
    with pytest.raises(DegenerateDomain):
        HashFamily(0, 0)
    with pytest.raises(ValidationError):
        HashFamily(2, 3)


def test_sample_k1():
    r = sample(HashFamily(1, 1), seed=5)
    np.testing.assert_array_equal(r.matrix, [[1]])


def test_sample_k2_m1_uniform():
    seen = {}
    for unit in range(3000):
        key = tuple(sample(HashFamily(2, 1), seed=11, unit=unit).matrix.ravel())
        seen[key] = seen.get(key, 0) + 1
    assert set(seen) == {(1, 0), (0, 1), (1, 1)}
    for count in seen.values():
        assert abs(count - 1000) < 4 * math.sqrt(3000 * (1 / 3) * (2 / 3))


def test_sample_deterministic():
    a = sample(HashFamily(6, 3), seed=99, unit=4)
    b = sample(HashFamily(6, 3), seed=99, unit=4)
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_apply_examples():
    r = HashRealization.from_matrix([[1, 1]])
    assert apply(r, (0, 0)).tolist() == [0]
    assert apply(r, (0, 1)).tolist() == [1]
    ident = HashRealization.from_matrix(np.eye(3, dtype=int))
    assert apply(ident, (1, 0, 1)).tolist() == [1, 0, 1]


def test_invert_bijective():
    r = HashRealization.from_matrix([[1, 1], [0, 1]])
    for msg in all_bit_strings(2):
        a = invert(r, msg, seed=3)
        assert apply(r, a).tolist() == msg.tolist()
        assert r.preimage(msg).shape[0] == 1


def test_invert_kernel_example():
    r = HashRealization.from_matrix([[1, 0]])
    seen = {tuple(invert(r, (0,), seed=1, unit=u).tolist()) for u in range(200)}
    assert seen == {(0, 0), (0, 1)}


def test_invert_roundtrip_many_seeds():
    r = sample(HashFamily(5, 2), seed=0)
    for seed in range(10_000):
        msg = bits_of(seed % 4, 2)
        assert apply(r, invert(r, msg, seed=seed)).tolist() == msg.tolist()


def test_collision_exact_k2_m1():
    rep = collision_test(HashFamily(2, 1), exact=True)
    assert rep.rate == pytest.approx(1 / 3)
    assert rep.bound == 0.5


def test_collision_injective():
    assert collision_test(HashFamily(3, 3), exact=True).rate == 0.0


@pytest.mark.parametrize("m, k", [(1, 1), (1, 3), (2, 3), (2, 4), (3, 4)])
def test_enumeration_matches_oracle(m, k):
    reals = all_realizations(HashFamily(k, m))
    assert len(reals) == count_full_rank(m, k) == len(full_rank_matrices(m, k))
    assert {tuple(r.matrix.ravel()) for r in reals} == {tuple(np.ravel(x)) for x in full_rank_matrices(m, k)}


@pytest.mark.parametrize("m, k", [(1, 2), (2, 3), (2, 4), (3, 4)])
def test_exact_collision_rate_formula(m, k):
    rate = collision_test(HashFamily(k, m), exact=True).rate
    expected = count_full_rank(m, k - 1) / count_full_rank(m, k) if m <= k - 1 else 0.0
    assert rate == pytest.approx(expected, abs=1e-15)
    assert rate < 2.0**-m


def test_apply_matches_oracle():
    r = sample(HashFamily(4, 2), seed=8)
    for a in all_bit_strings(4):
        assert tuple(apply(r, a).tolist()) == gf2_apply(r.matrix.tolist(), a.tolist())


def test_lemma10_identity_independent():
    joint = np.outer((0.5, 0.5), (0.3, 0.7))
    res = hash_lemma_check(joint, HashFamily(1, 1), 1.0)
    assert res.lhs == pytest.approx(1.0) and res.rhs == pytest.approx(2.0) and res.holds


def test_lemma10_full_leak():
    joint = np.eye(4) / 4
    res = hash_lemma_check(joint, HashFamily(2, 2), 1.0)
    assert res.lhs == pytest.approx(4.0) and res.rhs == pytest.approx(5.0) and res.holds


def test_lemma10_needs_uniform():
    with pytest.raises(NonUniformMarginal):
        hash_lemma_check(np.diag((0.3, 0.7)), HashFamily(1, 1), 1.0)


def test_lemma10_random_k3(rng):
    for _ in range(10):
        rows = rng.dirichlet(np.ones(3), size=8)
        joint = rows / 8
        for m in (1, 2):
            for s in (0.25, 0.5, 1.0):
                res = hash_lemma_check(joint, HashFamily(3, m), s)
                assert res.exact and res.realizations == count_full_rank(m, 3)
                assert res.holds


def test_lemma10_sampled_mode(rng):
    joint = rng.dirichlet(np.ones(3), size=32) / 32
    res = hash_lemma_check(joint, HashFamily(5, 2), 0.5, realizations=200, seed=1)
    assert not res.exact and res.stderr > 0 and res.holds


def test_index_roundtrip():
    for i in range(32):
        assert index_of(bits_of(i, 5)) == i


# properties

seeds = st.integers(0, 2**63)
dims = st.integers(1, 12).flatmap(lambda k: st.tuples(st.just(k), st.integers(1, k)))


@settings(max_examples=80, deadline=None)
@given(km=dims, seed=seeds)
def test_realization_invariants(km, seed):
    k, m = km
    r = sample(HashFamily(k, m), seed=seed)
    assert gf2_rank(r.matrix) == m
    for msg_index in {0, 2**m - 1, seed % 2**m}:
        msg = bits_of(msg_index, m)
        pre = r.preimage(msg)
        assert pre.shape[0] == 2 ** (k - m)
        assert np.all((pre.astype(int) @ r.matrix.T.astype(int)) % 2 == msg)
        assert apply(r, invert(r, msg, seed=seed)).tolist() == msg.tolist()


@settings(max_examples=40, deadline=None)
@given(km=dims, seed=seeds)
def test_uniform_pushforward(km, seed):
    k, m = km
    r = sample(HashFamily(k, m), seed=seed)
    out = pushforward(r, np.full(2**k, 2.0**-k))
    np.testing.assert_allclose(out, np.full(2**m, 2.0**-m), atol=1e-15)
    assert np.all(np.bincount(r.table(), minlength=2**m) == 2 ** (k - m))


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 3), s=st.sampled_from([0.25, 0.5, 1.0]), ne=st.integers(1, 4), seed=seeds)
def test_lemma10_property(k, s, ne, seed):
    r = np.random.default_rng(seed % 2**32)
    joint = r.dirichlet(np.ones(ne), size=2**k) / 2**k
    for m in range(1, k + 1):
        assert hash_lemma_check(joint, HashFamily(k, m), s).holds
