import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loghodge.fplin import (FieldSpec, PrimeMatrix, Subspace, image_subspace,
                            kernel_raw, mulmod, rank_raw, rref_raw,
                            subspace_calc)

PRIMES = [3, 5, 7, 11]


def random_matrix(rng, p, rows, cols):
    return rng.integers(0, p, size=(rows, cols)).astype(np.int64)


@st.composite
def matrix_and_prime(draw, max_side=8):
    p = draw(st.sampled_from(PRIMES))
    rows = draw(st.integers(1, max_side))
    cols = draw(st.integers(1, max_side))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return p, random_matrix(rng, p, rows, cols)


def test_field_inverse():
    for p in PRIMES:
        f = FieldSpec(p)
        for a in range(1, p):
            assert (a * f.inv(a)) % p == 1


def test_rref_identity():
    r, piv = rref_raw(np.eye(4, dtype=np.int64), 5)
    assert piv == [0, 1, 2, 3]
    assert np.array_equal(r[:4], np.eye(4, dtype=np.int64))


@given(matrix_and_prime())
@settings(max_examples=60, deadline=None)
def test_rank_transpose(mp):
    p, a = mp
    assert rank_raw(a, p) == rank_raw(a.T, p)


@given(matrix_and_prime())
@settings(max_examples=60, deadline=None)
def test_kernel_annihilates(mp):
    p, a = mp
    ker = kernel_raw(a, p)
    assert ker.shape[0] == a.shape[1] - rank_raw(a, p)
    if ker.shape[0]:
        assert not np.any(mulmod(a, ker.T, p))


@given(matrix_and_prime())
@settings(max_examples=60, deadline=None)
def test_mulmod_matches_python(mp):
    p, a = mp
    rng = np.random.default_rng(0)
    b = random_matrix(rng, p, a.shape[1], 3)
    assert np.array_equal(mulmod(a, b, p), (a.astype(object) @ b) % p)


@given(matrix_and_prime())
@settings(max_examples=40, deadline=None)
def test_subspace_dimension_formula(mp):
    p, a = mp
    rng = np.random.default_rng(1)
    b = random_matrix(rng, p, a.shape[0], a.shape[1])
    u = Subspace.from_spanning(p, a.shape[1], a)
    w = Subspace.from_spanning(p, a.shape[1], b)
    s = subspace_calc(u, w, "sum")
    i = subspace_calc(u, w, "intersect")
    assert s.dim + i.dim == u.dim + w.dim
    assert subspace_calc(s, u, "contains")
    assert subspace_calc(u, i, "contains")


@given(matrix_and_prime())
@settings(max_examples=40, deadline=None)
def test_contains_spanned_combinations(mp):
    p, a = mp
    u = Subspace.from_spanning(p, a.shape[1], a)
    rng = np.random.default_rng(2)
    coeff = rng.integers(0, p, size=a.shape[0])
    v = (coeff @ a) % p
    assert u.contains_vector(v)
    if u.dim:
        c = u.coords(v)
        assert np.array_equal((c @ u.basis) % p, v % p)


def test_image_subspace():
    a = PrimeMatrix(3, np.array([[1, 2], [2, 4]], dtype=np.int64))
    im = image_subspace(a)
    assert im.dim == 1
    assert im.contains_vector(np.array([1, 2]))


def test_zero_and_full():
    z = Subspace.zero(5, 4)
    f = Subspace.full(5, 4)
    assert z.dim == 0 and f.dim == 4
    assert subspace_calc(f, z, "contains")
    assert not subspace_calc(z, f, "contains")


def test_nonprime_rejected():
    with pytest.raises(ValueError):
        FieldSpec(6)
