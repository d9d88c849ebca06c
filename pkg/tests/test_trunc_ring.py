import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loghodge.fplin import FieldSpec
from loghodge.trunc_ring import Ring, RingPair


@st.composite
def ring_and_elements(draw, count=2):
    p = draw(st.sampled_from([3, 5]))
    n = draw(st.integers(1, 3))
    cap = draw(st.integers(1, 3))
    ring = Ring(p, n, cap, "t")
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return ring, [ring.random_element(rng) for _ in range(count)]


def test_monomial_index_bijection():
    ring = Ring(3, 2, 3, "t")
    seen = set()
    for i in range(ring.dim):
        exps = ring.exps[i]
        assert ring.monomial_index(tuple(exps)) == i
        seen.add(tuple(exps))
    assert len(seen) == ring.dim == 9


def test_truncation():
    ring = Ring(5, 1, 2, "t")
    t = ring.variable(1)
    assert (t * t).is_zero()
    assert not t.is_zero()


@given(ring_and_elements(count=3))
@settings(max_examples=50, deadline=None)
def test_ring_axioms(re):
    ring, (f, g, h) = re
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert (f + g) - g == f


@given(ring_and_elements(count=2))
@settings(max_examples=50, deadline=None)
def test_mult_matrix_agrees(re):
    ring, (f, g) = re
    prod = ring.mult_matrix(f) @ g.coeffs % ring.p
    assert np.array_equal(prod, (f * g).coeffs)


@st.composite
def pair_and_elements(draw):
    p = draw(st.sampled_from([3, 5]))
    n = draw(st.integers(1, 2))
    r = draw(st.integers(0, n))
    M = draw(st.integers(1, 2))
    rp = RingPair(FieldSpec(p), n=n, r=r, M=M)
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return rp, rng


@given(pair_and_elements())
@settings(max_examples=40, deadline=None)
def test_derive_leibniz(pe):
    rp, rng = pe
    f = rp.up.random_element(rng)
    g = rp.up.random_element(rng)
    for i in range(1, rp.n + 1):
        lhs = rp.derive(f * g, i)
        rhs = rp.derive(f, i) * g + f * rp.derive(g, i)
        assert lhs == rhs, (i, rp.is_log(i))


@given(pair_and_elements())
@settings(max_examples=40, deadline=None)
def test_frobenius_multiplicative(pe):
    rp, rng = pe
    f = rp.down.random_element(rng)
    g = rp.down.random_element(rng)
    assert rp.frobenius(f * g) == rp.frobenius(f) * rp.frobenius(g)


@given(pair_and_elements())
@settings(max_examples=40, deadline=None)
def test_frobenius_kills_derivatives(pe):
    # d/dt_i of F*(f) = 0: p-th power exponents have zero log/ordinary derivative
    rp, rng = pe
    f = rp.down.random_element(rng)
    for i in range(1, rp.n + 1):
        assert rp.derive(rp.frobenius(f), i).is_zero()


def test_frobenius_matrix_matches():
    rp = RingPair(FieldSpec(3), n=2, r=1, M=2)
    fm = rp.frobenius_matrix()
    rng = np.random.default_rng(0)
    f = rp.down.random_element(rng)
    assert np.array_equal(fm @ f.coeffs % rp.p, rp.frobenius(f).coeffs)


def test_shift_matrix_is_monomial_mult():
    ring = Ring(5, 2, 2, "t")
    e = (1, 0)
    sm = ring.shift_matrix(np.array(e))
    rng = np.random.default_rng(1)
    f = ring.random_element(rng)
    assert np.array_equal(sm @ f.coeffs % 5, (ring.monomial(e) * f).coeffs)


def test_bad_log_range():
    with pytest.raises(ValueError):
        RingPair(FieldSpec(3), n=1, r=2, M=1)
