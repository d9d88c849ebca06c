import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loghodge.complexes import cohomology_dim, verify_subcomplex
from loghodge.fplin import FieldSpec, PrimeMatrix, Subspace, subspace_calc
from loghodge.generate import random_higgs
from loghodge.modcx import (Filtration, HiggsModule, deRham_complex,
                            fil_image_exchange, form_tags, higgs_complex,
                            intersection_complex, intersection_submodule,
                            intersection_subspaces, multiweight,
                            residue_stratum, special_triangular_check)
from loghodge.trunc_ring import RingPair


def rp_small(p=5, n=2, r=1, M=1):
    return RingPair(FieldSpec(p), n=n, r=r, M=M)


def zero_theta(rp, rank):
    return [[[rp.down.zero() for _ in range(rank)] for _ in range(rank)]
            for _ in range(rp.n)]


def rank2(rp):
    theta = zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()
    return HiggsModule(rp, 2, theta)


def test_form_tags():
    assert form_tags(3, 0) == [()]
    assert form_tags(3, 2) == [(1, 2), (1, 3), (2, 3)]


def test_multiweight():
    rp = rp_small(n=3, r=2)
    assert tuple(multiweight((1, 3), rp)) == (1, 0)
    assert tuple(multiweight((2,), rp)) == (0, 1)
    assert tuple(multiweight((3,), rp)) == (0, 0)


def test_noncommuting_rejected():
    rp = rp_small()
    theta = zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()   # e1 -> e2
    theta[1][0][1] = rp.down.one()   # e2 -> e1: [theta_1, theta_2] != 0
    with pytest.raises(ValueError):
        HiggsModule(rp, 2, theta)


def test_level_bound_enforced():
    # level p-1 is allowed, level p is not: chain of p lowering steps
    rp = RingPair(FieldSpec(3), n=1, r=1, M=1)
    rank = 5  # nilpotency level 4 > p - 1 = 2
    theta = zero_theta(rp, rank)
    for i in range(rank - 1):
        theta[0][i + 1][i] = rp.down.one()
    with pytest.raises(ValueError):
        HiggsModule(rp, rank, theta)


def test_grading_must_lower():
    rp = rp_small()
    theta = zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()
    with pytest.raises(ValueError):
        HiggsModule(rp, 2, theta, grading=[0, 0])
    HiggsModule(rp, 2, theta, grading=[1, 0])  # target level = source - 1


def test_higgs_complex_shape():
    rp = rp_small()
    e = rank2(rp)
    c = higgs_complex(e)
    assert c.dims == [e.dim * len(form_tags(2, m)) for m in range(3)]


@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 1, 1), (3, 2, 1), (5, 2, 2)]))
@settings(max_examples=25, deadline=None)
def test_intersection_is_subcomplex(seed, pnr):
    p, n, r = pnr
    rp = RingPair(FieldSpec(p), n=n, r=r, M=1)
    rng = np.random.default_rng(seed)
    e = random_higgs(rp, 2, rng)
    sub = intersection_subspaces(e)
    verify_subcomplex(sub, higgs_complex(e))  # raises if not d-stable


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_intersection_monotone(seed):
    # larger multiweight cuts out a smaller submodule
    rp = RingPair(FieldSpec(5), n=2, r=2, M=2)
    rng = np.random.default_rng(seed)
    e = random_higgs(rp, 2, rng)
    e00 = intersection_submodule(e, (0, 0))
    e10 = intersection_submodule(e, (1, 0))
    e11 = intersection_submodule(e, (1, 1))
    assert subspace_calc(e00, e10, "contains")
    assert subspace_calc(e10, e11, "contains")
    assert e00.dim == e.dim  # weight zero imposes nothing


def test_zero_field_intersection_complex():
    # theta = 0: E_w = t^w E, so the intersection complex is computable by hand
    rp = RingPair(FieldSpec(3), n=1, r=1, M=2)
    e = HiggsModule(rp, 1, zero_theta(rp, 1))
    ic = intersection_complex(e)
    # degree 0 keeps all of E (weight 0), degree 1 keeps t*E (weight 1)
    assert ic.dims == [e.dim, e.dim - 1]


def test_special_triangular_examples():
    m = PrimeMatrix(3, np.array([[1, 0], [0, 0]], dtype=np.int64))
    assert special_triangular_check(m, (1, 1), 1) == "triangular"
    assert special_triangular_check(m, (1, 1), 0) == "special"
    m2 = PrimeMatrix(3, np.array([[0, 1], [0, 0]], dtype=np.int64))
    assert special_triangular_check(m2, (1, 1), 1) == "special"
    m3 = PrimeMatrix(3, np.array([[0, 0], [1, 0]], dtype=np.int64))
    assert special_triangular_check(m3, (1, 1), 1) == "triangular"
    assert special_triangular_check(m2, (1, 1), 0) == "not_triangular"


def test_exchange_special_vs_not():
    special = PrimeMatrix(3, np.array([[0, 1], [0, 0]], dtype=np.int64))
    assert fil_image_exchange(special, (1, 1), 1, 0).equal
    defective = PrimeMatrix(3, np.array([[1, 0], [0, 0]], dtype=np.int64))
    assert not fil_image_exchange(defective, (1, 1), 1, 0).equal


def test_filtration_validation():
    rp = rp_small()
    from loghodge.cartier import inverse_cartier
    h = inverse_cartier(rank2(rp))
    full = Subspace.full(rp.p, h.dim)
    Filtration(h, [full])  # trivial is fine
    with pytest.raises(ValueError):
        # Fil^1 not contained in Fil^0
        Filtration(h, [Subspace.zero(rp.p, h.dim), full])


def test_residue_stratum_shapes():
    rp = rp_small(p=3, n=2, r=2, M=1)
    from loghodge.cartier import inverse_cartier
    e = rank2(rp)
    h = inverse_cartier(e)
    res = residue_stratum(h, [1])
    assert res.closed_matrix.shape == (e.rank, e.rank)
    assert res.stratum_matrix.shape[0] == len(res.keep)
