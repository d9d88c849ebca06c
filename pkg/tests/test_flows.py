import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loghodge.cartier import inverse_cartier
from loghodge.complexes import cohomology_dim
from loghodge.flows import (adaptedness_check, build_one_periodic,
                            e1_degeneration_check, graded_structure,
                            intersection_cohomology, residue_classification)
from loghodge.fplin import FieldSpec, Subspace
from loghodge.generate import random_periodic_data
from loghodge.modcx import Filtration, HiggsModule, deRham_complex
from loghodge.trunc_ring import RingPair


def uniformizing_witness(p=5, n=1, r=1, M=1):
    rp = RingPair(FieldSpec(p), n=n, r=r, M=M)
    mat = np.array([[0, 1], [0, 0]], dtype=np.int64)
    return build_one_periodic([1, 1], [mat] * r, rp)


def test_rank2_intersection_cohomology():
    w = uniformizing_witness()
    rep = intersection_cohomology(w.module, w.fil)
    assert rep.ih == [1, 0]
    assert rep.h == [1, 1]
    # Hodge-graded dims of IH sum to the IH dims
    assert [sum(row) for row in rep.hodge] == rep.ih
    # the natural map IH -> H has full rank in degree 0 only
    assert rep.nat_rank == [1, 0]


def test_rank2_adapted_and_degenerate():
    w = uniformizing_witness()
    ad = adaptedness_check(w.module, w.fil)
    assert ad.equal and ad.inclusion
    assert e1_degeneration_check(w.module, w.fil, mode="intersection").degenerate


def test_trivial_filtration_control():
    # the trivial filtration on the same module satisfies the inclusion but
    # is strictly smaller somewhere (non-adapted control)
    w = uniformizing_witness()
    fil = Filtration(w.module, [Subspace.full(w.module.p, w.module.dim)])
    ad = adaptedness_check(w.module, fil)
    assert ad.inclusion
    assert not ad.equal


def test_zero_field_degenerates_fully():
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    z = rp.down.zero()
    e = HiggsModule(rp, 1, [[[z]]], grading=[0])
    h = inverse_cartier(e)
    fil = Filtration(h, [Subspace.full(rp.p, h.dim)])
    assert e1_degeneration_check(h, fil, mode="full").degenerate
    assert e1_degeneration_check(h, fil, mode="intersection").degenerate


def test_direct_sum_additivity():
    # two independent rank-2 blocks: IH and H dims double
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    mat = np.zeros((4, 4), dtype=np.int64)
    mat[0, 2] = 1
    mat[1, 3] = 1
    w = build_one_periodic([2, 2], [mat], rp)
    rep = intersection_cohomology(w.module, w.fil)
    assert rep.ih == [2, 0]
    assert rep.h == [2, 2]


def test_residue_special_on_strata():
    dims, mats = random_periodic_data(5, 2, 2, 1, seed=5)
    rp = RingPair(FieldSpec(5), n=2, r=2, M=1)
    w = build_one_periodic(dims, mats, rp)
    for I in ([1], [2], [1, 2]):
        assert residue_classification(w, I) == "special"


def test_graded_structure_roundtrip():
    w = uniformizing_witness()
    e_down, gr, fc, consts, mults = graded_structure(w.module, w.fil)
    assert mults == [1, 1]
    assert len(consts) == w.module.rp.r
    # the graded Higgs complex has the same cohomology as the witness source
    from loghodge.modcx import higgs_complex
    src = higgs_complex(w.higgs)
    out = higgs_complex(e_down)
    for m in range(src.top + 1):
        assert cohomology_dim(src, m) == cohomology_dim(out, m)


def test_build_one_periodic_validations():
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    with pytest.raises(ValueError):
        build_one_periodic([1, 1], [], rp)  # missing log matrix
    with pytest.raises(ValueError):
        # level-raising entry (below the diagonal) is rejected
        build_one_periodic([1, 1], [np.array([[0, 0], [1, 0]])], rp)


@given(st.integers(0, 2**32 - 1),
       st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]))
@settings(max_examples=12, deadline=None)
def test_random_witnesses_are_adapted(seed, rM):
    r, M = rM
    dims, mats = random_periodic_data(5, r, r, M, seed)
    rp = RingPair(FieldSpec(5), n=r, r=r, M=M)
    w = build_one_periodic(dims, mats, rp)
    assert adaptedness_check(w.module, w.fil).equal
    assert e1_degeneration_check(w.module, w.fil).degenerate
