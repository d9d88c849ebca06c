"""Seeded random instance generation.

Random commuting nilpotent Higgs fields are built as monomial multiples of
polynomials (without constant term) in a single shared nilpotent matrix nu:
theta_i = m_i(u) * q_i(nu).  Any two such matrices commute, and every product
of ``rank`` of them contains nu^rank = 0, so the family is automatically a
valid Higgs field of level < rank.  Generic independent nilpotent matrices
would not commute, which is why everything is driven off one seed matrix.
"""

from __future__ import annotations

import numpy as np

from .cartier import CechDatum, LiftingDatum
from .modcx import HiggsModule
from .trunc_ring import RingPair
from .fplin import FieldSpec


def nilpotent_seed(rank, p, rng):
    """Random strictly upper-triangular rank x rank matrix mod p (Jordan-type
    nilpotent up to conjugation); nu^rank = 0 by construction."""
    nu = np.zeros((rank, rank), dtype=np.int64)
    for a in range(rank):
        for b in range(a + 1, rank):
            nu[a, b] = rng.integers(0, p)
    # make sure the first superdiagonal is not all zero for rank > 1, so the
    # generated fields are usually nontrivial
    if rank > 1 and not nu[np.arange(rank - 1), np.arange(1, rank)].any():
        nu[0, 1] = 1 + rng.integers(0, p - 1)
    return nu


def _random_monomial(ring, rng):
    exps = tuple(int(rng.integers(0, ring.cap)) for _ in range(ring.n))
    return ring.monomial(exps)


def _matrix_to_elements(ring, mono, mat):
    p = ring.p
    return [[mono.scale(int(mat[a, b]) % p) for b in range(mat.shape[1])]
            for a in range(mat.shape[0])]


def random_higgs(rp, rank, rng, zero_prob=0.2):
    """Random nilpotent Higgs module over rp.down of the given rank.

    Each field component theta_i is a monomial in the downstairs variables
    times q_i(nu) where q_i has no constant term, so the family commutes and
    has level <= rank - 1.
    """
    p = rp.p
    nu = nilpotent_seed(rank, p, rng)
    theta = []
    for _ in range(rp.n):
        if rank == 1 or rng.random() < zero_prob:
            mat = np.zeros((rank, rank), dtype=np.int64)
        else:
            acc = np.zeros((rank, rank), dtype=np.int64)
            power = nu.copy()
            for _k in range(1, rank):
                c = int(rng.integers(0, p))
                acc = (acc + c * power) % p
                power = (power @ nu) % p
            mat = acc
        mono = _random_monomial(rp.down, rng)
        theta.append(_matrix_to_elements(rp.down, mono, mat))
    return HiggsModule(rp, rank, theta)


def random_lifting(rp, rng, max_terms=3):
    """Random deviation from the standard Frobenius lifting: each coordinate
    gets a random upstairs element (a few monomials)."""
    els = []
    for _ in range(rp.n):
        f = rp.up.zero()
        for _k in range(int(rng.integers(1, max_terms + 1))):
            exps = tuple(int(rng.integers(0, rp.up.cap)) for _ in range(rp.n))
            f = f + rp.up.monomial(exps).scale(int(rng.integers(0, rp.p)))
        els.append(f)
    return LiftingDatum(rp, tuple(els))


def random_cech(rp, rng, charts):
    """Cech datum on `charts` virtual charts; chart 0 is the standard lifting."""
    lifts = [LiftingDatum.standard(rp)]
    for _ in range(charts - 1):
        lifts.append(random_lifting(rp, rng))
    return CechDatum(lifts)


def random_instance(p, n, seed, rank=None, r=None, M=None):
    """One seeded (RingPair, HiggsModule) instance; sizes are biased small on
    the expensive (p, n) cells so batch suites stay within their time budget."""
    rng = np.random.default_rng(seed)
    if r is None:
        r = int(rng.integers(0, n + 1))
    if M is None:
        M = 1 if p ** n >= 27 else int(rng.integers(1, 3))
    if rank is None:
        dim_up = (p * M) ** n
        if dim_up >= 343:
            rank = 1
        elif dim_up >= 125:
            rank = int(rng.integers(1, 3))
        else:
            rank = int(rng.integers(1, 4))
    rp = RingPair(FieldSpec(p), n=n, r=r, M=M)
    return rp, random_higgs(rp, rank, rng)


def random_grading_dims(rank, rng, max_levels=3):
    """Random partition of `rank` into at most max_levels nonzero level sizes."""
    dims = []
    left = rank
    while left > 0 and len(dims) < max_levels - 1:
        d = int(rng.integers(1, left + 1))
        dims.append(d)
        left -= d
    if left:
        dims.append(left)
    return dims


def random_periodic_data(p, n, r, M, seed, rank=None):
    """Seeded ingredients for a one-periodic witness: grading dims plus
    constant log field matrices that strictly lower the level (entries only in
    the blocks one step above the diagonal, level-ascending basis)."""
    rng = np.random.default_rng(seed)
    if rank is None:
        rank = int(rng.integers(2, 4))
    dims = random_grading_dims(rank, rng)
    while len(dims) < 2:  # need an actual drop for a nontrivial field
        dims = random_grading_dims(rank, rng)
    offs = np.cumsum([0] + dims)
    base = np.zeros((rank, rank), dtype=np.int64)
    for lev in range(1, len(dims)):
        rows = slice(offs[lev - 1], offs[lev])
        cols = slice(offs[lev], offs[lev + 1])
        block = rng.integers(0, p, size=(dims[lev - 1], dims[lev]))
        if not block.any():
            block.flat[0] = 1
        base[rows, cols] = block
    # log components are scalar multiples of one level-lowering matrix so the
    # family commutes for gradings with three or more levels
    mats = [(int(rng.integers(1, p)) * base) % p for _ in range(r)]
    return dims, mats
