"""One-periodic de Rham bundles and the graded comparison checks.

A one-periodic witness packages a downstairs graded Higgs module with
constant log field matrices, its inverse Cartier transform H with the
grading-induced Hodge filtration, and an explicit blockwise isomorphism
psi between the graded structure constants of (H, Fil) and the input
field.  On such witnesses the package checks:

* adaptedness: the graded piece of the intersection de Rham complex
  equals the intersection complex of the graded module, degree by degree;
* E1 degeneration at the dimension level: the first-page sums of the
  (split) filtered downstairs intersection Higgs complex match the
  intersection cohomology of H;
* intersection cohomology dimensions with their Hodge grading and the
  rank of the natural map IH^i -> H^i;
* residue triangularity: closed-point residues along log strata are
  special lower-triangular of type min(|I|, level).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cartier import inverse_cartier
from .complexes import (FilteredComplex, _express, cohomology_dim, e1_page,
                        gr_abutment, verify_subcomplex)
from .fplin import PrimeMatrix, Subspace, kernel_raw, mulmod, rank_raw, subspace_calc
from .modcx import (Filtration, FlatModule, HiggsModule, deRham_complex,
                    form_tags, gr_filtration, higgs_complex,
                    intersection_submodule, intersection_subspaces,
                    multiweight, residue_stratum, special_triangular_check)
from .trunc_ring import RingPair

__all__ = [
    "PeriodicWitness",
    "build_one_periodic",
    "AdaptednessReport",
    "adaptedness_check",
    "E1Report",
    "e1_degeneration_check",
    "IHReport",
    "intersection_cohomology",
    "residue_classification",
    "graded_structure",
]


# ---------------------------------------------------------------------------
# graded structure extraction


def _coordinate_span(p, dim, coords) -> Subspace:
    rows = np.zeros((len(coords), dim), dtype=np.int64)
    for i, c in enumerate(coords):
        rows[i, c] = 1
    return Subspace.from_spanning(p, dim, rows)


def graded_structure(h: FlatModule, fil: Filtration):
    """Constant structure matrices of the graded field of (h, fil).

    Returns (e_down, gr, fc, consts, mults): the downstairs graded Higgs
    module rebuilt from the constants, the graded module and filtered de
    Rham complex, the per-log-coordinate constant matrices and the level
    multiplicities.  Raises when the graded field is not of the constant
    blockwise form (the one-periodic family), including any nonzero
    graded field in an ordinary direction.
    """
    rp = h.rp
    p, udim = h.p, rp.up.dim
    gr, fc = gr_filtration(h, fil)
    L = len(gr.level_dims) - 1
    mults = []
    for ld in gr.level_dims:
        if ld % udim:
            raise ValueError("graded levels are not free over the upstairs ring")
        mults.append(ld // udim)
    rank = sum(mults)
    offs = np.concatenate([[0], np.cumsum(gr.level_dims)])
    goffs = np.concatenate([[0], np.cumsum(mults)])
    consts = []
    for i in range(rp.n):
        op = gr.ops[i]
        if not rp.is_log(i + 1):
            if np.any(op):
                raise ValueError(
                    f"graded field nonzero in ordinary direction {i + 1}")
            continue
        theta = np.zeros((rank, rank), dtype=np.int64)
        for q in range(L + 1):
            for q2 in range(L + 1):
                blk = op[offs[q2]:offs[q2 + 1], offs[q]:offs[q + 1]]
                if q2 != q - 1:
                    if np.any(blk):
                        raise ValueError("graded field is not strictly level-lowering")
                    continue
                for a in range(mults[q2]):
                    for b in range(mults[q]):
                        sub = blk[a * udim:(a + 1) * udim, b * udim:(b + 1) * udim]
                        c = int(sub[0, 0])
                        if np.any((sub - c * np.eye(udim, dtype=np.int64)) % p):
                            raise ValueError(
                                "graded field is not constant on the hat basis")
                        theta[goffs[q2] + a, goffs[q] + b] = c
        consts.append(theta)
    levels = [q for q in range(L + 1) for _ in range(mults[q])]
    down = rp.down
    theta_elems = []
    ci = 0
    for i in range(rp.n):
        comp = [[down.zero() for _ in range(rank)] for _ in range(rank)]
        if rp.is_log(i + 1):
            mat = consts[ci]
            ci += 1
            for a in range(rank):
                for b in range(rank):
                    if mat[a, b] % p:
                        comp[a][b] = down.one().scale(int(mat[a, b]))
        theta_elems.append(comp)
    e_down = HiggsModule(rp, rank, theta_elems, grading=levels)
    return e_down, gr, fc, consts, mults


# ---------------------------------------------------------------------------
# one-periodic witnesses


@dataclass
class PeriodicWitness:
    """Certified one-periodic datum: graded Higgs input, flat module with
    its Hodge filtration, and blockwise isomorphism psi from the graded
    structure constants back to the input field."""

    higgs: HiggsModule
    module: FlatModule
    fil: Filtration
    psi: list
    grading_dims: list
    theta_consts: list

    def validate(self):
        """Assert psi is blockwise invertible and intertwines the graded
        structure constants with the input field."""
        p = self.module.p
        rp = self.module.rp
        _, _, _, consts, mults = graded_structure(self.module, self.fil)
        if mults != list(self.grading_dims):
            raise ValueError("graded level multiplicities disagree with the witness")
        for q, blk in enumerate(self.psi):
            blk = np.asarray(blk, dtype=np.int64) % p
            if blk.shape != (mults[q], mults[q]) or rank_raw(blk, p) != mults[q]:
                raise ValueError(f"psi block {q} is not invertible")
        goffs = np.concatenate([[0], np.cumsum(mults)])
        rank = int(goffs[-1])
        big_psi = np.zeros((rank, rank), dtype=np.int64)
        for q, blk in enumerate(self.psi):
            big_psi[goffs[q]:goffs[q + 1], goffs[q]:goffs[q + 1]] = (
                np.asarray(blk, dtype=np.int64) % p)
        for gbar, theta in zip(consts, self.theta_consts):
            lhs = mulmod(big_psi, gbar, p)
            rhs = mulmod(np.asarray(theta, dtype=np.int64) % p, big_psi, p)
            if np.any((lhs - rhs) % p):
                raise ValueError("psi does not intertwine the graded fields")
        return self


def build_one_periodic(grading_dims, theta_mats, rp: RingPair) -> PeriodicWitness:
    """One-periodic witness from constant log field matrices over F_p.

    grading_dims = (m_0..m_w) with basis ordered level-ascending;
    theta_mats has one rank x rank matrix per log coordinate, strictly
    level-lowering (ordinary directions carry the zero field).  H is the
    inverse Cartier transform under the standard lifting, Fil^q the span
    of hat-basis vectors of level >= q, and psi the identity blocks.
    """
    p = rp.p
    grading_dims = [int(m) for m in grading_dims]
    if any(m < 0 for m in grading_dims) or sum(grading_dims) == 0:
        raise ValueError("grading multiplicities must be nonnegative, not all zero")
    w = len(grading_dims) - 1
    if w > p - 1:
        raise ValueError("grading width must stay <= p-1")
    if len(theta_mats) != rp.r:
        raise ValueError("need one constant matrix per log coordinate")
    rank = sum(grading_dims)
    levels = [q for q in range(w + 1) for _ in range(grading_dims[q])]
    down = rp.down
    theta = []
    consts = []
    for i in range(1, rp.n + 1):
        comp = [[down.zero() for _ in range(rank)] for _ in range(rank)]
        if rp.is_log(i):
            mat = np.asarray(theta_mats[i - 1], dtype=np.int64) % p
            if mat.shape != (rank, rank):
                raise ValueError(f"field matrix {i} has the wrong shape")
            for a in range(rank):
                for b in range(rank):
                    if mat[a, b] and levels[a] != levels[b] - 1:
                        raise ValueError(
                            f"field matrix {i} is not strictly level-lowering")
                    if mat[a, b]:
                        comp[a][b] = down.one().scale(int(mat[a, b]))
            consts.append(mat)
        theta.append(comp)
    e = HiggsModule(rp, rank, theta, grading=levels)  # checks commute + nilpotent
    h = inverse_cartier(e)
    steps = []
    for q in range(w + 1):
        coords = np.nonzero(h.levels >= q)[0]
        steps.append(_coordinate_span(p, h.dim, coords))
    fil = Filtration(h, steps)
    witness = PeriodicWitness(
        higgs=e, module=h, fil=fil,
        psi=[np.eye(m, dtype=np.int64) for m in grading_dims],
        grading_dims=grading_dims, theta_consts=consts)
    return witness.validate()


# ---------------------------------------------------------------------------
# adaptedness


@dataclass
class AdaptednessReport:
    """Per-(degree, level) comparison of the two graded intersection flags."""

    equal: bool
    inclusion: bool
    table: list
    failures: list


def adaptedness_check(h: FlatModule, fil: Filtration) -> AdaptednessReport:
    """Compare Gr_Fil of the intersection complex with the intersection
    complex of the graded module, level by level inside each degree.

    Both sides are realized as subspaces of the ambient de Rham term that
    contain Fil^{a+1}: the left as (intersection cap Fil^a) + Fil^{a+1},
    the right as the level-(a-m) weight pieces of the graded module,
    embedded through representatives.  The right side must always be
    included in the left (Lemma-level inclusion); adaptedness is the
    equality everywhere.
    """
    rp = h.rp
    p, n = h.p, h.n
    gr, fc = gr_filtration(h, fil)
    ints = intersection_subspaces(h)
    L = fil.width
    level_cols = [np.nonzero(gr.levels == q)[0] for q in range(L + 1)]
    level_spans = [_coordinate_span(p, gr.dim, cols) for cols in level_cols]
    wcache = {}
    table, failures = [], []
    equal = inclusion = True
    for m in range(n + 1):
        tags = form_tags(n, m)
        amb = len(tags) * h.dim
        for a in range(L + m + 1):
            lhs = subspace_calc(
                subspace_calc(ints[m], fc.fil(m, a), "intersect"),
                fc.fil(m, a + 1), "sum")
            rows = [fc.fil(m, a + 1).basis]
            q = a - m
            if 0 <= q <= L:
                for pos, J in enumerate(tags):
                    w = multiweight(J, rp)
                    if w not in wcache:
                        wcache[w] = intersection_submodule(gr, w)
                    piece = subspace_calc(wcache[w], level_spans[q], "intersect")
                    if piece.dim == 0:
                        continue
                    rep = mulmod(piece.basis, gr.embed, p)
                    blk = np.zeros((rep.shape[0], amb), dtype=np.int64)
                    blk[:, pos * h.dim:(pos + 1) * h.dim] = rep
                    rows.append(blk)
            rhs = Subspace.from_spanning(p, amb, np.concatenate(rows, axis=0))
            inc_here = subspace_calc(lhs, rhs, "contains")
            eq_here = inc_here and lhs.dim == rhs.dim
            table.append((m, a, lhs.dim, rhs.dim, eq_here))
            if not inc_here:
                inclusion = False
                failures.append((m, a, rhs.basis))
            if not eq_here:
                equal = False
    return AdaptednessReport(equal=equal, inclusion=inclusion,
                             table=table, failures=failures)


# ---------------------------------------------------------------------------
# E1 degeneration


def _level_flags(coord_levels, m, width, p, amb_basis=None):
    """Flags Fil^a = span of coordinates of level >= a - m (optionally
    transported into subcomplex coordinates through amb_basis rows)."""
    flags = []
    for a in range(width + m + 2):
        keep = np.nonzero(coord_levels >= a - m)[0]
        if amb_basis is None:
            flags.append(_coordinate_span(p, len(coord_levels), keep))
        else:
            amb = _coordinate_span(p, len(coord_levels), keep)
            # subcomplex vectors lying in the ambient flag, in subcomplex coords
            W = Subspace.from_spanning(p, len(coord_levels), amb_basis)
            inter = subspace_calc(W, amb, "intersect")
            coords = _express(amb_basis, inter.basis, p)
            flags.append(Subspace.from_spanning(p, amb_basis.shape[0], coords))
    return flags


@dataclass
class E1Report:
    """First-page sums against abutment dims, per total degree."""

    mode: str
    degenerate: bool
    rows: list
    page: dict


def e1_degeneration_check(h: FlatModule, fil: Filtration,
                          mode: str = "intersection") -> E1Report:
    """Dimension-level E1 degeneration over the graded structure of (h, fil).

    The first page is computed from the downstairs graded Higgs module
    rebuilt from the structure constants, filtered by its grading (the
    filtration splits); sums over the first page in total degree b are
    compared with dim H^b of the (intersection) de Rham complex of h,
    for all b < p - level.
    """
    if mode not in ("full", "intersection"):
        raise ValueError("mode must be 'full' or 'intersection'")
    rp = h.rp
    p, n = h.p, h.n
    e, _, _, _, mults = graded_structure(h, fil)
    l = e.level
    width = len(mults) - 1
    if mode == "full":
        cd = higgs_complex(e)
        up_c = deRham_complex(h)
        spaces = None
    else:
        spaces = intersection_subspaces(e)
        cd = verify_subcomplex(spaces, higgs_complex(e))
        up_c = verify_subcomplex(intersection_subspaces(h), deRham_complex(h))
    flags = []
    for m in range(n + 1):
        coord_levels = np.tile(e.levels, len(form_tags(n, m)))
        amb_basis = None if spaces is None else spaces[m].basis
        flags.append(_level_flags(coord_levels, m, width, p, amb_basis))
    fcd = FilteredComplex(cd, flags, mode="strict")
    page = e1_page(fcd)
    rows = []
    degenerate = True
    for b in range(p - l):
        s = sum(dim for (a, b2), dim in page.items() if a + b2 == b)
        hd = cohomology_dim(up_c, b) if b <= n else 0
        ok = s == hd
        rows.append((b, s, hd, ok))
        degenerate = degenerate and ok
    return E1Report(mode=mode, degenerate=degenerate, rows=rows, page=page)


# ---------------------------------------------------------------------------
# intersection cohomology


@dataclass
class IHReport:
    """Per-degree intersection cohomology dims, Hodge grading, full-complex
    dims and the rank of the natural map IH^i -> H^i."""

    ih: list
    h: list
    hodge: list
    nat_rank: list


def intersection_cohomology(h: FlatModule, fil: Filtration) -> IHReport:
    """Dimensions of IH^i = H^i of the intersection de Rham complex.

    Hodge-graded dims come from the abutment filtration of the induced
    Hodge filtration on the intersection complex (they sum to dim IH^i,
    asserted); the natural-map rank is dim((Z_int + B_full) / B_full).
    """
    rp = h.rp
    p, n = h.p, h.n
    spaces = intersection_subspaces(h)
    c_full = deRham_complex(h)
    c_int = verify_subcomplex(spaces, c_full)
    gr, fc = gr_filtration(h, fil)
    flags = []
    for m in range(n + 1):
        steps = []
        for a in range(fil.width + m + 2):
            inter = subspace_calc(spaces[m], fc.fil(m, a), "intersect")
            coords = _express(spaces[m].basis, inter.basis, p)
            steps.append(Subspace.from_spanning(p, c_int.dims[m], coords))
        flags.append(steps)
    fci = FilteredComplex(c_int, flags, mode="strict")
    ih, hs, hodge, nat = [], [], [], []
    for i in range(n + 1):
        d_ih = cohomology_dim(c_int, i)
        d_h = cohomology_dim(c_full, i)
        grades = gr_abutment(fci, i)
        if sum(grades) != d_ih:
            raise ValueError(f"Hodge grading does not sum to dim IH^{i}")
        z = kernel_raw(c_int.d(i), p)
        z_amb = mulmod(z, spaces[i].basis, p) if z.shape[0] else (
            np.zeros((0, c_full.dims[i]), dtype=np.int64))
        b_amb = c_full.d(i - 1).T if i > 0 else np.zeros(
            (0, c_full.dims[i]), dtype=np.int64)
        rk_b = rank_raw(b_amb, p) if b_amb.shape[0] else 0
        stacked = np.concatenate([z_amb, b_amb], axis=0)
        rk = (rank_raw(stacked, p) if stacked.shape[0] else 0) - rk_b
        ih.append(d_ih)
        hs.append(d_h)
        hodge.append(grades)
        nat.append(rk)
    return IHReport(ih=ih, h=hs, hodge=hodge, nat_rank=nat)


# ---------------------------------------------------------------------------
# residues of witnesses


def residue_verdict(higgs: HiggsModule, module: FlatModule, I) -> str:
    """Triangularity verdict of the closed-point residue along the stratum I.

    The closed residue acts on the module basis; with the basis permuted
    level-ascending and the grading multiplicities as the partition, a
    one-periodic module is expected to come out 'special' of type
    s = min(|I|, level).
    """
    I = sorted(set(int(i) for i in I))
    res = residue_stratum(module, I)
    levels = np.asarray(higgs.module_levels, dtype=np.int64)
    order = np.argsort(levels, kind="stable")
    mat = res.closed_matrix[np.ix_(order, order)]
    partition = [int(np.sum(levels == q)) for q in range(int(levels.max()) + 1)]
    s = min(len(I), higgs.level)
    return special_triangular_check(PrimeMatrix(module.p, mat), partition, s)


def residue_classification(witness: PeriodicWitness, I) -> str:
    """residue_verdict applied to a one-periodic witness."""
    return residue_verdict(witness.higgs, witness.module, I)
