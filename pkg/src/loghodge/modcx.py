"""Higgs and flat modules over truncated rings, and their complexes.

Both kinds of module are handled through one operator-level representation:
a free (or graded) module is a total F_p-space together with n commuting
component operators (the Higgs field components or the covariant derivatives)
and n multiplication operators for the ring variables.  Complexes, weight
submodules, filtrations, residues and the triangular-matrix machinery all
work at this level, so the push-forward modules built elsewhere can reuse
everything by supplying their own operators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fplin import Subspace, mulmod, subspace_calc
from .complexes import BasedComplex, FilteredComplex, verify_subcomplex, _express, _reduce_mod_rows
from .trunc_ring import RingElement, RingPair

__all__ = [
    "OperatorModule",
    "HiggsModule",
    "FlatModule",
    "Filtration",
    "GradedModule",
    "higgs_complex",
    "deRham_complex",
    "module_complex",
    "multiweight",
    "intersection_submodule",
    "intersection_subspaces",
    "intersection_complex",
    "gr_filtration",
    "residue_stratum",
    "special_triangular_check",
    "fil_image_exchange",
    "form_tags",
]


def form_tags(n: int, m: int):
    """Ordered basis of m-forms: increasing index tuples J with entries 1..n."""
    return list(itertools.combinations(range(1, n + 1), m))


class OperatorModule:
    """Total F_p-space with commuting component and multiplication operators.

    ops[i] is the i-th component operator (0-based over coordinates 1..n),
    mult_ops[i] multiplication by the i-th ring variable.  Subclasses fill
    in construction and validation.
    """

    def __init__(self, rp: RingPair, dim: int, ops, mult_ops, levels=None):
        self.rp = rp
        self.p = rp.p
        self.n = rp.n
        self.r = rp.r
        self.dim = dim
        self.ops = [np.asarray(o, dtype=np.int64) % self.p for o in ops]
        self.mult_ops = [np.asarray(o, dtype=np.int64) % self.p for o in mult_ops]
        for o in self.ops + self.mult_ops:
            if o.shape != (dim, dim):
                raise ValueError("operator shape mismatch")
        self.levels = None if levels is None else np.asarray(levels, dtype=np.int64)

    def check_commuting(self):
        p = self.p
        for i in range(self.n):
            for j in range(i + 1, self.n):
                a, b = self.ops[i], self.ops[j]
                if np.any((mulmod(a, b, p) - mulmod(b, a, p)) % p):
                    raise ValueError(f"components {i + 1} and {j + 1} do not commute")

    def nilpotency_level(self, bound=None) -> int:
        """Least l with every (l+1)-fold product of components zero."""
        p = self.p
        bound = p if bound is None else bound
        current = {(): np.eye(self.dim, dtype=np.int64)}
        level = -1
        for k in range(bound + 1):
            if all(not np.any(m) for m in current.values()):
                return level
            level = k
            nxt = {}
            for beta, m in current.items():
                if not np.any(m):
                    continue
                start = beta[-1] if beta else 0
                for i in range(start, self.n):
                    nxt[beta + (i,)] = mulmod(self.ops[i], m, p)
            current = nxt
        raise ValueError(f"components are not nilpotent of level <= {bound}")


class HiggsModule(OperatorModule):
    """Free module with a Higgs field given by matrices of ring elements.

    theta[i] is an rank x rank nested list of RingElements of the chosen
    ring (downstairs by default); grading, if given, assigns a level to each
    module basis vector and the field must lower levels by exactly one.
    """

    def __init__(self, rp: RingPair, rank: int, theta, ring=None, grading=None,
                 max_level=None):
        ring = rp.down if ring is None else ring
        self.ring = ring
        self.rank = rank
        self.theta = theta
        p = rp.p
        rdim = ring.dim
        dim = rank * rdim
        if len(theta) != rp.n:
            raise ValueError("need one field component per coordinate")
        ops = []
        for comp in theta:
            op = np.zeros((dim, dim), dtype=np.int64)
            for a in range(rank):
                for b in range(rank):
                    entry = comp[a][b]
                    if entry.ring is not ring:
                        raise ValueError("field entry over the wrong ring")
                    if not entry.is_zero():
                        op[a * rdim:(a + 1) * rdim, b * rdim:(b + 1) * rdim] = (
                            ring.mult_matrix(entry)
                        )
            ops.append(op)
        mult_ops = [np.kron(np.eye(rank, dtype=np.int64), ring.shift_matrix(e))
                    for e in np.eye(rp.n, dtype=np.int64)]
        module_levels = None
        if grading is not None:
            if len(grading) != rank:
                raise ValueError("grading must assign a level to each basis vector")
            module_levels = list(grading)
            for comp in theta:
                for a in range(rank):
                    for b in range(rank):
                        if not comp[a][b].is_zero() and grading[a] != grading[b] - 1:
                            raise ValueError(
                                "graded field must lower the level by exactly one"
                            )
        levels = None
        if module_levels is not None:
            levels = np.repeat(np.asarray(module_levels, dtype=np.int64), rdim)
        super().__init__(rp, dim, ops, mult_ops, levels)
        self.module_levels = module_levels
        # ring-entry commutation is the honest Higgs condition
        for i in range(rp.n):
            for j in range(i + 1, rp.n):
                for a in range(rank):
                    for b in range(rank):
                        lhs = ring.zero()
                        rhs = ring.zero()
                        for c in range(rank):
                            lhs = lhs + theta[i][a][c] * theta[j][c][b]
                            rhs = rhs + theta[j][a][c] * theta[i][c][b]
                        if lhs != rhs:
                            raise ValueError(
                                f"field components {i + 1},{j + 1} do not commute"
                            )
        self.level = self.nilpotency_level(max_level if max_level is not None else p)
        if self.level > p - 1:
            raise ValueError(f"nilpotency level {self.level} exceeds p-1")


class FlatModule(OperatorModule):
    """Free upstairs module with assembled covariant derivative operators.

    D[i] acts on the total space of dimension rank*(pM)^n; flatness and the
    Leibniz rule against every ring variable are verified at construction.
    """

    def __init__(self, rp: RingPair, rank: int, D, levels=None, check="auto"):
        ring = rp.up
        self.ring = ring
        self.rank = rank
        dim = rank * ring.dim
        mult_ops = [np.kron(np.eye(rank, dtype=np.int64), ring.shift_matrix(e))
                    for e in np.eye(rp.n, dtype=np.int64)]
        super().__init__(rp, dim, D, mult_ops, levels)
        p = rp.p
        if check == "auto":
            check = "full" if dim <= 300 else "sample"
        # probe vectors: full identity for small modules, a deterministic
        # random sample for big ones (checks stay exact, just not exhaustive)
        if check == "full":
            probes = np.eye(dim, dtype=np.int64)
        else:
            probes = np.random.default_rng(dim).integers(0, p, (8, dim)).T
        for i in range(rp.n):
            for j in range(i + 1, rp.n):
                a, b = self.ops[i], self.ops[j]
                lhs = mulmod(a, mulmod(b, probes, p), p)
                rhs = mulmod(b, mulmod(a, probes, p), p)
                if np.any((lhs - rhs) % p):
                    raise ValueError(
                        f"components {i + 1} and {j + 1} do not commute"
                    )
        # [D_i, t_j] = derive_i(t_j) as operators is the Leibniz rule against
        # the generating variables, which extends to all ring elements
        for i in range(rp.n):
            for j in range(rp.n):
                dtj = rp.derive(ring.variable(j + 1), i + 1)
                want = np.kron(np.eye(rank, dtype=np.int64), ring.mult_matrix(dtj))
                lhs = mulmod(self.ops[i], mulmod(self.mult_ops[j], probes, p), p)
                rhs = (mulmod(self.mult_ops[j], mulmod(self.ops[i], probes, p), p)
                       + mulmod(want, probes, p)) % p
                if np.any((lhs - rhs) % p):
                    raise ValueError(
                        f"Leibniz rule fails for D_{i + 1} against t_{j + 1}"
                    )


class GradedModule(OperatorModule):
    """Associated graded of a filtered flat module, as an operator module.

    Coordinates are the concatenated per-level complement bases; `embed`
    maps graded coordinates to representative vectors in the ambient module.
    """

    def __init__(self, rp, dim, ops, mult_ops, levels, embed, level_dims):
        super().__init__(rp, dim, ops, mult_ops, levels)
        self.embed = embed  # (dim, ambient_dim) rows are representatives
        self.level_dims = level_dims


def module_complex(mod: OperatorModule) -> BasedComplex:
    """Koszul-type complex of the module: degree m term is mod (x) Lambda^m.

    The differential inserts the new one-form in front and pays the sign of
    moving it past the earlier factors: for each i not in J, the block from
    J to J+{i} is (-1)^{#{j in J : j < i}} ops[i].
    """
    n, dim, p = mod.n, mod.dim, mod.p
    tags = [form_tags(n, m) for m in range(n + 1)]
    labels = [[(J, k) for J in tags[m] for k in range(dim)] for m in range(n + 1)]
    offsets = [{J: pos * dim for pos, J in enumerate(tags[m])} for m in range(n + 1)]
    diffs = []
    for m in range(n):
        d = np.zeros((len(tags[m + 1]) * dim, len(tags[m]) * dim), dtype=np.int64)
        for J in tags[m]:
            for i in range(1, n + 1):
                if i in J:
                    continue
                tgt = tuple(sorted(J + (i,)))
                sign = (-1) ** sum(1 for j in J if j < i)
                blk = mod.ops[i - 1] if sign == 1 else (-mod.ops[i - 1]) % p
                d[offsets[m + 1][tgt]:offsets[m + 1][tgt] + dim,
                  offsets[m][J]:offsets[m][J] + dim] = blk
        diffs.append(d)
    return BasedComplex(p, labels, diffs)


def higgs_complex(e: HiggsModule) -> BasedComplex:
    return module_complex(e)


def deRham_complex(h: FlatModule) -> BasedComplex:
    return module_complex(h)


def multiweight(J, rp: RingPair):
    """Multi-weight of the form tag J: 1 in slot i iff dlog t_i divides it."""
    if any(not 1 <= i <= rp.n for i in J):
        raise ValueError(f"malformed form tag {J}")
    return tuple(1 if i in J else 0 for i in range(1, rp.r + 1))


def intersection_submodule(mod: OperatorModule, w) -> Subspace:
    """The weight-w submodule: span of t^alpha op^beta (mod) over alpha+beta=w."""
    w = tuple(int(x) for x in w)
    if len(w) != mod.r:
        raise ValueError(f"weight must have {mod.r} entries")
    p, dim = mod.p, mod.dim
    total = Subspace.zero(p, dim)
    for alpha in itertools.product(*[range(x + 1) for x in w]):
        # t^alpha op^beta with the derivative part applied first
        op = np.eye(dim, dtype=np.int64)
        for i, (a, x) in enumerate(zip(alpha, w)):
            for _ in range(x - a):
                op = mulmod(mod.ops[i], op, p)
        for i, a in enumerate(alpha):
            for _ in range(a):
                op = mulmod(mod.mult_ops[i], op, p)
        total = subspace_calc(total, Subspace.from_spanning(p, dim, op.T), "sum")
    return total


def intersection_subspaces(mod: OperatorModule):
    """Per-degree subspaces spanned by E_{w(J)} (x) omega_J inside the complex."""
    n, dim, p = mod.n, mod.dim, mod.p
    cache = {}
    out = []
    for m in range(n + 1):
        tags = form_tags(n, m)
        rows = []
        for pos, J in enumerate(tags):
            w = multiweight(J, mod.rp)
            if w not in cache:
                cache[w] = intersection_submodule(mod, w)
            basis = cache[w].basis
            block = np.zeros((basis.shape[0], len(tags) * dim), dtype=np.int64)
            block[:, pos * dim:(pos + 1) * dim] = basis
            rows.append(block)
        stacked = (np.concatenate(rows, axis=0) if rows
                   else np.zeros((0, len(tags) * dim), dtype=np.int64))
        out.append(Subspace.from_spanning(p, len(tags) * dim, stacked))
    return out


def intersection_complex(mod: OperatorModule) -> BasedComplex:
    """Subcomplex with degree-m term ⊕_J E_{w(J)} (x) omega_J (closure asserted)."""
    return verify_subcomplex(intersection_subspaces(mod), module_complex(mod))


@dataclass
class Filtration:
    """Decreasing ring-stable flag on a flat module's total space.

    steps[0] must be the full space; steps beyond the list are zero.  Each
    step must be stable under every variable and Griffiths transverse:
    D_i(Fil^q) inside Fil^{q-1}.
    """

    module: FlatModule
    steps: list

    def __post_init__(self):
        h, p = self.module, self.module.p
        if not self.steps or self.steps[0] != Subspace.full(p, h.dim):
            raise ValueError("Fil^0 must be the full space")
        for q in range(len(self.steps) - 1):
            if not subspace_calc(self.steps[q], self.steps[q + 1], "contains"):
                raise ValueError(f"flag not decreasing at step {q}")
        for q, s in enumerate(self.steps):
            for i in range(h.n):
                img = s.basis @ h.mult_ops[i].T % p
                for v in img:
                    if not s.contains_vector(v):
                        raise ValueError(f"Fil^{q} not stable under t_{i + 1}")
                img = s.basis @ h.ops[i].T % p
                tgt = self.step(q - 1)
                for v in img:
                    if not tgt.contains_vector(v):
                        raise ValueError(
                            f"Griffiths transversality fails at Fil^{q}, D_{i + 1}"
                        )

    def step(self, q: int) -> Subspace:
        if q <= 0:
            return self.steps[0]
        if q < len(self.steps):
            return self.steps[q]
        return Subspace.zero(self.module.p, self.module.dim)

    @property
    def width(self) -> int:
        return len(self.steps) - 1


def gr_filtration(h: FlatModule, fil: Filtration):
    """Associated graded Higgs module and the filtered de Rham complex.

    Returns (gr, fc): gr is a GradedModule whose component operators are the
    O-linear maps induced by the D_i between graded pieces, and fc filters
    the de Rham complex by Fil^a(H (x) omega^m) = Fil^{a-m}H (x) omega^m,
    which is strict.
    """
    p = h.p
    L = fil.width
    bases = []
    for q in range(L + 1):
        red = _reduce_mod_rows(fil.step(q).basis, fil.step(q + 1).basis, p)
        from .fplin import rref_raw
        rr, piv = rref_raw(red, p)
        bases.append(rr[: len(piv)].reshape(len(piv), h.dim))
    level_dims = [b.shape[0] for b in bases]
    gdim = sum(level_dims)
    if gdim != h.dim:
        raise ValueError("graded dimensions do not sum to the total dimension")
    offs = np.concatenate([[0], np.cumsum(level_dims)])
    embed = np.concatenate(bases, axis=0)
    levels = np.repeat(np.arange(L + 1), level_dims)

    def blockify(images_per_level, target_level_of):
        op = np.zeros((gdim, gdim), dtype=np.int64)
        for q, img in enumerate(images_per_level):
            tq = target_level_of(q)
            if img is None or not 0 <= tq <= L:
                continue
            coords = _express(bases[tq], img, p)
            op[offs[tq]:offs[tq + 1], offs[q]:offs[q + 1]] = coords.T
        return op

    ops = []
    for i in range(h.n):
        imgs = []
        for q in range(L + 1):
            img = bases[q] @ h.ops[i].T % p
            img = _reduce_mod_rows(img, fil.step(q).basis, p)
            imgs.append(img if q > 0 else None)  # Gr^0 maps to level -1: zero
        ops.append(blockify(imgs, lambda q: q - 1))
    mult_ops = []
    for i in range(h.n):
        imgs = []
        for q in range(L + 1):
            img = bases[q] @ h.mult_ops[i].T % p
            img = _reduce_mod_rows(img, fil.step(q + 1).basis, p)
            imgs.append(img)
        mult_ops.append(blockify(imgs, lambda q: q))
    gr = GradedModule(h.rp, gdim, ops, mult_ops, levels, embed, level_dims)
    gr.rank = h.rank
    gr.ring = h.ring

    cpx = deRham_complex(h)
    n = h.n
    flags = []
    for m in range(n + 1):
        tags = form_tags(n, m)
        amb = len(tags) * h.dim
        flag = [Subspace.full(p, amb)]
        for a in range(1, L + m + 1):
            rows = []
            for pos in range(len(tags)):
                basis = fil.step(a - m).basis
                blk = np.zeros((basis.shape[0], amb), dtype=np.int64)
                blk[:, pos * h.dim:(pos + 1) * h.dim] = basis
                rows.append(blk)
            stacked = (np.concatenate(rows, axis=0) if rows
                       else np.zeros((0, amb), dtype=np.int64))
            flag.append(Subspace.from_spanning(p, amb, stacked))
        flags.append(flag)
    fc = FilteredComplex(cpx, flags, mode="strict")
    return gr, fc


@dataclass(frozen=True)
class ResidueResult:
    """Residue of the connection along a divisor stratum.

    stratum_matrix represents the composed log derivatives on H/(t_i : i in I)H
    over the stratum's coordinate ring; closed_matrix is its value at the
    closed point (a rank x rank matrix); keep/keep_closed record which flat
    coordinates survive each quotient.
    """

    stratum_matrix: np.ndarray
    closed_matrix: np.ndarray
    keep: np.ndarray
    keep_closed: np.ndarray


def residue_stratum(h: FlatModule, I) -> ResidueResult:
    """Composite residue along the stratum {t_i = 0 : i in I}, I inside 1..r."""
    I = sorted(set(int(i) for i in I))
    if not I:
        raise ValueError("stratum index set must be nonempty")
    if any(not 1 <= i <= h.r for i in I):
        raise ValueError(f"stratum indices must be log coordinates 1..{h.r}")
    p = h.p
    R = np.eye(h.dim, dtype=np.int64)
    for i in I:
        R = mulmod(h.ops[i - 1], R, p)
    ring = h.ring
    mono_keep = np.all(ring.exps[:, [i - 1 for i in I]] == 0, axis=1)
    keep = np.nonzero(np.tile(mono_keep, h.rank))[0]
    mono_closed = np.all(ring.exps == 0, axis=1)
    keep0 = np.nonzero(np.tile(mono_closed, h.rank))[0]
    drop = np.setdiff1d(np.arange(h.dim), keep)
    if np.any(R[np.ix_(keep, drop)] % p):
        raise ValueError("residue does not descend to the stratum quotient")
    drop0 = np.setdiff1d(np.arange(h.dim), keep0)
    if np.any(R[np.ix_(keep0, drop0)] % p):
        raise ValueError("residue does not descend to the closed point")
    return ResidueResult(R[np.ix_(keep, keep)], R[np.ix_(keep0, keep0)], keep, keep0)


def _blocks(partition):
    offs = np.concatenate([[0], np.cumsum(partition)])
    return [(int(offs[i]), int(offs[i + 1])) for i in range(len(partition))]


def special_triangular_check(m, partition, s: int) -> str:
    """Classify m as not_triangular / triangular / special for the partition.

    Triangular of type <= s means every block a_{i,i+t} with t > s vanishes
    (blocks act from level j to level i); special additionally requires
    rank(m) = sum_i rank(a_{i,i+s}).
    """
    from .fplin import PrimeMatrix, rank_raw

    if isinstance(m, PrimeMatrix):
        p, a = m.p, m.a
    else:
        raise ValueError("expected a PrimeMatrix")
    partition = [int(x) for x in partition]
    l = len(partition) - 1
    if sum(partition) != a.shape[0] or a.shape[0] != a.shape[1]:
        raise ValueError("partition does not match the matrix size")
    if not 0 <= s <= l:
        raise ValueError(f"need 0 <= s <= {l}")
    blocks = _blocks(partition)
    for i in range(l + 1):
        for j in range(l + 1):
            if j - i > s and np.any(a[blocks[i][0]:blocks[i][1],
                                      blocks[j][0]:blocks[j][1]] % p):
                return "not_triangular"
    total = rank_raw(a, p)
    diag = sum(
        rank_raw(a[blocks[i][0]:blocks[i][1],
                   blocks[i + s][0]:blocks[i + s][1]], p)
        for i in range(l - s + 1)
    )
    return "special" if total == diag else "triangular"


@dataclass(frozen=True)
class ExchangeResult:
    equal: bool
    dim_image_of_fil: int
    dim_image_cap_fil: int


def fil_image_exchange(m, partition, s: int, i: int) -> ExchangeResult:
    """Compare M(Fil^{i+s}V) with im(M) cap Fil^iV for the block filtration.

    Fil^qV spans the coordinate blocks of levels >= q.  Equality holds
    whenever special_triangular_check says "special"; the one-sided
    inclusion M(Fil^{i+s}) inside im(M) cap Fil^i always does.
    """
    from .fplin import PrimeMatrix, image_subspace

    if not isinstance(m, PrimeMatrix):
        raise ValueError("expected a PrimeMatrix")
    p, a = m.p, m.a
    blocks = _blocks([int(x) for x in partition])
    d = a.shape[0]

    def fil_cols(q):
        cols = []
        for lev in range(max(q, 0), len(blocks)):
            cols.extend(range(*blocks[lev]))
        return cols

    lhs = Subspace.from_spanning(p, d, a[:, fil_cols(i + s)].T)
    fil_i = np.zeros((len(fil_cols(i)), d), dtype=np.int64)
    for row, c in enumerate(fil_cols(i)):
        fil_i[row, c] = 1
    rhs = subspace_calc(image_subspace(m), Subspace.from_spanning(p, d, fil_i),
                        "intersect")
    return ExchangeResult(lhs == rhs, lhs.dim, rhs.dim)
