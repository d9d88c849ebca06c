"""Inverse Cartier transform and the Frobenius push-forward machinery.

Starting from a downstairs Higgs module (E, theta) of nilpotency level
< p, the inverse Cartier transform produces an upstairs flat module
(H, D) = (A (x)_Frob E, canonical derivation + twist).  The twist depends
on a chosen Frobenius lifting; liftings are recorded by their deviation
from the standard one t_i -> t_i^p.

The rest of the module makes the comparison between the two sides
computable:

* pushforward_complex rewrites the de Rham complex of H on the monomial
  basis t^a omega_J (x) E (exponents 0 <= a_i < p), where the differential
  has closed-form blocks;
* cartier_map splits that complex as EQ (+) EN with EQ isomorphic to the
  Higgs complex and EN exact, together with the intersection variants cut
  out by the tag multi-weights;
* phi / cech_total / verify_chain_map implement the Cech-level
  quasi-isomorphism between the truncated Higgs complex and the total
  complex glued from several liftings, with its explicit combinatorial
  coefficients;
* homotopy_defect evaluates the two-chart homotopy identity relating the
  comparison maps of two liftings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .complexes import BasedComplex, coordinate_quotient, verify_subcomplex, cohomology_dim
from .fplin import Subspace, mulmod, subspace_calc
from .modcx import (FlatModule, HiggsModule, deRham_complex, form_tags,
                    higgs_complex, intersection_complex, intersection_submodule,
                    intersection_subspaces, module_complex)
from .trunc_ring import RingElement, RingPair

__all__ = [
    "LiftingDatum",
    "CechDatum",
    "inverse_cartier",
    "pushforward_complex",
    "b_tags",
    "b_multiweight",
    "CartierSplit",
    "cartier_map",
    "coefficient_a",
    "coefficient_a_main",
    "coefficient_consistency",
    "antisymmetrize",
    "phi",
    "CechTotal",
    "cech_total",
    "ChainMapReport",
    "verify_chain_map",
    "homotopy_defect",
    "frobenius_embed",
]


# ---------------------------------------------------------------------------
# liftings and covers


@dataclass(frozen=True)
class LiftingDatum:
    """A Frobenius lifting, recorded by its deviation from the standard one.

    elements[i-1] is the upstairs element c_i with zeta(F* omega'_i) =
    zeta_std(F* omega'_i) + d c_i; the standard lifting t_i -> t_i^p has
    all deviations zero.
    """

    rp: RingPair
    elements: tuple

    def __post_init__(self):
        if len(self.elements) != self.rp.n:
            raise ValueError("need one deviation per coordinate")
        for c in self.elements:
            if not isinstance(c, RingElement) or c.ring is not self.rp.up:
                raise ValueError("lifting deviations are upstairs ring elements")

    @classmethod
    def standard(cls, rp: RingPair) -> "LiftingDatum":
        return cls(rp, tuple(rp.up.zero() for _ in range(rp.n)))

    def is_standard(self) -> bool:
        return all(c.is_zero() for c in self.elements)


@dataclass
class CechDatum:
    """A finite family of liftings on the same model; chart 0 is standard.

    The difference elements h_{ab,i} = c^b_i - c^a_i automatically satisfy
    the cocycle relation; it is asserted anyway as a construction check.
    """

    lifts: list

    def __post_init__(self):
        if not self.lifts:
            raise ValueError("need at least one chart")
        rp = self.lifts[0].rp
        if not self.lifts[0].is_standard():
            raise ValueError("chart 0 must carry the standard lifting")
        for lift in self.lifts:
            if lift.rp is not rp:
                raise ValueError("all charts must share one ring pair")
        self.rp = rp
        q, n = len(self.lifts), rp.n
        for a in range(q):
            for b in range(q):
                for c in range(q):
                    for i in range(1, n + 1):
                        if self.h(a, b, i) + self.h(b, c, i) != self.h(a, c, i):
                            raise ValueError("difference cocycle broken")

    @property
    def charts(self) -> int:
        return len(self.lifts)

    def h(self, a: int, b: int, i: int) -> RingElement:
        """The gluing element h_{ab}(F* omega'_i) = c^b_i - c^a_i."""
        return self.lifts[b].elements[i - 1] - self.lifts[a].elements[i - 1]


# ---------------------------------------------------------------------------
# inverse Cartier transform


def frobenius_embed(e: HiggsModule) -> np.ndarray:
    """Matrix of F*: E -> H = A (x)_Frob E on the monomial bases."""
    return np.kron(np.eye(e.rank, dtype=np.int64), e.rp.frobenius_matrix())


def _frob_field_ops(e: HiggsModule):
    """F* theta_i as operators on H (Frobenius applied to every ring entry)."""
    rp = e.rp
    up, rank = rp.up, e.rank
    dim = rank * up.dim
    ops = []
    for comp in e.theta:
        op = np.zeros((dim, dim), dtype=np.int64)
        for a in range(rank):
            for b in range(rank):
                entry = comp[a][b]
                if not entry.is_zero():
                    op[a * up.dim:(a + 1) * up.dim, b * up.dim:(b + 1) * up.dim] = (
                        up.mult_matrix(rp.frobenius(entry))
                    )
        ops.append(op)
    return ops


def inverse_cartier(e: HiggsModule, lift: LiftingDatum | None = None) -> FlatModule:
    """Flat module (A (x)_Frob E, D) attached to (E, theta) and a lifting.

    D_k = canonical derivation + sum_i zeta(F* omega'_i)_k * F* theta_i,
    where the k-component of zeta(F* omega'_i) is delta_{ik} (log),
    delta_{ik} t_i^{p-1} (ordinary), plus derive_k(c_i) for the deviation.
    """
    rp = e.rp
    if e.ring is not rp.down:
        raise ValueError("the inverse Cartier transform starts downstairs")
    lift = LiftingDatum.standard(rp) if lift is None else lift
    if lift.rp is not rp:
        raise ValueError("lifting over the wrong ring pair")
    p, up, rank = rp.p, rp.up, e.rank
    eye = np.eye(rank, dtype=np.int64)
    frob_ops = _frob_field_ops(e)
    D = []
    for k in range(1, rp.n + 1):
        op = np.kron(eye, up.derive_matrix(k, rp.is_log(k)))
        if rp.is_log(k):
            op = (op + frob_ops[k - 1]) % p
        else:
            exp = [0] * rp.n
            exp[k - 1] = p - 1
            shift = np.kron(eye, up.shift_matrix(exp))
            op = (op + mulmod(shift, frob_ops[k - 1], p)) % p
        for i in range(rp.n):
            g = rp.derive(lift.elements[i], k)
            if not g.is_zero():
                mm = np.kron(eye, up.mult_matrix(g))
                op = (op + mulmod(mm, frob_ops[i], p)) % p
        D.append(op)
    levels = None
    if e.module_levels is not None:
        levels = np.repeat(np.asarray(e.module_levels, dtype=np.int64), up.dim)
    h = FlatModule(rp, rank, D, levels=levels)
    h.source_higgs = e
    h.lifting = lift
    return h


# ---------------------------------------------------------------------------
# push-forward complex on the monomial basis


def b_tags(p: int, n: int, m: int):
    """Degree-m push-forward basis tags (a, J): t^a omega_J, 0 <= a_i < p."""
    return [(a, J) for J in form_tags(n, m)
            for a in itertools.product(range(p), repeat=n)]


def b_multiweight(tag, rp: RingPair):
    """Multi-weight of the tag t^a omega_J: slot i hits 1 iff the canonical
    form of the factor at a log coordinate i in J is dlog t_i (a_i = 0)."""
    a, J = tag
    return tuple(1 if (i in J and a[i - 1] == 0) else 0
                 for i in range(1, rp.r + 1))


def _regroup_perm(e: HiggsModule, m: int) -> np.ndarray:
    """Push-forward coordinate -> de Rham coordinate, t^a F*(u^b) = t^{a+pb}."""
    rp = e.rp
    p, n = rp.p, rp.n
    up, down = rp.up, rp.down
    rank, dim_e = e.rank, e.dim
    dim_h = rank * up.dim
    tags = b_tags(p, n, m)
    jpos = {J: i for i, J in enumerate(form_tags(n, m))}
    perm = np.empty(len(tags) * dim_e, dtype=np.int64)
    for tpos, (a, J) in enumerate(tags):
        a_vec = np.asarray(a, dtype=np.int64)
        base_dst = jpos[J] * dim_h
        for dm in range(down.dim):
            um = up.monomial_index(a_vec + p * down.exps[dm])
            for g in range(rank):
                perm[tpos * dim_e + g * down.dim + dm] = base_dst + g * up.dim + um
    return perm


def _check_weight_bookkeeping(e: HiggsModule, tags):
    """Assert the weight behaviour of every differential block.

    For each source tag and coordinate i not in J: a unit coefficient
    (a_i != 0) keeps the multi-weight; the nilpotent field part raises it
    by exactly the i-th unit vector when i is a log coordinate (a_i = 0
    there) and keeps it when i is ordinary.
    """
    rp = e.rp
    p, n = rp.p, rp.n
    for m in range(n):
        for (a, J) in tags[m]:
            w = np.asarray(b_multiweight((a, J), rp))
            for i in range(1, n + 1):
                if i in J:
                    continue
                tgt_j = tuple(sorted(J + (i,)))
                ai = a[i - 1]
                if rp.is_log(i):
                    wt = np.asarray(b_multiweight((a, tgt_j), rp))
                    want = w.copy()
                    if ai == 0:
                        want[i - 1] += 1
                    if not np.array_equal(wt, want):
                        raise ValueError(
                            f"weight bookkeeping broken at tag {(a, J)}, i={i}")
                else:
                    if ai >= 1:
                        a2 = a[:i - 1] + (ai - 1,) + a[i:]
                    else:
                        a2 = a[:i - 1] + (p - 1,) + a[i:]
                    wt = np.asarray(b_multiweight((a2, tgt_j), rp))
                    if not np.array_equal(wt, w):
                        raise ValueError(
                            f"weight bookkeeping broken at tag {(a, J)}, i={i}")


def pushforward_complex(h: FlatModule) -> BasedComplex:
    """The de Rham complex of h on the basis t^a omega_J (x) E.

    Blocks of the differential (source tag (a, J), coordinate i not in J,
    sign of inserting omega_i into omega_J):

    * log i:               (a_i + theta_i) at tag (a, J+i);
    * ordinary i, a_i >= 1: (a_i + u_i theta_i) at tag (a - e_i, J+i);
    * ordinary i, a_i == 0: theta_i at tag (a + (p-1) e_i, J+i).

    The result is asserted equal, through the exponent regrouping
    t^a F*(u^b) = t^{a+pb}, to deRham_complex(h), and the weight
    bookkeeping of every block is asserted.
    """
    e = getattr(h, "source_higgs", None)
    if e is None:
        raise ValueError("push-forward needs a module built by inverse_cartier")
    if not h.lifting.is_standard():
        raise ValueError("the explicit push-forward basis assumes the standard lifting")
    rp = e.rp
    p, n = rp.p, rp.n
    dim_e = e.dim
    tags = [b_tags(p, n, m) for m in range(n + 1)]
    pos = [{t: i for i, t in enumerate(tg)} for tg in tags]
    eye = np.eye(dim_e, dtype=np.int64)
    u_theta = [mulmod(e.mult_ops[i], e.ops[i], p) for i in range(n)]
    diffs = []
    for m in range(n):
        d = np.zeros((len(tags[m + 1]) * dim_e, len(tags[m]) * dim_e),
                     dtype=np.int64)
        for (a, J) in tags[m]:
            src = pos[m][(a, J)] * dim_e
            for i in range(1, n + 1):
                if i in J:
                    continue
                tgt_j = tuple(sorted(J + (i,)))
                sign = (-1) ** sum(1 for j in J if j < i)
                ai = a[i - 1]
                if rp.is_log(i):
                    blk = (ai * eye + e.ops[i - 1]) % p
                    a2 = a
                elif ai >= 1:
                    blk = (ai * eye + u_theta[i - 1]) % p
                    a2 = a[:i - 1] + (ai - 1,) + a[i:]
                else:
                    blk = e.ops[i - 1]
                    a2 = a[:i - 1] + (p - 1,) + a[i:]
                tgt = pos[m + 1][(a2, tgt_j)] * dim_e
                d[tgt:tgt + dim_e, src:src + dim_e] = (sign * blk) % p
        diffs.append(d)
    labels = [[(t, k) for t in tags[m] for k in range(dim_e)]
              for m in range(n + 1)]
    pc = BasedComplex(p, labels, diffs)
    dr = deRham_complex(h)
    perms = [_regroup_perm(e, m) for m in range(n + 1)]
    for m in range(n):
        if np.any((dr.d(m)[np.ix_(perms[m + 1], perms[m])] - pc.d(m)) % p):
            raise ValueError(
                f"push-forward differential disagrees with regrouping in degree {m}")
    _check_weight_bookkeeping(e, tags)
    pc.tags = tags
    pc.regroup = perms
    return pc


# ---------------------------------------------------------------------------
# the splitting EB = EQ (+) EN and its intersection variant


def _q_exponent(J, rp: RingPair):
    """Exponent vector of the distinguished tag in the J-block: p-1 on
    ordinary coordinates of J, zero elsewhere."""
    return tuple(rp.p - 1 if (i in J and not rp.is_log(i)) else 0
                 for i in range(1, rp.n + 1))


@dataclass
class CartierSplit:
    """Higgs complex EP, push-forward complex EB = EQ (+) EN, and the
    coordinate data of the splitting, with the intersection variants."""

    EP: BasedComplex
    EB: BasedComplex
    EQ: BasedComplex
    EN: BasedComplex
    phi_tilde: list
    q_coords: list
    n_coords: list
    EP_int: BasedComplex
    EB_int: BasedComplex
    EQ_int: BasedComplex
    EN_int: BasedComplex


def _restricted_complex(c: BasedComplex, coords_per_degree, other_per_degree,
                        what: str) -> BasedComplex:
    """Coordinate subcomplex on coords; closure against the complement is
    asserted (no differential may leak from coords into other)."""
    p = c.p
    diffs = []
    for m in range(c.top):
        keep_s = coords_per_degree[m]
        drop_t = other_per_degree[m + 1]
        if len(keep_s) and len(drop_t):
            if np.any(c.d(m)[np.ix_(drop_t, keep_s)]):
                raise ValueError(f"{what} is not a subcomplex in degree {m}")
        diffs.append(c.d(m)[np.ix_(coords_per_degree[m + 1], keep_s)])
    labels = [[c.labels[m][i] for i in coords_per_degree[m]]
              for m in range(c.top + 1)]
    return BasedComplex(p, labels, diffs)


def cartier_map(e: HiggsModule) -> CartierSplit:
    """Splitting of the push-forward complex around the Higgs complex.

    EQ sits on the tags with exponent p-1 at ordinary coordinates of J and
    zero elsewhere; the embedding EP -> EB onto those coordinates is a chain
    map (asserted) and EN is the quotient by EQ.  The intersection variant
    replaces each tag block by the weight submodule E_{w(tag)} of E; its
    image under the regrouping is asserted equal to the upstairs
    intersection subspaces.
    """
    rp = e.rp
    p, n = rp.p, rp.n
    dim_e = e.dim
    h = inverse_cartier(e)
    EB = pushforward_complex(h)
    EP = higgs_complex(e)
    tags = EB.tags
    pos = [{t: i for i, t in enumerate(tg)} for tg in tags]

    phi_tilde, q_coords, n_coords = [], [], []
    for m in range(n + 1):
        js = form_tags(n, m)
        mat = np.zeros((EB.dims[m], EP.dims[m]), dtype=np.int64)
        qc = []
        for jpos, J in enumerate(js):
            tpos = pos[m][(_q_exponent(J, rp), J)]
            mat[tpos * dim_e:(tpos + 1) * dim_e,
                jpos * dim_e:(jpos + 1) * dim_e] = np.eye(dim_e, dtype=np.int64)
            qc.extend(range(tpos * dim_e, (tpos + 1) * dim_e))
        qc = sorted(qc)
        phi_tilde.append(mat)
        q_coords.append(qc)
        n_coords.append(sorted(set(range(EB.dims[m])) - set(qc)))
    for m in range(n):
        lhs = mulmod(EB.d(m), phi_tilde[m], p)
        rhs = mulmod(phi_tilde[m + 1], EP.d(m), p)
        if np.any((lhs - rhs) % p):
            raise ValueError(f"comparison embedding is not a chain map in degree {m}")
    EQ = _restricted_complex(EB, q_coords, n_coords, "EQ")
    EN = coordinate_quotient(EB, n_coords)

    # intersection variant: each tag block carries the weight submodule
    EP_int = intersection_complex(e)
    wcache = {}
    spaces = []
    for m in range(n + 1):
        rows = []
        for tpos, tag in enumerate(tags[m]):
            w = b_multiweight(tag, rp)
            if w not in wcache:
                wcache[w] = intersection_submodule(e, w)
            basis = wcache[w].basis
            blk = np.zeros((basis.shape[0], EB.dims[m]), dtype=np.int64)
            blk[:, tpos * dim_e:(tpos + 1) * dim_e] = basis
            rows.append(blk)
        stacked = (np.concatenate(rows, axis=0) if rows
                   else np.zeros((0, EB.dims[m]), dtype=np.int64))
        spaces.append(Subspace.from_spanning(p, EB.dims[m], stacked))
    EB_int = verify_subcomplex(spaces, EB)

    # through regrouping, the tag-block description must match the upstairs
    # intersection subspaces of the flat module
    ups = intersection_subspaces(h)
    for m in range(n + 1):
        moved = np.zeros_like(spaces[m].basis)
        if moved.shape[0]:
            moved[:, EB.regroup[m]] = spaces[m].basis
        permuted = Subspace.from_spanning(p, EB.dims[m], moved)
        if not subspace_calc(permuted, ups[m], "equals"):
            raise ValueError(
                f"intersection tags disagree with the flat module in degree {m}")

    # the stacked bases are block-structured, so every reduced basis row
    # lives in a single tag block; split rows by Q membership
    qrows, nrows = [], []
    for m in range(n + 1):
        q_tags = {(_q_exponent(J, rp), J) for J in form_tags(n, m)}
        qs, ns = [], []
        for ridx, row in enumerate(spaces[m].basis):
            support = np.nonzero(row)[0]
            tpos = int(support[0]) // dim_e
            if int(support[-1]) // dim_e != tpos:
                raise ValueError("intersection basis row crosses tag blocks")
            (qs if tags[m][tpos] in q_tags else ns).append(ridx)
        qrows.append(qs)
        nrows.append(ns)
    EQ_int = _restricted_complex(EB_int, qrows, nrows, "EQ_int")
    EN_int = coordinate_quotient(EB_int, nrows)
    return CartierSplit(EP, EB, EQ, EN, phi_tilde, q_coords, n_coords,
                        EP_int, EB_int, EQ_int, EN_int)


# ---------------------------------------------------------------------------
# coefficient combinatorics


def _inv(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroDivisionError(f"no inverse of 0 mod {p}")
    return pow(x, p - 2, p)


def coefficient_a(jbar, pvec, p: int) -> int:
    """Monomial-form coefficient a'(jbar, pvec) mod p.

    jbar has r >= 1 positive slots, pvec = (s_0..s_r) splits s.  Zero when
    jbar_r + s_r = 0 or sum(jbar) + sum(pvec) >= p; otherwise
    s_0! ... s_{r-1}! / prod_{i=1..r} prod_{j=0..s_{i-1}}
    (j + sum_{l>=i} jbar_l + sum_{l>=i} s_l).
    """
    r = len(jbar)
    if r < 1 or len(pvec) != r + 1:
        raise ValueError("need r >= 1 slots and a split of s into r+1 parts")
    if any(j < 0 for j in jbar) or any(x < 0 for x in pvec):
        raise ValueError("negative entries")
    if jbar[r - 1] + pvec[r] == 0:
        return 0
    if sum(jbar) + sum(pvec) >= p:
        return 0
    num = 1
    for k in range(r):
        num *= math.factorial(pvec[k])
    den = 1
    for i in range(1, r + 1):
        tail = sum(jbar[i - 1:]) + sum(pvec[i:])
        for j in range(pvec[i - 1] + 1):
            f = j + tail
            if f % p == 0:
                raise ZeroDivisionError(
                    f"denominator factor {f} vanishes mod {p} at {jbar}, {pvec}")
            den *= f
    return num % p * _inv(den, p) % p


def coefficient_a_main(jbar, pvec, p: int) -> int:
    """Power-form coefficient a(jbar, pvec) mod p (used by the key formula).

    Zero when sum(jbar) + r + s >= p; otherwise (r+s)! / (s_r! *
    prod_{k=1..r} prod_{l=0..s_{k-1}} (sum_{i>=k} jbar_i + sum_{i>=k} s_i
    + l - k + r + 1)).
    """
    r = len(jbar)
    if r < 1 or len(pvec) != r + 1:
        raise ValueError("need r >= 1 slots and a split of s into r+1 parts")
    s = sum(pvec)
    if sum(jbar) + r + s >= p:
        return 0
    num = math.factorial(r + s)
    den = math.factorial(pvec[r])
    for k in range(1, r + 1):
        tail = sum(jbar[k - 1:]) + sum(pvec[k:])
        for l in range(pvec[k - 1] + 1):
            f = tail + l - k + r + 1
            if f % p == 0:
                raise ZeroDivisionError(
                    f"denominator factor {f} vanishes mod {p} at {jbar}, {pvec}")
            den *= f
    return num % p * _inv(den, p) % p


def _compositions(s: int, parts: int):
    """All splits of s into `parts` non-negative ordered parts."""
    if parts == 1:
        return [(s,)]
    out = []
    for first in range(s + 1):
        for rest in _compositions(s - first, parts - 1):
            out.append((first,) + rest)
    return out


def coefficient_consistency(p: int, r_max: int = 2, s_max: int = 3):
    """Disagreements between the two coefficient forms on the common domain.

    The power form at jbar corresponds to the monomial form at jbar + 1
    slotwise: a(jbar, pvec) * s_0! ... s_r! = (r+s)! * a'(jbar + 1, pvec).
    Returns the list of counterexamples (expected empty).
    """
    bad = []
    for r in range(1, r_max + 1):
        for s in range(0, s_max + 1):
            for pvec in _compositions(s, r + 1):
                bound = p - r - s
                if bound <= 0:
                    continue
                for jbar in itertools.product(range(bound), repeat=r):
                    if sum(jbar) + r + s >= p:
                        continue
                    lhs = coefficient_a_main(jbar, pvec, p)
                    for sk in pvec:
                        lhs = lhs * math.factorial(sk) % p
                    rhs = (math.factorial(r + s) % p *
                           coefficient_a(tuple(j + 1 for j in jbar), pvec, p)) % p
                    if lhs != rhs:
                        bad.append((r, s, jbar, pvec, lhs, rhs))
    return bad


def _perm_sign(seq) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


def antisymmetrize(n: int, s: int, p: int) -> np.ndarray:
    """Matrix of the splitting Lambda^s -> (x)^s of the wedge projection.

    omega_K maps to (1/s!) sum over permutations of the signed tensor word;
    composing with the projection back to Lambda^s gives the identity
    (asserted).  Needs s < p for the 1/s!.
    """
    if s >= p:
        raise ValueError("antisymmetrization needs s < p")
    ks = form_tags(n, s)
    rows = n ** s
    mat = np.zeros((rows, len(ks)), dtype=np.int64)
    proj = np.zeros((len(ks), rows), dtype=np.int64)
    kpos = {K: i for i, K in enumerate(ks)}
    inv_fact = _inv(math.factorial(s) % p, p) if s else 1
    for c, K in enumerate(ks):
        for perm in itertools.permutations(range(s)):
            word = tuple(K[perm[l]] for l in range(s))
            ridx = 0
            for w in word:
                ridx = ridx * n + (w - 1)
            mat[ridx, c] = _perm_sign(perm) * inv_fact % p
    for ridx in range(rows):
        word, x = [], ridx
        for _ in range(s):
            word.append(x % n + 1)
            x //= n
        word.reverse()
        if len(set(word)) == s:
            proj[kpos[tuple(sorted(word))], ridx] = _perm_sign(word)
    if np.any((mulmod(proj, mat, p) - np.eye(len(ks), dtype=np.int64)) % p):
        raise AssertionError("antisymmetrization is not a section of the projection")
    return mat


# ---------------------------------------------------------------------------
# the comparison cochain phi(r, s)


def _wedge_forms(forms, ring):
    """Wedge of one-forms given by component lists; dict tag -> coefficient."""
    s = len(forms)
    if s == 0:
        return {(): ring.one()}
    n = len(forms[0])
    support = sorted({k + 1 for f in forms for k in range(n)
                      if not f[k].is_zero()})
    out = {}
    for K in itertools.combinations(support, s):
        total = ring.zero()
        for perm in itertools.permutations(range(s)):
            term = ring.one()
            for l in range(s):
                term = term * forms[l][K[perm[l]] - 1]
                if term.is_zero():
                    break
            if term.is_zero():
                continue
            total = total + term.scale(_perm_sign(perm))
        if not total.is_zero():
            out[K] = total
    return out


class _Phi:
    """Evaluator for the comparison cochains of a fixed module and cover."""

    def __init__(self, e: HiggsModule, cech: CechDatum, tamper: bool = False):
        rp = e.rp
        if cech.rp is not rp:
            raise ValueError("module and cover live over different ring pairs")
        self.e = e
        self.cech = cech
        self.tamper = tamper
        self.rp = rp
        self.p, self.n = rp.p, rp.n
        self.up = rp.up
        self.rank = e.rank
        self.dim_h = e.rank * rp.up.dim
        self.embed = frobenius_embed(e)
        self.frob_ops = _frob_field_ops(e)
        p, n = self.p, self.n
        q = cech.charts
        self.sigma = {}
        for a in range(q):
            for b in range(q):
                if a == b:
                    continue
                mat = np.zeros((self.dim_h, self.dim_h), dtype=np.int64)
                for i in range(1, n + 1):
                    f = cech.h(a, b, i)
                    if not f.is_zero():
                        mm = np.kron(np.eye(self.rank, dtype=np.int64),
                                     self.up.mult_matrix(f))
                        mat = (mat + mulmod(mm, self.frob_ops[i - 1], p)) % p
                self.sigma[(a, b)] = mat
        self.zeta = []
        for a in range(q):
            chart = []
            for i in range(1, n + 1):
                comps = [self.up.zero() for _ in range(n)]
                comps[i - 1] = (self.up.one() if rp.is_log(i)
                                else self.up.variable(i, p - 1))
                for k in range(1, n + 1):
                    g = rp.derive(cech.lifts[a].elements[i - 1], k)
                    comps[k - 1] = comps[k - 1] + g
                chart.append(comps)
            self.zeta.append(chart)
        self._mult = {}
        self._g = {}
        self._kpos = [{K: i for i, K in enumerate(form_tags(n, m))}
                      for m in range(n + 1)]
        self._inv_fact = [_inv(math.factorial(k) % p, p) for k in range(p)]

    def _mult_mat(self, f: RingElement) -> np.ndarray:
        key = f.coeffs.tobytes()
        if key not in self._mult:
            self._mult[key] = self.up.mult_matrix(f)
        return self._mult[key]

    def ring_mult(self, f: RingElement, vec: np.ndarray) -> np.ndarray:
        """Multiply an H-vector by an upstairs ring element."""
        m = self._mult_mat(f)
        return (vec.reshape(self.rank, self.up.dim) @ m.T % self.p).reshape(-1)

    def G(self, a: int, b: int) -> np.ndarray:
        """Gluing automorphism exp(sigma_{ab}) of H (truncated at p-1)."""
        if (a, b) not in self._g:
            p = self.p
            acc = np.eye(self.dim_h, dtype=np.int64)
            power = np.eye(self.dim_h, dtype=np.int64)
            if a == b:
                self._g[(a, b)] = acc
                return acc
            for k in range(1, p):
                power = mulmod(self.sigma[(a, b)], power, p)
                if not np.any(power):
                    break
                acc = (acc + self._inv_fact[k] * power) % p
            self._g[(a, b)] = acc
        return self._g[(a, b)]

    def coefficient(self, jbar, pvec) -> int:
        if not jbar:
            return 1  # phi(0, s) carries no combinatorial coefficient
        c = coefficient_a_main(jbar, pvec, self.p)
        if self.tamper:
            c = (c + 1) % self.p
        return c

    def phi_rs(self, abar, s: int, omega: np.ndarray) -> np.ndarray:
        """phi(r, s)_abar applied to a Higgs (r+s)-cochain, in chart abar[0].

        Sum over exponent tuples jbar and splits pvec of the coefficient
        times sigma powers on the module part, gluing-element scalars on
        the last r slots and chart one-form pullbacks wedged from the first
        s slots (grouped by pvec), with the 1/(r+s)! of the tensor
        splitting absorbed via a sum over slot orderings.
        """
        p, n = self.p, self.n
        r = len(abar) - 1
        d = r + s
        if not 0 <= s <= n:
            raise ValueError("form degree out of range")
        ks = form_tags(n, s)
        out = np.zeros((len(ks), self.dim_h), dtype=np.int64)
        if d > n:
            return out.reshape(-1)
        if d >= p:
            raise ValueError("total degree must stay below p")
        dim_e = self.e.dim
        kpos = self._kpos[s]
        pvecs = _compositions(s, r + 1)
        acc = {pv: np.zeros_like(out) for pv in pvecs}
        for apos, A in enumerate(form_tags(n, d)):
            block = omega[apos * dim_e:(apos + 1) * dim_e] % p
            if not np.any(block):
                continue
            base = self.embed @ block % p
            for tup in itertools.permutations(A):
                sgn = _perm_sign(tup)
                hval = self.up.one()
                for k in range(r):
                    hval = hval * self.cech.h(abar[k], abar[k + 1], tup[s + k])
                    if hval.is_zero():
                        break
                if hval.is_zero():
                    continue
                for pv in pvecs:
                    forms = []
                    idx = 0
                    for slot, cnt in enumerate(pv):
                        chart = self.zeta[abar[slot]]
                        for _ in range(cnt):
                            forms.append(chart[tup[idx] - 1])
                            idx += 1
                    for K, coeff in _wedge_forms(forms, self.up).items():
                        tot = coeff * hval
                        if tot.is_zero():
                            continue
                        vec = self.ring_mult(tot, base)
                        row = kpos[K]
                        acc[pv][row] = (acc[pv][row] + sgn * vec) % p
        inv_dfact = self._inv_fact[d]
        jlist = sorted(jb for jb in itertools.product(range(p - d), repeat=r)
                       if sum(jb) <= p - 1 - d)
        for pv, mat in acc.items():
            if not np.any(mat):
                continue
            images = {(0,) * r: mat}
            for jbar in jlist:
                if jbar not in images:
                    k = next(i for i in range(r) if jbar[i] > 0)
                    prev = jbar[:k] + (jbar[k] - 1,) + jbar[k + 1:]
                    images[jbar] = mulmod(images[prev],
                                          self.sigma[(abar[k], abar[k + 1])].T, p)
                c = self.coefficient(jbar, pv)
                if c == 0 or not np.any(images[jbar]):
                    continue
                scale = c * inv_dfact % p
                for jk in jbar:
                    scale = scale * self._inv_fact[jk] % p
                out = (out + scale * images[jbar]) % p
        return out.reshape(-1)

    def apply_h(self, mat: np.ndarray, vec: np.ndarray, s: int) -> np.ndarray:
        """Apply an H-operator blockwise to a vector of H (x) Lambda^s."""
        blocks = vec.reshape(-1, self.dim_h)
        return mulmod(blocks, mat.T, self.p).reshape(-1)


def phi(e: HiggsModule, cech: CechDatum, r: int, s: int, omega,
        tamper: bool = False):
    """All components of phi(r, s) applied to a Higgs (r+s)-cochain.

    Returns {abar: vector in chart abar[0] coordinates of H (x) Lambda^s}
    over increasing chart tuples of length r+1.
    """
    ph = _Phi(e, cech, tamper=tamper)
    omega = np.asarray(omega, dtype=np.int64)
    return {abar: ph.phi_rs(abar, s, omega)
            for abar in itertools.combinations(range(cech.charts), r + 1)}


# ---------------------------------------------------------------------------
# the glued total complex


@dataclass
class CechTotal:
    """Total complex of the cover with its augmentation from chart 0."""

    complex: BasedComplex
    augmentation: list
    modules: list
    layout: list


def cech_total(e: HiggsModule, cech: CechDatum) -> CechTotal:
    """Total complex D = nabla + (-1)^s delta over the chart tuples.

    Components of bidegree (r, s) are stored in the first-chart
    trivialization; the 0-th face of delta re-expresses via the gluing
    automorphism.  D^2 = 0 is asserted by construction, the chart-0
    augmentation is asserted to be a chain map and a quasi-isomorphism in
    degrees < p - level (dimension check).
    """
    rp = e.rp
    p, n, l = rp.p, rp.n, e.level
    q = cech.charts
    ph = _Phi(e, cech)
    mods = [inverse_cartier(e, lift) for lift in cech.lifts]
    cxs = [module_complex(h) for h in mods]
    dim_h = ph.dim_h
    top = n + q - 1
    layout = []
    for dgr in range(top + 1):
        blocks = []
        off = 0
        for r in range(min(dgr, q - 1) + 1):
            s = dgr - r
            if s > n:
                continue
            size = len(form_tags(n, s)) * dim_h
            for abar in itertools.combinations(range(q), r + 1):
                blocks.append((r, abar, off, size))
                off += size
        layout.append((blocks, off))
    diffs = []
    for dgr in range(top):
        src_blocks, sdim = layout[dgr]
        tgt_blocks, tdim = layout[dgr + 1]
        tpos = {(r, abar): (off, size) for (r, abar, off, size) in tgt_blocks}
        d = np.zeros((tdim, sdim), dtype=np.int64)
        for (r, abar, off, size) in src_blocks:
            s = dgr - r
            if (r, abar) in tpos:
                toff, tsize = tpos[(r, abar)]
                d[toff:toff + tsize, off:off + size] = cxs[abar[0]].d(s)
            sgn_s = (-1) ** s
            for (r2, beta, toff, tsize) in tgt_blocks:
                if r2 != r + 1:
                    continue
                for k in range(r2 + 1):
                    if beta[:k] + beta[k + 1:] != abar:
                        continue
                    sign = sgn_s * (-1) ** k
                    if k == 0:
                        blk = np.kron(np.eye(size // dim_h, dtype=np.int64),
                                      ph.G(beta[0], beta[1]))
                    else:
                        blk = np.eye(size, dtype=np.int64)
                    d[toff:toff + tsize, off:off + size] = (
                        d[toff:toff + tsize, off:off + size] + sign * blk) % p
        diffs.append(d)
    labels = [[(r, abar, i) for (r, abar, off, size) in layout[dgr][0]
               for i in range(size)] for dgr in range(top + 1)]
    total = BasedComplex(p, labels, diffs)
    aug = []
    for s in range(n + 1):
        blocks, tdim = layout[s]
        mat = np.zeros((tdim, len(form_tags(n, s)) * dim_h), dtype=np.int64)
        for (r, abar, off, size) in blocks:
            if r != 0:
                continue
            mat[off:off + size, :] = np.kron(
                np.eye(size // dim_h, dtype=np.int64), ph.G(abar[0], 0))
        aug.append(mat)
    for s in range(n + 1):
        lhs = mulmod(total.d(s), aug[s], p)
        rhs = (mulmod(aug[s + 1], cxs[0].d(s), p) if s < n
               else np.zeros_like(lhs))
        if np.any((lhs - rhs) % p):
            raise ValueError(f"augmentation is not a chain map in degree {s}")
    for dgr in range(min(top, p - l - 1) + 1):
        want = cohomology_dim(cxs[0], dgr) if dgr <= n else 0
        if cohomology_dim(total, dgr) != want:
            raise ValueError(
                f"augmentation is not a quasi-isomorphism in degree {dgr}")
    return CechTotal(total, aug, mods, layout)


# ---------------------------------------------------------------------------
# the chain-map identity and the two-chart homotopy


@dataclass
class ChainMapReport:
    """Outcome of the chain-map verification for one module and cover."""

    ok: bool
    degrees: list
    defects: list
    intersection_ok: bool
    intersection_failures: list


def verify_chain_map(e: HiggsModule, cech: CechDatum, bound=None, rng=None,
                     samples: int = 2, tamper: bool = False) -> ChainMapReport:
    """Check D(phi_d(omega)) = phi_{d+1}(theta ^ omega) for d+1 < bound.

    omega runs over random Higgs cochains per degree; the defect of every
    component is recorded.  Also asserts the intersection variant: phi of
    each intersection basis cochain lands in the intersection subspace of
    the target chart.  bound defaults to p - level.
    """
    rp = e.rp
    p, n, l = rp.p, rp.n, e.level
    bound = p - l if bound is None else bound
    if bound > p - l:
        raise ValueError("degree bound exceeds p - level")
    ph = _Phi(e, cech, tamper=tamper)
    EP = higgs_complex(e)
    mods = [inverse_cartier(e, lift) for lift in cech.lifts]
    cxs = [module_complex(h) for h in mods]
    rng = np.random.default_rng(0) if rng is None else rng
    q = cech.charts

    def phi_all(vec, dgr):
        comp = {}
        for r in range(min(dgr, q - 1) + 1):
            if dgr - r > n:
                continue
            for abar in itertools.combinations(range(q), r + 1):
                comp[(r, abar)] = ph.phi_rs(abar, dgr - r, vec)
        return comp

    def total_d(comp, dgr):
        out = {}
        for r2 in range(min(dgr + 1, q - 1) + 1):
            s2 = dgr + 1 - r2
            if s2 > n:
                continue
            for beta in itertools.combinations(range(q), r2 + 1):
                acc = np.zeros(len(form_tags(n, s2)) * ph.dim_h, dtype=np.int64)
                src = comp.get((r2, beta))
                if src is not None:
                    acc = (acc + cxs[beta[0]].d(s2 - 1) @ src) % p
                if r2 >= 1:
                    for k in range(r2 + 1):
                        face = comp.get((r2 - 1, beta[:k] + beta[k + 1:]))
                        if face is None:
                            continue
                        v = face
                        if k == 0:
                            v = ph.apply_h(ph.G(beta[0], beta[1]), v, s2)
                        acc = (acc + (-1) ** (s2 + k) * v) % p
                out[(r2, beta)] = acc
        return out

    defects, degrees = [], []
    for dgr in range(min(bound - 1, n + 1)):
        degrees.append(dgr)
        for _ in range(samples):
            if EP.dims[dgr] == 0:
                continue
            omega = rng.integers(0, p, EP.dims[dgr])
            lhs = total_d(phi_all(omega, dgr), dgr)
            rhs = phi_all((EP.d(dgr) @ omega) % p, dgr + 1)
            for key in sorted(set(lhs) | set(rhs)):
                diff = (lhs.get(key, 0) - rhs.get(key, 0)) % p
                if np.any(diff):
                    defects.append((dgr, key, diff))

    ep_int = intersection_subspaces(e)
    ups = [intersection_subspaces(h) for h in mods]
    int_fail = []
    for dgr in range(min(bound, n + 1)):
        for row in ep_int[dgr].basis:
            for (r, abar), v in phi_all(row % p, dgr).items():
                if not ups[abar[0]][dgr - r].contains_vector(v % p):
                    int_fail.append((dgr, abar))
    return ChainMapReport(ok=not defects, degrees=degrees, defects=defects,
                          intersection_ok=not int_fail,
                          intersection_failures=int_fail)


def homotopy_defect(e: HiggsModule, lift_a: LiftingDatum, lift_b: LiftingDatum,
                    s: int) -> np.ndarray:
    """Residual of the two-lifting homotopy identity on Higgs s-cochains.

    G_{ab} (id (x) zeta_b^s) F* - (id (x) zeta_a^s) F*
      = nabla_a o (-1)^{s-1} phi(1, s-1)_{ab} + (-1)^s phi(1, s)_{ab} o theta,
    evaluated on the full standard basis; returns the stacked residual
    matrix (one row per basis cochain).  Needs s <= p - level - 1.
    """
    rp = e.rp
    p, n, l = rp.p, rp.n, e.level
    if s > p - l - 1:
        raise ValueError("degree exceeds the homotopy range p - level - 1")
    std = LiftingDatum.standard(rp)
    cech = CechDatum([std, lift_a, lift_b])
    ph = _Phi(e, cech)
    EP = higgs_complex(e)
    h_a = inverse_cartier(e, lift_a)
    cx_a = module_complex(h_a)
    dim_s = EP.dims[s] if s <= n else 0
    out_dim = len(form_tags(n, s)) * ph.dim_h
    res = np.zeros((dim_s, out_dim), dtype=np.int64)
    g_ab = ph.G(1, 2)
    for idx in range(dim_s):
        omega = np.zeros(dim_s, dtype=np.int64)
        omega[idx] = 1
        lhs = (ph.apply_h(g_ab, ph.phi_rs((2,), s, omega), s)
               - ph.phi_rs((1,), s, omega)) % p
        rhs = np.zeros(out_dim, dtype=np.int64)
        if s >= 1:
            part = ph.phi_rs((1, 2), s - 1, omega)
            rhs = (rhs + (-1) ** (s - 1) * (cx_a.d(s - 1) @ part)) % p
        if s < n:
            theta_omega = (EP.d(s) @ omega) % p
            rhs = (rhs + (-1) ** s * ph.phi_rs((1, 2), s, theta_omega)) % p
        res[idx] = (lhs - rhs) % p
    return res
