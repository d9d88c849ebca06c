"""Finite based cochain complexes over F_p and their filtered refinements.

A BasedComplex stores, per degree, a labeled basis and the differential as a
plain int64 matrix mod p; d^2 = 0 is checked at construction.  On top of that
FilteredComplex keeps a decreasing flag of subspaces per degree and provides
the E1 page of the associated spectral sequence plus the graded dimensions of
the abutment, so E1 degeneration can be decided by pure dimension counting.
"""

from __future__ import annotations

import numpy as np

from .fplin import PrimeMatrix, Subspace, kernel_raw, mulmod, rank_raw, rref_raw, subspace_calc

__all__ = [
    "BasedComplex",
    "FilteredComplex",
    "cohomology",
    "cohomology_dim",
    "e1_page",
    "gr_abutment",
    "verify_subcomplex",
    "coordinate_quotient",
    "is_degenerate",
    "SubcomplexError",
]


class SubcomplexError(ValueError):
    """Raised when a claimed subcomplex is not closed under d.

    Carries the offending degree and a witness vector whose image leaves
    the subspace.
    """

    def __init__(self, degree, witness):
        self.degree = degree
        self.witness = witness
        super().__init__(f"not closed under d in degree {degree}")


class BasedComplex:
    """Cochain complex 0 -> C^0 -> ... -> C^top -> 0 with labeled bases.

    diffs[m] is the matrix of d_m : C^m -> C^{m+1}, shape (dim_{m+1}, dim_m).
    """

    def __init__(self, p: int, labels, diffs, check=True):
        self.p = p
        self.labels = [list(l) for l in labels]
        self.dims = [len(l) for l in self.labels]
        self.top = len(self.dims) - 1
        self.diffs = []
        for m, d in enumerate(diffs):
            d = np.asarray(d, dtype=np.int64) % p
            if d.shape != (self.dims[m + 1], self.dims[m]):
                raise ValueError(
                    f"d_{m} has shape {d.shape}, expected "
                    f"({self.dims[m + 1]}, {self.dims[m]})"
                )
            self.diffs.append(d)
        if len(self.diffs) != self.top:
            raise ValueError("need one differential per consecutive degree pair")
        if check:
            for m in range(self.top - 1):
                if self.dims[m] and np.any(
                    mulmod(self.diffs[m + 1], self.diffs[m], p)
                ):
                    raise ValueError(f"d^2 != 0 between degrees {m} and {m + 2}")

    def d(self, m: int) -> np.ndarray:
        """d_m as a matrix; zero matrix outside the degree range."""
        if 0 <= m < self.top:
            return self.diffs[m]
        rows = self.dims[m + 1] if 0 <= m + 1 <= self.top else 0
        cols = self.dims[m] if 0 <= m <= self.top else 0
        return np.zeros((rows, cols), dtype=np.int64)

    def euler_characteristic(self) -> int:
        return sum((-1) ** m * dim for m, dim in enumerate(self.dims))

    def __repr__(self):
        return f"BasedComplex(p={self.p}, dims={self.dims})"


def _reduce_mod_rows(vectors: np.ndarray, rref_rows: np.ndarray, p: int) -> np.ndarray:
    """Reduce each row of `vectors` modulo the row space of rref_rows."""
    out = vectors % p
    for row in rref_rows:
        piv = int(np.nonzero(row)[0][0]) if np.any(row) else None
        if piv is None:
            continue
        out = (out - np.outer(out[:, piv], row)) % p
    return out


def _express(basis_rows: np.ndarray, vectors: np.ndarray, p: int) -> np.ndarray:
    """Coordinates of `vectors` (rows) in the independent row basis.

    Returns X with X @ basis_rows = vectors (mod p); raises if some vector
    is outside the span.
    """
    k = basis_rows.shape[0]
    if k == 0:
        if np.any(vectors % p):
            raise ValueError("vector outside span of empty basis")
        return np.zeros((vectors.shape[0], 0), dtype=np.int64)
    aug = np.concatenate([basis_rows.T % p, vectors.T % p], axis=1)
    red, pivots = rref_raw(aug, p)
    if any(c >= k for c in pivots):
        raise ValueError("vector outside span of basis")
    # basis columns are independent, so rref is [I_k | X; 0 | 0]
    return red[:k, k:].T


def cohomology(c: BasedComplex, m: int) -> tuple[int, PrimeMatrix]:
    """H^m = ker d_m / im d_{m-1}: dimension and representative cocycles.

    Representatives are rows of the returned matrix; they lie in ker d_m and
    project to a basis of the quotient.
    """
    if not 0 <= m <= c.top:
        raise IndexError(f"degree {m} out of range 0..{c.top}")
    p = c.p
    ker = kernel_raw(c.d(m), p)
    im_rref, im_pivots = rref_raw(c.d(m - 1).T, p)
    im_rref = im_rref[: len(im_pivots)]
    reduced = _reduce_mod_rows(ker, im_rref, p)
    reps, pivots = rref_raw(reduced, p)
    reps = reps[: len(pivots)]
    return len(pivots), PrimeMatrix(p, reps.reshape(len(pivots), c.dims[m]))


def cohomology_dim(c: BasedComplex, m: int) -> int:
    """dim H^m via ranks only (no representatives materialized)."""
    if not 0 <= m <= c.top:
        raise IndexError(f"degree {m} out of range 0..{c.top}")
    return c.dims[m] - rank_raw(c.d(m), c.p) - rank_raw(c.d(m - 1), c.p)


def verify_subcomplex(sub, c: BasedComplex) -> BasedComplex:
    """Assert the per-degree subspaces are d-stable and restrict the complex.

    The restricted complex uses each subspace's canonical (rref) basis; its
    labels record the ambient degree and basis position.
    """
    if len(sub) != c.top + 1:
        raise ValueError("need one subspace per degree")
    p = c.p
    bases = []
    for m, s in enumerate(sub):
        if s.ambient_dim != c.dims[m]:
            raise ValueError(f"ambient dimension mismatch in degree {m}")
        bases.append(s.basis)
    diffs = []
    for m in range(c.top):
        images = mulmod(bases[m], c.d(m).T, p)
        try:
            coords = _express(bases[m + 1], images, p)
        except ValueError:
            bad = _reduce_mod_rows(images, bases[m + 1], p)
            row_idx = int(np.nonzero(np.any(bad, axis=1))[0][0])
            raise SubcomplexError(m, bases[m][row_idx]) from None
        diffs.append(coords.T)
    labels = [[("sub", m, i) for i in range(b.shape[0])] for m, b in enumerate(bases)]
    return BasedComplex(p, labels, diffs)


def coordinate_quotient(c: BasedComplex, keep) -> BasedComplex:
    """Quotient of c by the span of the dropped coordinates.

    `keep` gives, per degree, the indices of the surviving basis vectors.
    The span of the dropped coordinates must itself be a subcomplex (its
    image under d must have no component on kept coordinates); the quotient
    differential is then just the kept submatrix.
    """
    p = c.p
    keep = [np.asarray(sorted(k), dtype=np.int64) for k in keep]
    drop = [
        np.setdiff1d(np.arange(c.dims[m]), keep[m]) for m in range(c.top + 1)
    ]
    for m in range(c.top):
        bad = c.d(m)[np.ix_(keep[m + 1], drop[m])] % p
        if np.any(bad):
            col = drop[m][int(np.nonzero(bad)[1][0])]
            raise SubcomplexError(m, f"dropped coordinate {col} maps onto kept ones")
    labels = [[c.labels[m][i] for i in keep[m]] for m in range(c.top + 1)]
    diffs = [c.d(m)[np.ix_(keep[m + 1], keep[m])] for m in range(c.top)]
    return BasedComplex(p, labels, diffs)


class FilteredComplex:
    """A BasedComplex with a decreasing flag of subspaces per degree.

    flags[m] is the list [Fil^0, Fil^1, ..., Fil^L] in degree m with
    Fil^0 the full space; Fil^a for a > L is taken to be zero.  In strict
    mode d(Fil^a) must land in Fil^a, in griffiths mode in Fil^{a-1}.
    The E1 page is only defined in strict mode.
    """

    def __init__(self, c: BasedComplex, flags, mode: str = "strict"):
        if mode not in ("strict", "griffiths"):
            raise ValueError("mode must be 'strict' or 'griffiths'")
        if len(flags) != c.top + 1:
            raise ValueError("need one flag per degree")
        self.complex = c
        self.mode = mode
        p = c.p
        self.levels = max(len(f) for f in flags)
        self.flags = []
        for m, f in enumerate(flags):
            f = list(f)
            if not f or f[0] != Subspace.full(p, c.dims[m]):
                raise ValueError(f"Fil^0 must be the full space in degree {m}")
            for a in range(len(f) - 1):
                if not subspace_calc(f[a], f[a + 1], "contains"):
                    raise ValueError(f"flag not decreasing in degree {m} at step {a}")
            self.flags.append(f)
        shift = 0 if mode == "strict" else 1
        for m in range(c.top):
            for a in range(self.levels):
                img = self.fil(m, a).basis @ c.d(m).T % p
                tgt = self.fil(m + 1, max(a - shift, 0))
                for v in img:
                    if not tgt.contains_vector(v):
                        raise ValueError(
                            f"d does not respect the filtration "
                            f"(degree {m}, level {a})"
                        )

    def fil(self, m: int, a: int) -> Subspace:
        """Fil^a in degree m, clamped: full for a <= 0, zero past the flag."""
        f = self.flags[m]
        if a <= 0:
            return f[0]
        if a < len(f):
            return f[a]
        return Subspace.zero(self.complex.p, self.complex.dims[m])

    def gr_complex(self, a: int) -> BasedComplex:
        """The graded piece Gr^a = Fil^a / Fil^{a+1} with induced differential.

        Only valid in strict mode.  The basis in each degree is a reduced
        complement of Fil^{a+1} inside Fil^a.
        """
        if self.mode != "strict":
            raise ValueError("graded complexes need a strict filtration")
        c, p = self.complex, self.complex.p
        bases = []
        for m in range(c.top + 1):
            reduced = _reduce_mod_rows(self.fil(m, a).basis, self.fil(m, a + 1).basis, p)
            rr, pivots = rref_raw(reduced, p)
            bases.append(rr[: len(pivots)].reshape(len(pivots), c.dims[m]))
        diffs = []
        for m in range(c.top):
            img = bases[m] @ c.d(m).T % p
            img = _reduce_mod_rows(img, self.fil(m + 1, a + 1).basis, p)
            diffs.append(_express(bases[m + 1], img, p).T)
        labels = [[("gr", a, m, i) for i in range(b.shape[0])] for m, b in enumerate(bases)]
        return BasedComplex(p, labels, diffs)


def e1_page(fc: FilteredComplex) -> dict:
    """E1 dimensions: {(a, b): dim H^{a+b}(Gr^a)} over the nonzero range."""
    out = {}
    for a in range(fc.levels):
        gr = fc.gr_complex(a)
        for tot in range(gr.top + 1):
            dim = cohomology_dim(gr, tot)
            if dim:
                out[(a, tot - a)] = dim
    return out


def gr_abutment(fc: FilteredComplex, b: int) -> list:
    """Dimensions of Gr^a H^b for the filtration induced on cohomology.

    Gr^a H^b = (ker_b cap Fil^a + im_{b-1}) / (ker_b cap Fil^{a+1} + im_{b-1});
    the returned list is indexed by a = 0..levels-1 and sums to dim H^b.
    """
    c, p = fc.complex, fc.complex.p
    if not 0 <= b <= c.top:
        raise IndexError(f"degree {b} out of range 0..{c.top}")
    ker = Subspace.from_spanning(p, c.dims[b], kernel_raw(c.d(b), p))
    im = Subspace.from_spanning(p, c.dims[b], c.d(b - 1).T)
    out = []
    prev = None
    for a in range(fc.levels + 1):
        piece = subspace_calc(
            subspace_calc(ker, fc.fil(b, a), "intersect"), im, "sum"
        )
        if prev is not None:
            out.append(prev.dim - piece.dim)
        prev = piece
    return out


def is_degenerate(fc: FilteredComplex, degree_bound=None) -> bool:
    """Dimension criterion for E1 degeneration, optionally truncated.

    Compares sum_a dim E1^{a,b-a} with dim H^b for every total degree b
    (below degree_bound if given); the E1 side always dominates.
    """
    e1 = e1_page(fc)
    top = fc.complex.top if degree_bound is None else min(fc.complex.top, degree_bound - 1)
    for b in range(top + 1):
        e1_total = sum(v for (aa, bb), v in e1.items() if aa + bb == b)
        if e1_total != cohomology_dim(fc.complex, b):
            return False
    return True
