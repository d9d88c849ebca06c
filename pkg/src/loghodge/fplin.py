"""Exact dense linear algebra over a runtime prime field F_p.

Matrices are stored as numpy int64 arrays with entries reduced to [0, p).
The workhorse is a blocked LU-style row reduction that keeps the inner
update as a float64 matmul (exact as long as accumulated dot products stay
below 2**53); for primes too large for that we fall back to a plain
object-dtype elimination.

Subspaces of F_p^d are canonicalized by the reduced row echelon form of a
spanning set, so equality of two constructions is entrywise comparison of
their bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit

__all__ = [
    "FieldSpec",
    "PrimeMatrix",
    "Subspace",
    "reduce_matrix",
    "subspace_calc",
    "rank_raw",
    "rref_raw",
    "kernel_raw",
    "mulmod",
]

_PANEL = 256


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The base field F_p; p is a runtime parameter, not a compile-time one."""

    p: int

    def __post_init__(self):
        if not (2 < self.p < 2**31):
            raise ValueError(f"p = {self.p} out of supported range (2, 2^31)")
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 is not invertible mod {self.p}")
        return pow(a, self.p - 2, self.p)


def _float_safe(p: int) -> bool:
    # one product must be exactly representable and we chunk dot products
    return (p - 1) ** 2 < 2**53


def mulmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Exact matrix product mod p."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if not _float_safe(p):
        return np.asarray((a.astype(object) @ b.astype(object)) % p, dtype=object)
    af = a.astype(np.float64)
    bf = b.astype(np.float64)
    # chunk the inner dimension so accumulated sums stay below 2**53
    kmax = max(1, (2**53 - 1) // ((p - 1) ** 2))
    k = a.shape[1]
    if k <= kmax:
        return (af @ bf % p).astype(np.int64)
    acc = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    for k0 in range(0, k, kmax):
        acc = (acc + af[:, k0 : k0 + kmax] @ bf[k0 : k0 + kmax]) % p
    return acc.astype(np.int64)


def _mm_f64(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """float64 matmul mod p, chunked so accumulation stays exact."""
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]))
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    kmax = max(1, (2**53 - 1) // ((p - 1) ** 2))
    k = a.shape[1]
    if k <= kmax:
        c = a @ b
        np.remainder(c, p, out=c)
        return c
    acc = np.zeros((a.shape[0], b.shape[1]))
    for k0 in range(0, k, kmax):
        acc = (acc + a[:, k0 : k0 + kmax] @ b[k0 : k0 + kmax]) % p
    return acc


@njit(cache=True)
def _panel_lu_nb(P: np.ndarray, p: int):
    """LU-factor a float64 panel in place (unit multipliers stashed below
    the diagonal), with partial pivoting.  Returns (perm, pivot columns)."""
    m, w = P.shape
    perm = np.arange(m)
    pivcols = np.empty(w, np.int64)
    npiv = 0
    prow = 0
    for j in range(w):
        if prow >= m:
            break
        rp = -1
        for i in range(prow, m):
            if P[i, j] != 0.0:
                rp = i
                break
        if rp == -1:
            continue
        if rp != prow:
            for c in range(w):
                tmp = P[prow, c]
                P[prow, c] = P[rp, c]
                P[rp, c] = tmp
            t = perm[prow]
            perm[prow] = perm[rp]
            perm[rp] = t
        # modular inverse of the pivot by square-and-multiply
        inv = 1
        b = int(P[prow, j]) % p
        e = p - 2
        while e:
            if e & 1:
                inv = (inv * b) % p
            b = (b * b) % p
            e >>= 1
        invp = 1.0 / p
        fp = float(p)
        for i in range(prow + 1, m):
            if P[i, j] != 0.0:
                mlt = (int(P[i, j]) * inv) % p
                neg = float(p - mlt)
                for c in range(j + 1, w):
                    t = P[i, c] + neg * P[prow, c]
                    # reduce mod p without fmod; q may be off by one
                    q = float(int(t * invp))
                    t -= q * fp
                    if t < 0.0:
                        t += fp
                    elif t >= fp:
                        t -= fp
                    P[i, c] = t
                P[i, j] = float(mlt)
        pivcols[npiv] = j
        npiv += 1
        prow += 1
    return perm, pivcols[:npiv]


def _row_echelon_f64(A: np.ndarray, p: int) -> list[int]:
    """In-place forward elimination of float64 A (entries in [0,p)) to an
    unscaled row echelon form with LU-style blocked trailing updates.

    Returns the pivot column list; pivot i lives in row i.
    """
    m, n = A.shape
    row = 0
    pivots: list[int] = []
    c0 = 0
    while c0 < n and row < m:
        c1 = min(c0 + _PANEL, n)
        r0 = row
        # factor a contiguous copy of the panel (explicit copy: a view would
        # be scrambled by the row permutation below when the panel is
        # full-width)
        P = A[r0:, c0:c1].copy()
        perm, rel_pivcols = _panel_lu_nb(P, p)
        panel_pivcols = [c0 + int(j) for j in rel_pivcols]
        pivots.extend(panel_pivcols)
        k = len(panel_pivcols)
        if c1 < n and not np.array_equal(perm, np.arange(m - r0)):
            # only the trailing columns need the permutation: the panel is
            # overwritten below and columns < c0 are zero on these rows
            A[r0:, c1:] = A[r0 + perm, c1:]
        A[r0:, c0:c1] = P
        row = r0 + k
        if k and c1 < n:
            # apply the recorded panel transformation to the trailing columns
            rel = [int(j) for j in rel_pivcols]
            L11 = np.tril(P[np.ix_(range(k), rel)], -1)
            np.fill_diagonal(L11, 1.0)
            L11_inv = _unit_lower_inverse(L11, p)
            U12 = _mm_f64(L11_inv, A[r0:row, c1:], p)
            if row < m:
                L21 = np.ascontiguousarray(P[k:][:, rel])
                T = _mm_f64(L21, U12, p)
                tr = A[row:, c1:]
                np.subtract(tr, T, out=T)
                np.remainder(T, p, out=T)
                tr[...] = T
            A[r0:row, c1:] = U12
        # clear the stashed multipliers
        for j, c in enumerate(panel_pivcols):
            A[r0 + j + 1 :, c] = 0.0
        c0 = c1
    # scale pivot rows to unit pivots
    for i, c in enumerate(pivots):
        v = int(A[i, c])
        if v != 1:
            A[i, c:] = (A[i, c:] * pow(v, p - 2, p)) % p
    return pivots


def _unit_lower_inverse(L: np.ndarray, p: int) -> np.ndarray:
    k = L.shape[0]
    inv = np.eye(k)
    for i in range(1, k):
        # row i of inverse: e_i - sum_j L[i,j] * inv_row_j
        inv[i, :i] = (-L[i, :i] @ inv[:i, :i]) % p
    return inv % p


def _back_substitute(A: np.ndarray, pivots: list[int], p: int) -> None:
    """Turn a unit-pivot row echelon form into the reduced one, in place."""
    r = len(pivots)
    b = _PANEL
    for i1 in range(r, 0, -b):
        i0 = max(0, i1 - b)
        # reduce the block internally (rows i0..i1-1 against later pivots)
        for j in range(i1 - 1, i0, -1):
            c = pivots[j]
            coeffs = A[i0:j, c].copy()
            if np.any(coeffs):
                A[i0:j, c:] = (A[i0:j, c:] + np.outer(p - coeffs, A[j, c:])) % p
        if i0 > 0:
            cs = pivots[i0]
            block_cols = [pivots[j] for j in range(i0, i1)]
            C = np.ascontiguousarray(A[:i0, block_cols])
            if np.any(C):
                A[:i0, cs:] = (
                    A[:i0, cs:] + (p - 1) * _mm_f64(C, A[i0:i1, cs:], p)
                ) % p


def _row_echelon_obj(A: np.ndarray, p: int) -> list[int]:
    """Plain elimination on an object-dtype array (large-p fallback)."""
    m, n = A.shape
    row = 0
    pivots: list[int] = []
    for c in range(n):
        if row >= m:
            break
        rp = None
        for i in range(row, m):
            if A[i, c] % p:
                rp = i
                break
        if rp is None:
            continue
        if rp != row:
            A[[row, rp]] = A[[rp, row]]
        inv = pow(int(A[row, c]), p - 2, p)
        A[row] = (A[row] * inv) % p
        for i in range(row + 1, m):
            if A[i, c]:
                A[i] = (A[i] - A[i, c] * A[row]) % p
        pivots.append(c)
        row += 1
    return pivots


def rref_raw(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (new array) and pivot columns."""
    a = np.asarray(a)
    if a.size == 0:
        return np.zeros(a.shape, dtype=np.int64), []
    if _float_safe(p):
        A = (a % p).astype(np.float64)
        pivots = _row_echelon_f64(A, p)
        _back_substitute(A, pivots, p)
        return A.astype(np.int64), pivots
    A = (a % p).astype(object)
    pivots = _row_echelon_obj(A, p)
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        for j in range(i):
            if A[j, c]:
                A[j] = (A[j] - A[j, c] * A[i]) % p
    return A, pivots


def rank_raw(a: np.ndarray, p: int) -> int:
    """Rank only; skips the back-substitution pass."""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if _float_safe(p):
        A = (a % p).astype(np.float64)
        return len(_row_echelon_f64(A, p))
    A = (a % p).astype(object)
    return len(_row_echelon_obj(A, p))


def kernel_raw(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right kernel, one vector per row (one per free column)."""
    a = np.asarray(a)
    n = a.shape[1]
    R, pivots = rref_raw(a, p)
    free = [c for c in range(n) if c not in set(pivots)]
    K = np.zeros((len(free), n), dtype=np.int64)
    for i, c in enumerate(free):
        K[i, c] = 1
        for j, pc in enumerate(pivots):
            K[i, pc] = (-int(R[j, c])) % p
    return K


class PrimeMatrix:
    """Immutable dense matrix over F_p."""

    __slots__ = ("p", "a")

    def __init__(self, p: int, entries):
        self.p = p
        a = np.asarray(entries, dtype=np.int64) % p
        if a.ndim != 2:
            raise ValueError("PrimeMatrix needs a 2-D entry array")
        a.setflags(write=False)
        self.a = a

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "PrimeMatrix":
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, n: int) -> "PrimeMatrix":
        return cls(p, np.eye(n, dtype=np.int64))

    def _check(self, other: "PrimeMatrix"):
        if self.p != other.p:
            raise ValueError("prime mismatch")

    def __matmul__(self, other: "PrimeMatrix") -> "PrimeMatrix":
        self._check(other)
        return PrimeMatrix(self.p, mulmod(self.a, other.a, self.p))

    def __add__(self, other: "PrimeMatrix") -> "PrimeMatrix":
        self._check(other)
        return PrimeMatrix(self.p, (self.a + other.a) % self.p)

    def __sub__(self, other: "PrimeMatrix") -> "PrimeMatrix":
        self._check(other)
        return PrimeMatrix(self.p, (self.a - other.a) % self.p)

    def __mul__(self, c: int) -> "PrimeMatrix":
        return PrimeMatrix(self.p, (self.a * (c % self.p)) % self.p)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrimeMatrix):
            return NotImplemented
        return (
            self.p == other.p
            and self.a.shape == other.a.shape
            and bool(np.array_equal(self.a, other.a))
        )

    def __hash__(self):
        return hash((self.p, self.a.shape, self.a.tobytes()))

    def transpose(self) -> "PrimeMatrix":
        return PrimeMatrix(self.p, self.a.T.copy())

    def __repr__(self):
        return f"PrimeMatrix(p={self.p}, {self.rows}x{self.cols})"


@dataclass(frozen=True)
class ReduceResult:
    rank: int
    rref: PrimeMatrix
    kernel_basis: PrimeMatrix
    image_basis: PrimeMatrix


def reduce_matrix(m: PrimeMatrix) -> ReduceResult:
    """rank / RREF / right kernel / column space (as row vectors) of m."""
    p = m.p
    R, pivots = rref_raw(m.a, p)
    K = kernel_raw(m.a, p)
    # image = row space of the transpose
    I, _ = rref_raw(m.a.T, p)
    rank = len(pivots)
    return ReduceResult(
        rank=rank,
        rref=PrimeMatrix(p, R),
        kernel_basis=PrimeMatrix(p, K),
        image_basis=PrimeMatrix(p, I[:rank]),
    )


class Subspace:
    """Canonical subspace of F_p^d: basis rows in RREF, one vector per row.

    Two subspaces are equal iff their bases agree entrywise.
    """

    __slots__ = ("p", "ambient_dim", "basis")

    def __init__(self, p: int, ambient_dim: int, rref_rows: np.ndarray):
        self.p = p
        self.ambient_dim = ambient_dim
        rows = np.asarray(rref_rows, dtype=np.int64)
        if rows.size == 0:
            rows = rows.reshape(0, ambient_dim)
        if rows.shape[1] != ambient_dim:
            raise ValueError("basis width != ambient dimension")
        rows = rows.copy()
        rows.setflags(write=False)
        self.basis = rows

    @classmethod
    def from_spanning(cls, p: int, ambient_dim: int, vectors) -> "Subspace":
        vecs = np.asarray(vectors, dtype=np.int64)
        if vecs.size == 0:
            return cls(p, ambient_dim, np.zeros((0, ambient_dim), dtype=np.int64))
        R, pivots = rref_raw(vecs, p)
        return cls(p, ambient_dim, np.asarray(R[: len(pivots)], dtype=np.int64))

    @classmethod
    def zero(cls, p: int, ambient_dim: int) -> "Subspace":
        return cls(p, ambient_dim, np.zeros((0, ambient_dim), dtype=np.int64))

    @classmethod
    def full(cls, p: int, ambient_dim: int) -> "Subspace":
        return cls(p, ambient_dim, np.eye(ambient_dim, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.p == other.p
            and self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and bool(np.array_equal(self.basis, other.basis))
        )

    def __hash__(self):
        return hash((self.p, self.ambient_dim, self.basis.tobytes()))

    def __repr__(self):
        return f"Subspace(p={self.p}, dim {self.dim} of {self.ambient_dim})"

    def contains_vector(self, v: np.ndarray) -> bool:
        v = np.asarray(v, dtype=np.int64) % self.p
        res = v.copy()
        pivots = [int(np.argmax(row != 0)) for row in self.basis]
        for row, c in zip(self.basis, pivots):
            if res[c]:
                res = (res - res[c] * row) % self.p
        return not np.any(res)

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of v in the RREF basis; raises if v is outside."""
        v = np.asarray(v, dtype=np.int64) % self.p
        res = v.copy()
        out = np.zeros(self.dim, dtype=np.int64)
        pivots = [int(np.argmax(row != 0)) for row in self.basis]
        for i, (row, c) in enumerate(zip(self.basis, pivots)):
            out[i] = res[c]
            if res[c]:
                res = (res - res[c] * row) % self.p
        if np.any(res):
            raise ValueError("vector not in subspace")
        return out


def _sum(a: Subspace, b: Subspace) -> Subspace:
    return Subspace.from_spanning(
        a.p, a.ambient_dim, np.vstack([a.basis, b.basis])
    )


def _intersect(a: Subspace, b: Subspace) -> Subspace:
    """Zassenhaus: row-reduce [A|A; B|0]; rows with zero left half carry the
    intersection in their right half."""
    d = a.ambient_dim
    p = a.p
    top = np.hstack([a.basis, a.basis])
    bot = np.hstack([b.basis, np.zeros_like(b.basis)])
    stacked = np.vstack([top, bot])
    if stacked.shape[0] == 0:
        return Subspace.zero(p, d)
    R, pivots = rref_raw(stacked, p)
    rows = []
    for i in range(len(pivots)):
        if pivots[i] >= d:
            rows.append(np.asarray(R[i, d:], dtype=np.int64))
    if not rows:
        return Subspace.zero(p, d)
    return Subspace.from_spanning(p, d, np.array(rows, dtype=np.int64))


def _contains(a: Subspace, b: Subspace) -> bool:
    if b.dim > a.dim:
        return False
    return _sum(a, b) == Subspace(a.p, a.ambient_dim, a.basis)


def subspace_calc(a: Subspace, b: Subspace, op: str):
    """sum / intersect / equals / contains on canonical subspaces."""
    if a.p != b.p:
        raise ValueError("prime mismatch")
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {a.ambient_dim} != {b.ambient_dim}"
        )
    if op == "sum":
        return _sum(a, b)
    if op == "intersect":
        return _intersect(a, b)
    if op == "equals":
        return a == b
    if op == "contains":
        return _contains(a, b)
    raise ValueError(f"unknown op {op!r}")


def image_subspace(m: PrimeMatrix) -> Subspace:
    """Column space of m as a canonical subspace of F_p^rows."""
    return Subspace.from_spanning(m.p, m.rows, m.a.T)


def apply_to_subspace(op: np.ndarray, s: Subspace, p: int) -> Subspace:
    """Image of the subspace under the linear map given by op (rows = target)."""
    if s.dim == 0:
        return Subspace.zero(p, op.shape[0])
    img = mulmod(op, s.basis.T, p).T
    return Subspace.from_spanning(p, op.shape[0], img)
