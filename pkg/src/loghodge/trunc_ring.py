"""Truncated multivariate monomial rings.

A RingPair holds the "downstairs" ring A' = F_p[u_1..u_n]/(u_i^M) and the
"upstairs" ring A = F_p[t_1..t_n]/(t_i^{pM}), linked by the Frobenius
u_i -> t_i^p.  Coordinates 1..r are logarithmic: the derivation in a log
direction is t_i * d/dt_i, in an ordinary direction plain d/dt_i.  The
upstairs truncation exponent pM is a multiple of p, so every derivation
preserves the truncation ideal.

Elements are coefficient vectors over a fixed graded-lex monomial basis,
which gives every based construction one deterministic coordinatization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fplin import FieldSpec

__all__ = ["Ring", "RingPair", "RingElement"]


class Ring:
    """One truncated monomial ring F_p[x_1..x_n]/(x_i^cap)."""

    def __init__(self, p: int, n: int, cap: int, tag: str):
        if cap < 1 or n < 0:
            raise ValueError("need cap >= 1 and n >= 0")
        self.p = p
        self.n = n
        self.cap = cap
        self.tag = tag  # 'down' or 'up', for mismatch diagnostics
        exps = sorted(
            itertools.product(range(cap), repeat=n), key=lambda e: (sum(e), e)
        )
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self.dim = self.exps.shape[0]
        self._index = {tuple(int(x) for x in e): i for i, e in enumerate(self.exps)}

    def monomial_index(self, e) -> int:
        return self._index[tuple(int(x) for x in e)]

    def zero(self) -> "RingElement":
        return RingElement(self, np.zeros(self.dim, dtype=np.int64))

    def one(self) -> "RingElement":
        c = np.zeros(self.dim, dtype=np.int64)
        c[self.monomial_index((0,) * self.n)] = 1
        return RingElement(self, c)

    def variable(self, i: int, power: int = 1) -> "RingElement":
        """x_i^power as an element (i is 1-based)."""
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate {i} out of range 1..{self.n}")
        c = np.zeros(self.dim, dtype=np.int64)
        e = [0] * self.n
        e[i - 1] = power
        if power < self.cap:
            c[self.monomial_index(tuple(e))] = 1
        return RingElement(self, c)

    def monomial(self, e, coeff: int = 1) -> "RingElement":
        c = np.zeros(self.dim, dtype=np.int64)
        if all(0 <= int(x) < self.cap for x in e):
            c[self.monomial_index(e)] = coeff % self.p
        return RingElement(self, c)

    def shift_matrix(self, e) -> np.ndarray:
        """Matrix of multiplication by the monomial x^e (dim x dim)."""
        e = np.asarray(e, dtype=np.int64)
        tgt = self.exps + e
        ok = np.all(tgt < self.cap, axis=1)
        mat = np.zeros((self.dim, self.dim), dtype=np.int64)
        src = np.nonzero(ok)[0]
        dst = [self._index[tuple(int(x) for x in t)] for t in tgt[ok]]
        mat[dst, src] = 1
        return mat

    def mult_matrix(self, f: "RingElement") -> np.ndarray:
        """Matrix of multiplication by f on the monomial basis."""
        if f.ring is not self:
            raise ValueError("ring mismatch")
        mat = np.zeros((self.dim, self.dim), dtype=np.int64)
        for idx in np.nonzero(f.coeffs)[0]:
            mat = (mat + int(f.coeffs[idx]) * self.shift_matrix(self.exps[idx])) % self.p
        return mat

    def derive_matrix(self, i: int, log: bool) -> np.ndarray:
        """Matrix of t_i d/dt_i (log) or d/dt_i (ordinary), i 1-based."""
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate {i} out of range 1..{self.n}")
        mat = np.zeros((self.dim, self.dim), dtype=np.int64)
        col = i - 1
        for idx in range(self.dim):
            e = self.exps[idx]
            k = int(e[col])
            if k == 0:
                continue
            if log:
                mat[idx, idx] = k % self.p
            else:
                tgt = e.copy()
                tgt[col] -= 1
                mat[self._index[tuple(int(x) for x in tgt)], idx] = k % self.p
        return mat

    def random_element(self, rng: np.random.Generator) -> "RingElement":
        return RingElement(self, rng.integers(0, self.p, self.dim))

    def __repr__(self):
        return f"Ring(p={self.p}, n={self.n}, cap={self.cap}, {self.tag})"


class RingElement:
    """Element of a Ring: coefficient vector over the graded-lex basis."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: Ring, coeffs):
        c = np.asarray(coeffs, dtype=np.int64) % ring.p
        if c.shape != (ring.dim,):
            raise ValueError(f"coefficient vector must have length {ring.dim}")
        c.setflags(write=False)
        self.ring = ring
        self.coeffs = c

    def _check(self, other: "RingElement"):
        if self.ring is not other.ring:
            raise ValueError(
                f"ring mismatch: {self.ring.tag} vs {other.ring.tag}"
            )

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.ring, self.coeffs + other.coeffs)

    def __sub__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.ring, self.coeffs - other.coeffs)

    def __neg__(self) -> "RingElement":
        return RingElement(self.ring, -self.coeffs)

    def scale(self, c: int) -> "RingElement":
        return RingElement(self.ring, self.coeffs * (c % self.ring.p))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.ring is other.ring and bool(
            np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((id(self.ring), self.coeffs.tobytes()))

    def __repr__(self):
        ring = self.ring
        var = "u" if ring.tag == "down" else "t"
        terms = []
        for idx in np.nonzero(self.coeffs)[0]:
            e = ring.exps[idx]
            mono = "*".join(
                f"{var}{j+1}^{int(k)}" if k > 1 else f"{var}{j+1}"
                for j, k in enumerate(e)
                if k
            )
            c = int(self.coeffs[idx])
            terms.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(terms) if terms else "0"


def mul(a: RingElement, b: RingElement) -> RingElement:
    """Product in the truncated ring; overflow monomials are dropped."""
    a._check(b)
    ring = a.ring
    out = np.zeros(ring.dim, dtype=np.int64)
    nz_a = np.nonzero(a.coeffs)[0]
    nz_b = np.nonzero(b.coeffs)[0]
    if len(nz_a) > len(nz_b):
        a, b, nz_a, nz_b = b, a, nz_b, nz_a
    for ia in nz_a:
        tgt = ring.exps[nz_b] + ring.exps[ia]
        ok = np.all(tgt < ring.cap, axis=1)
        ca = int(a.coeffs[ia])
        for t, ib in zip(tgt[ok], nz_b[ok]):
            j = ring._index[tuple(int(x) for x in t)]
            out[j] = (out[j] + ca * int(b.coeffs[ib])) % ring.p
    return RingElement(ring, out)


RingElement.__mul__ = lambda self, other: mul(self, other)  # type: ignore[assignment]


@dataclass
class RingPair:
    """Downstairs/upstairs truncated rings with the Frobenius u_i -> t_i^p."""

    field: FieldSpec
    n: int
    r: int
    M: int
    down: Ring = field(init=False)
    up: Ring = field(init=False)

    def __post_init__(self):
        if not 0 <= self.r <= self.n:
            raise ValueError(f"need 0 <= r <= n, got r={self.r}, n={self.n}")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        p = self.field.p
        self.down = Ring(p, self.n, self.M, "down")
        self.up = Ring(p, self.n, p * self.M, "up")

    @property
    def p(self) -> int:
        return self.field.p

    def is_log(self, i: int) -> bool:
        """Coordinate i (1-based) carries a log pole iff i <= r."""
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate {i} out of range 1..{self.n}")
        return i <= self.r

    def derive(self, f: RingElement, i: int) -> RingElement:
        """t_i d/dt_i for log i, d/dt_i for ordinary i, on the upstairs ring."""
        if f.ring is not self.up:
            raise ValueError("derive expects an upstairs element")
        mat = self.up.derive_matrix(i, self.is_log(i))
        return RingElement(self.up, mat @ f.coeffs)

    def frobenius(self, f: RingElement) -> RingElement:
        """Ring map A' -> A, u_i -> t_i^p (exponentwise dilation by p)."""
        if f.ring is not self.down:
            raise ValueError("frobenius expects a downstairs element")
        out = np.zeros(self.up.dim, dtype=np.int64)
        for idx in np.nonzero(f.coeffs)[0]:
            e = self.down.exps[idx] * self.p
            out[self.up.monomial_index(e)] = f.coeffs[idx]
        return RingElement(self.up, out)

    def frobenius_matrix(self) -> np.ndarray:
        """The (up.dim x down.dim) matrix of the Frobenius embedding."""
        mat = np.zeros((self.up.dim, self.down.dim), dtype=np.int64)
        for idx in range(self.down.dim):
            mat[self.up.monomial_index(self.down.exps[idx] * self.p), idx] = 1
        return mat

    def __repr__(self):
        return f"RingPair(p={self.p}, n={self.n}, r={self.r}, M={self.M})"
