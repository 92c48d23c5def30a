"""Dense matrices over GF(p): elimination, rank, solving, null spaces.

Entries are numpy int64 arrays reduced mod p.  Elimination pivots on the
first nonzero column with the smallest row index, so ranks, solutions and
null-space bases are identical across platforms and row orders of equal
content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fieldcore import field_inv, is_prime


class NoSolutionError(ValueError):
    """The linear system M x = s has no solution over GF(p)."""


class GfMatrix:
    """An immutable dense matrix over GF(p)."""

    __slots__ = ("array", "p")

    def __init__(self, array: np.ndarray, p: int):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        a = np.asarray(array, dtype=np.int64) % p
        if a.ndim != 2:
            raise ValueError("GfMatrix expects a 2-D array")
        a.setflags(write=False)
        self.array = a
        self.p = p

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "GfMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n: int, p: int) -> "GfMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def random(cls, rows: int, cols: int, p: int, gen: np.random.Generator) -> "GfMatrix":
        return cls(gen.integers(0, p, size=(rows, cols), dtype=np.int64), p)

    def stack(self, lower: "GfMatrix") -> "GfMatrix":
        if lower.p != self.p or lower.cols != self.cols:
            raise ValueError("stacking requires matching modulus and width")
        return GfMatrix(np.vstack([self.array, lower.array]), self.p)

    def mul_vec(self, x: np.ndarray) -> np.ndarray:
        """M x^T mod p for an integer vector x."""
        return (self.array @ (np.asarray(x, dtype=np.int64) % self.p)) % self.p

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GfMatrix)
            and self.p == other.p
            and self.array.shape == other.array.shape
            and bool(np.array_equal(self.array, other.array))
        )

    def __repr__(self) -> str:
        return f"GfMatrix({self.rows}x{self.cols} mod {self.p})"


def _rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Row-reduce a copy of ``a`` mod p; returns (rref, pivot columns)."""
    m = a.copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        m[r] = (m[r] * field_inv(int(m[r, c]), p)) % p
        other = np.nonzero(m[:, c])[0]
        other = other[other != r]
        if other.size:
            m[other] = (m[other] - np.outer(m[other, c], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(M: GfMatrix) -> int:
    """Row rank over GF(p)."""
    _, pivots = _rref(M.array, M.p)
    return len(pivots)


def solve(M: GfMatrix, s: np.ndarray) -> np.ndarray:
    """A particular solution x of M x^T = s^T over GF(p).

    Free variables are set to 0.  Raises NoSolutionError when the system
    is inconsistent and ValueError on a dimension mismatch.
    """
    s = np.asarray(s, dtype=np.int64) % M.p
    if s.shape != (M.rows,):
        raise ValueError(f"syndrome length {s.shape} does not match {M.rows} rows")
    aug = np.hstack([M.array, s.reshape(-1, 1)])
    red, pivots = _rref(aug, M.p)
    if M.cols in pivots:
        raise NoSolutionError("inconsistent linear system over GF(p)")
    x = np.zeros(M.cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = red[i, M.cols]
    return x


def generator_from_parity(H: GfMatrix) -> GfMatrix:
    """Rows spanning the null space of H: G H^T = 0, rank(G) = cols - rank(H)."""
    red, pivots = _rref(H.array, H.p)
    p = H.p
    n = H.cols
    free = [c for c in range(n) if c not in pivots]
    g = np.zeros((len(free), n), dtype=np.int64)
    for i, fc in enumerate(free):
        g[i, fc] = 1
        for row, pc in enumerate(pivots):
            g[i, pc] = (-red[row, fc]) % p
    return GfMatrix(g, p)


@dataclass(frozen=True)
class StackedParityCheck:
    """H = [upper; lower] with upper an l x n block and lower an r x n block.

    The rates R and R_f are validated against n so that l = n(R_f - R) and
    r = n(1 - R_f) are exact integers.
    """

    upper: GfMatrix
    lower: GfMatrix
    n: int
    R: Fraction
    R_f: Fraction
    full: GfMatrix = field(init=False)

    def __post_init__(self) -> None:
        ell = self.n * (self.R_f - self.R)
        r = self.n * (1 - self.R_f)
        if ell.denominator != 1 or r.denominator != 1:
            raise ValueError(f"rates {self.R}, {self.R_f} are not integral against n={self.n}")
        if not (0 < self.R < self.R_f < 1):
            raise ValueError("need 0 < R < R_f < 1")
        if self.upper.rows != int(ell) or self.lower.rows != int(r):
            raise ValueError("block heights disagree with n(R_f - R), n(1 - R_f)")
        if self.upper.cols != self.n or self.lower.cols != self.n:
            raise ValueError("block widths disagree with n")
        if self.upper.p != self.lower.p:
            raise ValueError("blocks live over different fields")
        object.__setattr__(self, "full", self.upper.stack(self.lower))

    @property
    def p(self) -> int:
        return self.upper.p

    @property
    def ell(self) -> int:
        return self.upper.rows

    @property
    def r(self) -> int:
        return self.lower.rows
