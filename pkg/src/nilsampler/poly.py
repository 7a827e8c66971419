"""Sparse multivariate polynomials over the rationals and matrices of them."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Q = Fraction


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # floats are accepted only when they carry an exact binary value the user meant
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Poly:
    """Polynomial in ``nvars`` variables, stored as {exponent tuple: Fraction}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for e, c in terms.items():
                c = as_rational(c)
                if c:
                    if len(e) != nvars:
                        raise ValueError("exponent length does not match nvars")
                    self.terms[tuple(e)] = c

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        r = Poly(self.nvars)
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self):
        r = Poly(self.nvars)
        r.terms = {e: -c for e, c in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = as_rational(other)
            r = Poly(self.nvars)
            if c:
                r.terms = {e: v * c for e, v in self.terms.items()}
            return r
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        r = Poly(self.nvars)
        r.terms = out
        return r

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                r = r * base
            base = base * base
            k >>= 1
        return r

    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def diff(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return Poly(self.nvars, out)

    def __call__(self, *point):
        return self.eval(point)

    def eval(self, point: Sequence):
        """Exact evaluation when the point is rational; float otherwise."""
        if len(point) != self.nvars:
            raise ValueError("point has wrong length")
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = v * x**k
            total = total + v
        return total

    def eval_float(self, arrays: Sequence) -> np.ndarray | float:
        """Vectorized float evaluation; ``arrays`` broadcast against each other."""
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        out = np.zeros(shape)
        for e, c in self.terms.items():
            term = np.full(shape, float(c))
            for a, k in zip(arrays, e):
                if k:
                    term = term * a**k
            out = out + term
        return out

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute variable i by ``subs[i]`` (all in a common target ring)."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        nv = subs[0].nvars
        out = Poly(nv)
        powers: dict = {}
        for e, c in self.terms.items():
            term = Poly.const(nv, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = subs[i] ** k
                    term = term * powers[key]
            out = out + term
        return out

    def coefficient_signs(self) -> set:
        return {1 if c > 0 else -1 for c in self.terms.values()}

    def split_signs(self) -> tuple["Poly", "Poly"]:
        """Return (q+, q-) with self = q+ - q-, both with nonnegative coefficients."""
        pos = {e: c for e, c in self.terms.items() if c > 0}
        neg = {e: -c for e, c in self.terms.items() if c < 0}
        return Poly(self.nvars, pos), Poly(self.nvars, neg)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
            )
            if not mono:
                parts.append(frac_str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{frac_str(c)}*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.to_str()})"

    def to_json(self) -> list:
        return [[list(e), frac_str(c)] for e, c in sorted(self.terms.items())]


def _zero(nvars):
    return Poly(nvars)


class PolyMatrix:
    """Dense matrix with Poly entries sharing one variable set."""

    __slots__ = ("rows", "cols", "nvars", "entries")

    def __init__(self, entries: Sequence[Sequence[Poly]], nvars: int | None = None):
        entries = [list(r) for r in entries]
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        if nvars is None:
            nvars = entries[0][0].nvars
        self.nvars = nvars
        for r in entries:
            if len(r) != self.cols:
                raise ValueError("ragged matrix")
        self.entries = [
            [e if isinstance(e, Poly) else Poly.const(nvars, e) for e in r] for r in entries
        ]

    @classmethod
    def identity(cls, n: int, nvars: int) -> "PolyMatrix":
        return cls([[Poly.const(nvars, int(i == j)) for j in range(n)] for i in range(n)], nvars)

    @classmethod
    def zeros(cls, r: int, c: int, nvars: int) -> "PolyMatrix":
        return cls([[Poly(nvars) for _ in range(c)] for _ in range(r)], nvars)

    @classmethod
    def from_rational(cls, mat, nvars: int = 0) -> "PolyMatrix":
        return cls([[Poly.const(nvars, as_rational(x)) for x in row] for row in mat], nvars)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __add__(self, other: "PolyMatrix"):
        return PolyMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
            self.nvars,
        )

    def __neg__(self):
        return PolyMatrix([[-a for a in r] for r in self.entries], self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyMatrix":
        return PolyMatrix([[a * c for a in r] for r in self.entries], self.nvars)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Poly(self.nvars)
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.terms:
                        b = other.entries[k][j]
                        if b.terms:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out, self.nvars)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)], self.nvars
        )

    T = property(transpose)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def __eq__(self, other):
        return (
            isinstance(other, PolyMatrix)
            and self.shape == other.shape
            and all(a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))
        )

    def map(self, f) -> "PolyMatrix":
        return PolyMatrix([[f(e) for e in r] for r in self.entries])

    def compose(self, subs: Sequence[Poly]) -> "PolyMatrix":
        return PolyMatrix([[e.compose(subs) for e in r] for r in self.entries], subs[0].nvars)

    def eval(self, point) -> list:
        return [[e.eval(point) for e in r] for r in self.entries]

    def eval_float(self, arrays) -> np.ndarray:
        """Stacked float evaluation, shape broadcast(arrays) + (rows, cols)."""
        vals = [[e.eval_float(arrays) for e in r] for r in self.entries]
        shape = np.broadcast_shapes(*(np.shape(v) for r in vals for v in r))
        out = np.empty(shape + (self.rows, self.cols))
        for i, r in enumerate(vals):
            for j, v in enumerate(r):
                out[..., i, j] = v
        return out

    def det(self) -> Poly:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        # Laplace expansion along rows with memo on the set of used columns
        memo: dict = {}

        def minor(row: int, cols: tuple) -> Poly:
            if row == n:
                return Poly.const(self.nvars, 1)
            key = (row, cols)
            if key in memo:
                return memo[key]
            acc = Poly(self.nvars)
            for pos, c in enumerate(cols):
                a = self.entries[row][c]
                if a.terms:
                    sub = minor(row + 1, cols[:pos] + cols[pos + 1:])
                    if sub.terms:
                        term = a * sub
                        acc = acc + (term if pos % 2 == 0 else -term)
            memo[key] = acc
            return acc

        return minor(0, tuple(range(n)))

    def to_str(self, names=None) -> list:
        return [[e.to_str(names) for e in r] for r in self.entries]

    def __repr__(self):
        return "PolyMatrix(" + repr(self.to_str()) + ")"


def rational_rank(rows: Iterable[Sequence[Fraction]]) -> int:
    return len(row_echelon(rows)[1])


def row_echelon(rows: Iterable[Sequence[Fraction]]):
    """Exact Gaussian elimination. Returns (reduced rows, pivot columns)."""
    m = [[as_rational(x) for x in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rational_det(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [[as_rational(x) for x in r] for r in mat]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return det


def column_rank_profile(mat: Sequence[Sequence[Fraction]]) -> list:
    """rank of the first k columns, k = 0..ncols, by incremental elimination."""
    if not mat:
        return [0]
    nrows, ncols = len(mat), len(mat[0])
    basis: list = []  # list of (pivot row, vector) in reduced form
    profile = [0]
    for c in range(ncols):
        v = [as_rational(mat[i][c]) for i in range(nrows)]
        for piv, b in basis:
            if v[piv] != 0:
                f = v[piv]
                v = [x - f * y for x, y in zip(v, b)]
        piv = next((i for i in range(nrows) if v[i] != 0), None)
        if piv is not None:
            inv = 1 / v[piv]
            v = [x * inv for x in v]
            basis.append((piv, v))
        profile.append(len(basis))
    return profile


def exact_sqrt(q: Fraction) -> Fraction | None:
    from math import isqrt

    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None

