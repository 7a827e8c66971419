"""Exact nilpotent Lie algebras given by rational structure constants."""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

from .poly import Poly, PolyMatrix, as_rational, column_rank_profile, frac_str, rational_rank


class SpecError(ValueError):
    """Malformed algebra specification or argument (CLI exit code 2)."""


@dataclass(frozen=True)
class AlgebraSpec:
    """Basis order Z_1..Z_p, A_1..A_m; brackets stored for i < j (0-based)."""

    name: str
    n: int
    p_dim: int
    brackets: tuple  # ((i, j), coeff tuple of length n) with i < j

    def __post_init__(self):
        if self.n <= 0 or not 0 <= self.p_dim <= self.n:
            raise SpecError(f"bad dimensions n={self.n}, p_dim={self.p_dim}")
        table = {}
        for (i, j), v in self.brackets:
            if not 0 <= i < j < self.n:
                raise SpecError(f"bracket index pair ({i + 1},{j + 1}) must satisfy 1 <= i < j <= n")
            if len(v) != self.n:
                raise SpecError("bracket coefficient vector has wrong length")
            table[(i, j)] = tuple(as_rational(c) for c in v)
        object.__setattr__(self, "_table", table)

    @property
    def m_dim(self) -> int:
        return self.n - self.p_dim

    @property
    def labels(self) -> list:
        return [f"Z{i + 1}" for i in range(self.p_dim)] + [f"A{k + 1}" for k in range(self.m_dim)]

    def basis(self, i: int) -> tuple:
        return tuple(Fraction(int(k == i)) for k in range(self.n))

    def z(self, i: int) -> tuple:
        return self.basis(i)

    def a(self, k: int) -> tuple:
        return self.basis(self.p_dim + k)

    def structure(self, i: int, j: int) -> tuple:
        """[X_i, X_j] as a coefficient tuple (0-based indices)."""
        if i == j:
            return (Fraction(0),) * self.n
        if i < j:
            return self._table.get((i, j), (Fraction(0),) * self.n)
        return tuple(-c for c in self._table.get((j, i), (Fraction(0),) * self.n))

    def to_json(self) -> dict:
        out = []
        for (i, j), v in sorted(self._table.items()):
            coeffs = {str(k + 1): frac_str(c) for k, c in enumerate(v) if c}
            if coeffs:
                out.append({"i": i + 1, "j": j + 1, "coeffs": coeffs})
        return {"name": self.name, "dim": self.n, "p_dim": self.p_dim, "brackets": out}

    def digest(self) -> str:
        import hashlib

        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def spec_from_brackets(name: str, n: int, p_dim: int, rules: dict) -> AlgebraSpec:
    """Build a spec from {(i, j): {k: coeff}} with 1-based indices and any i != j."""
    acc: dict = {}
    for (i, j), coeffs in rules.items():
        if i == j:
            raise SpecError("diagonal bracket")
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        key = (i - 1, j - 1)
        if key in acc:
            raise SpecError(f"duplicate bracket ({i},{j})")
        v = [Fraction(0)] * n
        for k, c in coeffs.items():
            v[k - 1] = sign * as_rational(c)
        acc[key] = tuple(v)
    return AlgebraSpec(name, n, p_dim, tuple(sorted(acc.items())))


def _parse_rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SpecError(f"{where}: rational must be an integer or a 'num/den' string, got {value!r}")
    try:
        q = Fraction(value) if isinstance(value, int) else Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"{where}: cannot parse rational {value!r} ({exc})") from None
    return q


def parse_spec(text: str, source: str = "<spec>") -> AlgebraSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SpecError(f"{source}: top level must be an object")
    for key in ("name", "dim", "p_dim", "brackets"):
        if key not in data:
            raise SpecError(f"{source}: missing field '{key}'")
    name, n, p = data["name"], data["dim"], data["p_dim"]
    if not isinstance(name, str):
        raise SpecError(f"{source}: field 'name' must be a string")
    for key, v in (("dim", n), ("p_dim", p)):
        if isinstance(v, bool) or not isinstance(v, int):
            raise SpecError(f"{source}: field '{key}' must be an integer")
    if n <= 0 or not 0 <= p <= n:
        raise SpecError(f"{source}: need dim > 0 and 0 <= p_dim <= dim")
    if not isinstance(data["brackets"], list):
        raise SpecError(f"{source}: field 'brackets' must be a list")
    seen = set()
    entries = []
    for idx, br in enumerate(data["brackets"]):
        where = f"{source}: brackets[{idx}]"
        if not isinstance(br, dict) or not {"i", "j", "coeffs"} <= set(br):
            raise SpecError(f"{where}: needs fields 'i', 'j', 'coeffs'")
        i, j = br["i"], br["j"]
        if any(isinstance(x, bool) or not isinstance(x, int) for x in (i, j)):
            raise SpecError(f"{where}: 'i' and 'j' must be integers")
        if not 1 <= i < j <= n:
            raise SpecError(f"{where}: need 1 <= i < j <= dim, got i={i}, j={j}")
        if (i, j) in seen:
            raise SpecError(f"{where}: duplicate bracket entry ({i},{j})")
        seen.add((i, j))
        if not isinstance(br["coeffs"], dict):
            raise SpecError(f"{where}: 'coeffs' must be an object")
        v = [Fraction(0)] * n
        for k, c in br["coeffs"].items():
            try:
                kk = int(k)
            except ValueError:
                raise SpecError(f"{where}.coeffs: key {k!r} is not an index") from None
            if not 1 <= kk <= n:
                raise SpecError(f"{where}.coeffs: index {kk} out of range 1..{n}")
            v[kk - 1] = _parse_rational(c, f"{where}.coeffs[{k}]")
        entries.append(((i - 1, j - 1), tuple(v)))
    return AlgebraSpec(name, n, p, tuple(sorted(entries)))


def load_spec(path: str) -> AlgebraSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    return parse_spec(text, path)


def _vec(spec: AlgebraSpec, x) -> tuple:
    if len(x) != spec.n:
        raise SpecError(f"vector length {len(x)} does not match dimension {spec.n}")
    return tuple(as_rational(c) for c in x)


def bracket(spec: AlgebraSpec, x: Sequence, y: Sequence) -> tuple:
    x, y = _vec(spec, x), _vec(spec, y)
    out = [Fraction(0)] * spec.n
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j, yj in enumerate(y):
            if not yj or i == j:
                continue
            c = spec.structure(i, j)
            f = xi * yj
            for k, ck in enumerate(c):
                if ck:
                    out[k] += f * ck
    return tuple(out)


def ad_restricted(spec: AlgebraSpec, a: Sequence | None = None) -> PolyMatrix:
    """Matrix of ad(a)|p in the basis Z_1..Z_p; column j holds [a, Z_j].

    With ``a=None`` the result is symbolic in s_1..s_m for a = sum_k s_k A_k.
    """
    p, m = spec.p_dim, spec.m_dim
    if a is None:
        coeffs = [Poly.var(m, k) for k in range(m)]
        nv = m
    else:
        a = _vec(spec, a)
        if any(a[:p]):
            raise SpecError("ad_restricted expects an element of span(A_1..A_m)")
        coeffs = [Poly.const(0, c) for c in a[p:]]
        nv = 0
    cols = []
    for j in range(p):
        col = [Poly(nv) for _ in range(p)]
        for k in range(m):
            br = spec.structure(p + k, j)
            if any(br[p:]):
                raise SpecError(f"[A{k + 1}, Z{j + 1}] leaves span(Z): p is not an ideal")
            for i in range(p):
                if br[i]:
                    col[i] = col[i] + coeffs[k] * br[i]
        cols.append(col)
    return PolyMatrix([[cols[j][i] for j in range(p)] for i in range(p)], nv)


def exp_nilpotent(M: PolyMatrix) -> PolyMatrix:
    """Exact exp(M) = sum_k M^k/k! for a nilpotent square PolyMatrix."""
    if M.rows != M.cols:
        raise SpecError("exp_nilpotent needs a square matrix")
    n = M.rows
    out = PolyMatrix.identity(n, M.nvars)
    power = PolyMatrix.identity(n, M.nvars)
    for k in range(1, n + 1):
        power = power @ M
        if power.is_zero():
            return out
        out = out + power.scale(Fraction(1, factorial(k)))
    if not power.is_zero():
        raise SpecError("matrix is not nilpotent within dimension-many powers")
    return out


@dataclass
class StructureReport:
    passed: bool
    jacobi: bool
    malcev_triangular: bool
    p_ideal: bool
    first_violation: tuple | None = None
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "jacobi": self.jacobi,
            "malcev_triangular": self.malcev_triangular,
            "p_ideal": self.p_ideal,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "diagnostics": self.diagnostics,
        }


def verify_structure(spec: AlgebraSpec) -> StructureReport:
    n, labels = spec.n, spec.labels
    diags = []
    first = None
    jacobi = True
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ei, ej, ek = spec.basis(i), spec.basis(j), spec.basis(k)
                s1 = bracket(spec, ei, bracket(spec, ej, ek))
                s2 = bracket(spec, ej, bracket(spec, ek, ei))
                s3 = bracket(spec, ek, bracket(spec, ei, ej))
                if any(a + b + c for a, b, c in zip(s1, s2, s3)):
                    jacobi = False
                    first = (i + 1, j + 1, k + 1)
                    diags.append(f"Jacobi identity fails on ({labels[i]}, {labels[j]}, {labels[k]})")
                    break
            if not jacobi:
                break
        if not jacobi:
            break
    # strong Malcev basis of a nilpotent algebra: [X_i, X_j] in span(X_1..X_{min(i,j)-1})
    tri = True
    for i in range(n):
        for j in range(i + 1, n):
            c = spec.structure(i, j)
            bad = [k for k in range(i, n) if c[k]]
            if bad:
                tri = False
                diags.append(
                    f"[{labels[i]}, {labels[j]}] has a {labels[bad[0]]}-component: basis is not a strong "
                    f"Malcev basis of a nilpotent algebra (ad is not strictly triangular)"
                )
                if first is None:
                    first = (i + 1, j + 1)
                break
        if not tri:
            break
    p = spec.p_dim
    p_ideal = all(not any(spec.structure(x, j)[p:]) for x in range(n) for j in range(p))
    if not p_ideal:
        diags.append("[n, p] is not contained in p")
    return StructureReport(jacobi and tri, jacobi, tri, p_ideal, first, diags)


@dataclass
class ConditionReport:
    p_is_ideal: bool
    p_commutative: bool
    m_commutative: bool
    generic_jump_cardinality: int
    m_indices_all_jump: bool
    p_is_constant_polarization: bool
    lattice_integral: bool
    passed: bool
    generic_jump_set: tuple = ()
    diagnostics: list = field(default_factory=list)

    def structural_ok(self) -> bool:
        """Checks (a)-(e): everything except the sufficient lattice condition."""
        return (
            self.p_is_ideal
            and self.p_commutative
            and self.m_commutative
            and self.m_indices_all_jump
            and self.p_is_constant_polarization
        )

    def to_json(self) -> dict:
        return {
            "p_is_ideal": self.p_is_ideal,
            "p_commutative": self.p_commutative,
            "m_commutative": self.m_commutative,
            "generic_jump_cardinality": self.generic_jump_cardinality,
            "generic_jump_set": list(self.generic_jump_set),
            "m_indices_all_jump": self.m_indices_all_jump,
            "p_is_constant_polarization": self.p_is_constant_polarization,
            "lattice_integral": self.lattice_integral,
            "passed": self.passed,
            "diagnostics": self.diagnostics,
        }


def random_functionals(n: int, trials: int, seed: int) -> list:
    """Rational coordinates k/q with k in [-1000, 1000], q in 1..7."""
    rng = random.Random(seed)
    return [
        tuple(Fraction(rng.randint(-1000, 1000), rng.randint(1, 7)) for _ in range(n))
        for _ in range(trials)
    ]


def m_matrix(spec: AlgebraSpec, lam: Sequence) -> list:
    lam = _vec(spec, lam)
    n = spec.n
    out = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            v = sum((l * c for l, c in zip(lam, spec.structure(j, k)) if c), Fraction(0))
            out[j][k] = v
            out[k][j] = -v
    return out


def jump_indices(spec: AlgebraSpec, lam: Sequence) -> tuple:
    """1-based {k : rank M_k(lam) > rank M_{k-1}(lam)} by exact elimination."""
    prof = column_rank_profile(m_matrix(spec, lam))
    return tuple(k for k in range(1, spec.n + 1) if prof[k] > prof[k - 1])


@dataclass(frozen=True)
class GenericJump:
    indices: tuple
    counts: dict
    diagnostics: tuple = ()

    @property
    def cardinality(self) -> int:
        return len(self.indices)


def generic_jump_set(spec: AlgebraSpec, trials: int = 25, seed: int = 0xC0FFEE) -> GenericJump:
    sets = Counter(jump_indices(spec, lam) for lam in random_functionals(spec.n, trials, seed))
    top = max(len(s) for s in sets)
    best = sorted((s for s in sets if len(s) == top), key=lambda s: (-sets[s], s))
    diags = ()
    if len(best) > 1:
        diags = (f"distinct jump sets of maximal cardinality {top} observed: {[list(s) for s in best]}",)
    return GenericJump(best[0], {tuple(k): v for k, v in sets.items()}, diags)


def lattice_exponentials(spec: AlgebraSpec) -> list:
    """exp(ad A_k)|p as rational matrices."""
    out = []
    for k in range(spec.m_dim):
        E = exp_nilpotent(ad_restricted(spec, spec.a(k)))
        out.append([[E[i, j].constant_term() for j in range(E.cols)] for i in range(E.rows)])
    return out


def verify_condition1(spec: AlgebraSpec, trials: int = 25, seed: int = 0xC0FFEE) -> ConditionReport:
    n, p, m = spec.n, spec.p_dim, spec.m_dim
    labels = spec.labels
    diags: list = []

    # (a) p is an ideal
    p_ideal = True
    for x in range(n):
        for j in range(p):
            if any(spec.structure(x, j)[p:]):
                p_ideal = False
                diags.append(f"(a) [{labels[x]}, {labels[j]}] leaves p: p is not an ideal")
                break
    # (b) p commutative
    p_comm = True
    for i in range(p):
        for j in range(i + 1, p):
            if any(spec.structure(i, j)):
                p_comm = False
                diags.append(f"(b) [{labels[i]}, {labels[j]}] != 0: p is not commutative")
    # (c) m commutative
    m_comm = True
    for i in range(p, n):
        for j in range(i + 1, n):
            c = spec.structure(i, j)
            if any(c[p:]):
                m_comm = False
                diags.append(f"(c) [{labels[i]}, {labels[j]}] has an m-part: m is not a complement subalgebra")
            elif any(c):
                m_comm = False
                diags.append(
                    f"(c) [{labels[i]}, {labels[j]}] lands in p (commutative quotient) but is nonzero: "
                    "strict commutativity of m fails"
                )
    # (d) generic jump set
    gj = generic_jump_set(spec, trials, seed)
    e = gj.indices
    card = len(e)
    diags.extend(gj.diagnostics)
    m_all = set(range(p + 1, n + 1)) <= set(e)
    if card != 2 * m:
        diags.append(f"(d) generic jump cardinality {card} != 2m = {2 * m}")
    if not m_all:
        diags.append(f"(d) generic jump set {list(e)} does not contain {{{p + 1},...,{n}}}")
    # (e) maximality of p for each sampled generic lambda: the m x p block
    # [lam[A_j, Z_i]] must have rank m (no combination of A's is lam-orthogonal to p)
    polar = p_comm and p_ideal
    if polar:
        for lam in random_functionals(n, trials, seed):
            if jump_indices(spec, lam) != e:
                continue
            M = m_matrix(spec, lam)
            block = [[M[p + j][i] for i in range(p)] for j in range(m)]
            if rational_rank(block) < m:
                polar = False
                diags.append("(e) p is not maximal subordinate for a sampled generic functional")
                break
    else:
        diags.append("(e) p cannot be a polarization: (a) or (b) failed")
    # (f) integrality of exp(ad A_k)|p
    lattice = p_ideal
    if p_ideal:
        for k, E in enumerate(lattice_exponentials(spec)):
            bad = [(i, j) for i in range(p) for j in range(p) if E[i][j].denominator != 1]
            if bad:
                lattice = False
                i, j = bad[0]
                diags.append(
                    f"(f) exp(ad A{k + 1})|p has non-integer entry {frac_str(E[i][j])} at ({i + 1},{j + 1})"
                )
    if p - m <= 0:
        diags.append(f"p - m = {p - m} <= 0: the cross-section has no free coordinates")
    passed = all((p_ideal, p_comm, m_comm, m_all, polar, lattice)) and card == 2 * m
    return ConditionReport(p_ideal, p_comm, m_comm, card, m_all, polar, lattice, passed, e, diags)
