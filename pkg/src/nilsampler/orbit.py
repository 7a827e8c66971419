"""Coadjoint data: M(lambda), jump sets, cross-section, beta and Plancherel densities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .lie_core import (
    AlgebraSpec,
    SpecError,
    ad_restricted,
    exp_nilpotent,
    generic_jump_set,
    jump_indices,
    m_matrix,
    random_functionals,
    verify_condition1,
)
from .poly import Poly, PolyMatrix, as_rational, exact_sqrt, rational_det

__all__ = [
    "OrbitData",
    "orbit_data",
    "m_matrix",
    "jump_indices",
    "generic_jump_set",
    "cross_section",
    "pA_matrix",
    "b_matrix",
]


def pA_matrix(spec: AlgebraSpec) -> PolyMatrix:
    """P(A(t)) = transpose(exp(-ad(sum t_k A_k)|p)), symbolic in t_1..t_m."""
    return exp_nilpotent(-ad_restricted(spec)).transpose()


def cross_section(spec: AlgebraSpec, e: Sequence[int]) -> dict:
    if len(e) % 2:
        raise RuntimeError(f"jump set {list(e)} has odd cardinality")
    free = [k for k in range(1, spec.n + 1) if k not in set(e)]
    return {"free": free, "constraints": sorted(e)}


def b_matrix(spec: AlgebraSpec, lam: Sequence, e: Sequence[int]) -> list:
    M = m_matrix(spec, lam)
    return [[M[i - 1][j - 1] for j in e] for i in e]


@dataclass(frozen=True)
class PlancherelReport:
    density: Poly  # det J_beta(lambda, 0) as a polynomial in the free coordinates
    ratio_squared: Fraction | None  # |det B| / det J^2, constant over generic lambda
    ratio: Fraction | None  # exact square root when it exists
    ratio_float: float | None
    constant: bool


class OrbitData:
    """Everything derived from a spec passing the structural checks of Condition 1."""

    def __init__(self, spec: AlgebraSpec, jump_set: Sequence[int] | None = None,
                 trials: int = 25, seed: int = 0xC0FFEE):
        self.spec = spec
        self.p, self.m = spec.p_dim, spec.m_dim
        if jump_set is None:
            jump_set = generic_jump_set(spec, trials, seed).indices
        self.e = tuple(jump_set)
        cs = cross_section(spec, self.e)
        self.free = tuple(cs["free"])  # 1-based
        if any(k > self.p for k in self.free):
            raise SpecError("free coordinates outside p: Condition 1 structure is not satisfied")
        self.d = len(self.free)
        if self.d + self.m != self.p:
            raise SpecError("jump set does not have cardinality 2m")
        self.free0 = tuple(k - 1 for k in self.free)

    @property
    def var_names(self) -> list:
        return [f"l{k}" for k in self.free] + [f"t{k + 1}" for k in range(self.m)]

    @cached_property
    def P(self) -> PolyMatrix:
        return pA_matrix(self.spec)

    def embed(self, sigma: Sequence) -> list:
        """Free coordinates -> the p-part f of the functional."""
        if len(sigma) != self.d:
            raise SpecError(f"expected {self.d} free coordinates, got {len(sigma)}")
        f = [0] * self.p
        for a, k in enumerate(self.free0):
            f[k] = sigma[a]
        return f

    def sigma_from_functional(self, lam: Sequence) -> list:
        """Accepts a p- or n-vector; rejects nonzero jump coordinates."""
        if len(lam) not in (self.p, self.spec.n):
            raise SpecError(f"functional must have {self.p} or {self.spec.n} coordinates")
        for k in self.e:
            if k - 1 < len(lam) and lam[k - 1] != 0:
                raise SpecError(f"point is outside the cross-section: coordinate {k} is a jump index and must be 0")
        return [lam[k] for k in self.free0]

    @cached_property
    def beta_poly(self) -> list:
        """beta as p polynomials in (free coords, t)."""
        nv = self.d + self.m
        tsub = [Poly.var(nv, self.d + k) for k in range(self.m)]
        Pt = self.P.compose(tsub)
        f = self.embed([Poly.var(nv, a) for a in range(self.d)])
        f = [x if isinstance(x, Poly) else Poly(nv) for x in f]
        out = []
        for i in range(self.p):
            acc = Poly(nv)
            for j in range(self.p):
                if Pt[i, j].terms and f[j].terms:
                    acc = acc + Pt[i, j] * f[j]
            out.append(acc)
        return out

    @cached_property
    def jacobian(self) -> PolyMatrix:
        nv = self.d + self.m
        return PolyMatrix([[b.diff(v) for v in range(nv)] for b in self.beta_poly], nv)

    @cached_property
    def jacobian_det(self) -> Poly:
        """det J_beta(lambda, t) in (free coords, t)."""
        return self.jacobian.det()

    @cached_property
    def density(self) -> Poly:
        """det J_beta(lambda, 0) as a polynomial in the free coordinates only."""
        J0 = self.jacobian_det.compose(
            [Poly.var(self.d, a) for a in range(self.d)] + [Poly(self.d)] * self.m
        )
        return J0

    def beta(self, sigma: Sequence, t: Sequence):
        """Exact when inputs are rational, float otherwise."""
        if len(t) != self.m:
            raise SpecError(f"expected {self.m} t-coordinates, got {len(t)}")
        Pt = self.P.eval(list(t))
        f = self.embed(list(sigma))
        return [sum((Pt[i][j] * f[j] for j in range(self.p)), 0) for i in range(self.p)]

    def beta_float(self, sigma: Sequence[np.ndarray], t: Sequence[np.ndarray]) -> np.ndarray:
        """Vectorized beta; arrays broadcast; returns shape broadcast + (p,)."""
        Pt = self.P.eval_float(list(t)) if self.m else None
        f = self.embed(list(sigma))
        shape = np.broadcast_shapes(*(np.shape(x) for x in list(sigma) + list(t)))
        out = np.zeros(shape + (self.p,))
        for i in range(self.p):
            for j in self.free0:
                out[..., i] += Pt[..., i, j] * np.asarray(f[j], dtype=float)
        return out

    def beta_jacobian_det(self, sigma: Sequence):
        return self.density.eval(list(sigma))

    def density_float(self, sigma: Sequence[np.ndarray]) -> np.ndarray:
        return np.abs(self.density.eval_float(list(sigma)))

    def generic_functional(self, sigma: Sequence) -> list:
        f = self.embed(list(sigma))
        return list(f) + [0] * self.m

    def plancherel_density_b(self, sigma: Sequence):
        """(|det B|, exact sqrt or None) for the functional embedded from sigma."""
        lam = self.generic_functional([as_rational(s) for s in sigma])
        det = abs(rational_det(b_matrix(self.spec, lam, self.e)))
        return det, exact_sqrt(det)

    def plancherel_report(self, samples: int = 100, seed: int = 0xC0FFEE) -> PlancherelReport:
        ratios = set()
        for lam in random_functionals(self.d, samples, seed):
            dj = self.density.eval(list(lam))
            if dj == 0:
                continue
            db, _ = self.plancherel_density_b(lam)
            ratios.add(db / (dj * dj))
        if len(ratios) == 1:
            r2 = ratios.pop()
            r = exact_sqrt(r2)
            return PlancherelReport(self.density, r2, r, float(r2) ** 0.5, True)
        return PlancherelReport(self.density, None, None, None, False)

    def exp_ad(self, l: Sequence[int]) -> np.ndarray:
        """Integer matrix exp(ad A(l))|p for lattice points l (used by R(gamma))."""
        M = exp_nilpotent(ad_restricted(self.spec))
        vals = M.eval([as_rational(x) for x in l])
        return np.array([[float(v) for v in row] for row in vals])


_CACHE: dict = {}


def orbit_data(spec: AlgebraSpec, require_condition: bool = True) -> OrbitData:
    key = (spec.digest(), require_condition)
    if key not in _CACHE:
        if require_condition:
            rep = verify_condition1(spec)
            if not rep.structural_ok() or rep.generic_jump_cardinality != 2 * spec.m_dim:
                raise ConditionFailure(rep)
            od = OrbitData(spec, rep.generic_jump_set)
        else:
            od = OrbitData(spec)
        _CACHE[key] = od
    return _CACHE[key]


class ConditionFailure(Exception):
    def __init__(self, report):
        super().__init__("; ".join(report.diagnostics) or "Condition 1 fails")
        self.report = report
