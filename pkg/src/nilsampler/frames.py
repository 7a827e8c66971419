"""Plancherel-domain model of the band-limited space and the transform J_A.

Functions live on box x R^m with measure |det J_beta(lambda, 0)| dlambda dt and
are sampled on midpoint grids: lambda-nodes per axis over the box, r nodes per
unit length in t. The lattice element exp Z(k) exp A(l) is indexed by (k, l).

Index convention: frame coefficients use gamma itself,
c(k, l) = <F, tau(exp Z(k) exp A(l)) eta>, whereas J_A is evaluated at gamma as
written. The two families agree up to the unimodular relabeling
k -> exp(-ad A(l))|p k, l -> -l; only summed squares are compared.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import nufft
from ._parallel import map_ordered, worker_count
from .lie_core import SpecError
from .orbit import OrbitData
from .sampling import DEFAULT_SEED, SpectralBox, check_box, check_containment, check_tiling

REF_LAMBDA_NODES = 256
REF_T_NODES = 128
REF_T = 4
REF_KMAX = 48


class ContainmentRefused(Exception):
    """The image of box x [0,1)^m is not known to sit in a fundamental domain."""

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


def bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1 - 1 / (1 - u[inside] ** 2))
    return out


def cell_taper(t):
    """exp(1 - 1/sin^2(pi t)): smooth, 1 at half-integers, flat zero at integers."""
    s2 = np.sin(np.pi * np.asarray(t, dtype=float)) ** 2
    out = np.zeros_like(s2)
    ok = s2 > 1e-300
    out[ok] = np.exp(1 - 1 / s2[ok])
    return out


# ---------------------------------------------------------------- grid functions


@dataclass
class GridFunction:
    """values[i_1..i_d, j_1..j_m]; t-node j on axis a sits at (t_lo[a] + j + 1/2)/r."""

    od: OrbitData
    box: SpectralBox
    n_lambda: tuple
    r: int
    t_lo: tuple
    values: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        d, m = self.od.d, self.od.m
        check_box(self.od, self.box)
        if len(self.n_lambda) != d or len(self.t_lo) != m:
            raise SpecError("grid shape does not match the cross-section / t dimensions")
        if self.values.ndim != d + m or tuple(self.values.shape[:d]) != tuple(self.n_lambda):
            raise SpecError("values shape does not match the lambda grid")
        self.values.setflags(write=False)

    # grids
    @property
    def t_count(self) -> tuple:
        return tuple(self.values.shape[self.od.d:])

    @property
    def t_support(self) -> list:
        return [((g0) / self.r, (g0 + n) / self.r) for g0, n in zip(self.t_lo, self.t_count)]

    def lambda_axes(self) -> list:
        out = []
        for (a, b), n in zip(self.box.intervals, self.n_lambda):
            a, b = float(a), float(b)
            out.append(a + (np.arange(n) + 0.5) * (b - a) / n)
        return out

    def t_axes(self) -> list:
        return [(g0 + np.arange(n) + 0.5) / self.r for g0, n in zip(self.t_lo, self.t_count)]

    def lambda_mesh(self) -> list:
        return np.meshgrid(*self.lambda_axes(), indexing="ij") if self.od.d else []

    def lambda_weights(self) -> np.ndarray:
        """Midpoint cell volume times |det J_beta(lambda, 0)| per lambda-node."""
        cell = 1.0
        for (a, b), n in zip(self.box.intervals, self.n_lambda):
            cell *= float(b - a) / n
        return cell * self.od.density_float(self.lambda_mesh())

    @property
    def t_weight(self) -> float:
        return float(self.r) ** (-self.od.m)

    def norm2(self) -> float:
        w = self.lambda_weights().reshape(self.n_lambda + (1,) * self.od.m)
        return float(np.sum(w * np.abs(self.values) ** 2) * self.t_weight)

    def inner(self, other: "GridFunction") -> complex:
        self._same_grid(other)
        w = self.lambda_weights().reshape(self.n_lambda + (1,) * self.od.m)
        return complex(np.sum(w * self.values * np.conj(other.values)) * self.t_weight)

    def _same_grid(self, other):
        if (self.box != other.box or self.n_lambda != other.n_lambda or self.r != other.r
                or self.t_lo != other.t_lo or self.t_count != other.t_count):
            raise SpecError("grid functions live on different grids")

    def with_values(self, values, t_lo=None, **flags) -> "GridFunction":
        return GridFunction(self.od, self.box, self.n_lambda, self.r,
                            tuple(self.t_lo if t_lo is None else t_lo), np.asarray(values, dtype=complex),
                            {**self.flags, **flags})

    def __add__(self, other):
        self._same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        self._same_grid(other)
        return self.with_values(self.values - other.values)

    def scale(self, c) -> "GridFunction":
        return self.with_values(c * self.values)

    def padded(self, t_lo: Sequence[int], t_count: Sequence[int]) -> "GridFunction":
        """Same function on a larger t-grid (zero fill)."""
        d = self.od.d
        out = np.zeros(self.n_lambda + tuple(t_count), dtype=complex)
        src, dst = [slice(None)] * d, [slice(None)] * d
        for g0, n, G0, N in zip(self.t_lo, self.t_count, t_lo, t_count):
            s = g0 - G0
            if s < 0 or s + n > N:
                raise SpecError("padding grid does not contain the current grid")
            src.append(slice(0, n))
            dst.append(slice(s, s + n))
        out[tuple(dst)] = self.values[tuple(src)]
        return self.with_values(out, t_lo=tuple(t_lo))

    @classmethod
    def from_callable(cls, od: OrbitData, box: SpectralBox, fn: Callable, T: int = REF_T,
                      n_lambda=REF_LAMBDA_NODES, r: int = REF_T_NODES, check_support: bool = True):
        """fn(lam_list, t_list) with broadcastable arrays; support in t must be [-T, T]^m."""
        d, m = od.d, od.m
        if int(T) != T or T < 1:
            raise SpecError("T must be a positive integer")
        if r < 1:
            raise SpecError("t-nodes per unit must be positive")
        n_lambda = tuple(n_lambda) if isinstance(n_lambda, (tuple, list)) else (int(n_lambda),) * d
        t_lo = (-int(T) * r,) * m
        probe = cls(od, box, n_lambda, r, t_lo, np.zeros(n_lambda + (2 * int(T) * r,) * m, dtype=complex))
        lam = [x.reshape(x.shape + (1,) * m) for x in probe.lambda_mesh()]
        tax = probe.t_axes()
        tt = np.meshgrid(*tax, indexing="ij") if m else []
        tt = [x.reshape((1,) * d + x.shape) for x in tt]
        vals = np.asarray(fn(lam, tt), dtype=complex)
        vals = np.broadcast_to(vals, n_lambda + (2 * int(T) * r,) * m).copy()
        if check_support and m:
            scale = float(np.abs(vals).max()) if vals.size else 0.0
            for a in range(m):
                for edge in (-float(T), float(T)):
                    te = [x if b != a else np.full_like(x, edge) for b, x in enumerate(tt)]
                    v = np.abs(np.asarray(fn(lam, te), dtype=complex))
                    if v.size and float(v.max()) > 1e-12 * max(scale, 1e-300):
                        raise SpecError(f"function does not vanish on the boundary of [-{T},{T}]^m")
        return cls(od, box, n_lambda, r, t_lo, vals)

    def to_csv(self, path) -> None:
        """Columns: lambda coords, t coords, real, imag (one row per node)."""
        lam = [x.ravel() for x in self.lambda_mesh()]
        tt = np.meshgrid(*self.t_axes(), indexing="ij")
        m = self.od.m
        names = [f"l{k}" for k in self.od.free] + [f"t{a + 1}" for a in range(m)] + ["re", "im"]
        vals = self.values.reshape(int(np.prod(self.n_lambda)), -1)
        tflat = [x.ravel() for x in tt]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(names)
            for i in range(vals.shape[0]):
                lv = [repr(float(x[i])) for x in lam]
                for j in range(vals.shape[1]):
                    v = vals[i, j]
                    wr.writerow(lv + [repr(float(x[j])) for x in tflat] + [repr(float(v.real)), repr(float(v.imag))])


# ---------------------------------------------------------------- lattice windows


@dataclass(frozen=True)
class LatticeWindow:
    k_max: int
    l_lo: tuple
    l_hi: tuple  # inclusive

    def __post_init__(self):
        if self.k_max < 0:
            raise SpecError("k_max must be non-negative")
        if any(a > b for a, b in zip(self.l_lo, self.l_hi)):
            raise SpecError("empty l-range")

    @property
    def l_shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in zip(self.l_lo, self.l_hi))

    def ls(self) -> np.ndarray:
        axes = [np.arange(a, b + 1) for a, b in zip(self.l_lo, self.l_hi)]
        if not axes:
            return np.zeros((1, 0), dtype=np.int64)
        return np.stack([x.ravel() for x in np.meshgrid(*axes, indexing="ij")], axis=1)

    def covers(self, other: "LatticeWindow") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.l_lo, self.l_hi, other.l_lo, other.l_hi))

    @staticmethod
    def needed_l(F: GridFunction):
        """All l with ([0,1)^m - l) meeting the t-support of F."""
        lo, hi = [], []
        for g0, n in zip(F.t_lo, F.t_count):
            # cell [-l r, (1 - l) r) meets [g0, g0 + n)
            lo.append(-((g0 + n) // F.r) + (0 if (g0 + n) % F.r else 1))
            hi.append(-(-(F.r - g0) // F.r) - 1)
        return tuple(lo), tuple(hi)

    @classmethod
    def for_function(cls, F: GridFunction, k_max: int = REF_KMAX) -> "LatticeWindow":
        lo, hi = cls.needed_l(F)
        return cls(int(k_max), lo, hi)


@dataclass
class SampleSequence:
    """values[l-index (C order over window.ls()), k_1 + K, ..., k_p + K]."""

    window: LatticeWindow
    values: np.ndarray
    p: int

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def shell_mass(self, radius: int | None = None) -> float:
        K = self.window.k_max
        radius = K if radius is None else radius
        k = np.abs(np.arange(-K, K + 1))
        kk = np.zeros((2 * K + 1,) * self.p, dtype=np.int64)
        for a in range(self.p):
            shape = [1] * self.p
            shape[a] = -1
            kk = np.maximum(kk, k.reshape(shape))
        return float(np.sum(np.abs(self.values[:, kk == radius]) ** 2))

    def truncated(self, k_max: int) -> "SampleSequence":
        K = self.window.k_max
        if k_max > K:
            raise SpecError("cannot enlarge a window by truncation")
        sl = (slice(None),) + (slice(K - k_max, K + k_max + 1),) * self.p
        return SampleSequence(LatticeWindow(k_max, self.window.l_lo, self.window.l_hi),
                              self.values[sl].copy(), self.p)

    def l_index(self, l: Sequence[int]) -> int | None:
        if any(x < a or x > b for x, a, b in zip(l, self.window.l_lo, self.window.l_hi)):
            return None
        idx = tuple(x - a for x, a in zip(l, self.window.l_lo))
        return int(np.ravel_multi_index(idx, self.window.l_shape)) if idx else 0

    def get(self, k: Sequence[int], l: Sequence[int]) -> complex:
        i = self.l_index(l)
        K = self.window.k_max
        if i is None or any(abs(x) > K for x in k):
            return 0j
        return complex(self.values[(i,) + tuple(x + K for x in k)])

    def to_csv(self, path) -> None:
        """Columns: k_1..k_p, l_1..l_m, real, imag."""
        K = self.window.k_max
        ls = self.window.ls()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([f"k{a + 1}" for a in range(self.p)] + [f"l{a + 1}" for a in range(ls.shape[1])] + ["re", "im"])
            for i, l in enumerate(ls):
                for k in product(range(-K, K + 1), repeat=self.p):
                    v = self.values[(i,) + tuple(x + K for x in k)]
                    wr.writerow(list(k) + [int(x) for x in l] + [repr(float(v.real)), repr(float(v.imag))])


# ---------------------------------------------------------------- actions


def _check_aligned(a, r) -> list:
    out = []
    for x in a:
        s = float(x) * r
        if abs(s - round(s)) > 1e-9:
            raise SpecError(f"shift {x} is not aligned to the t-grid (spacing 1/{r})")
        out.append(int(round(s)))
    return out


def _multiplier(od: OrbitData, lam: Sequence, t: Sequence, k) -> np.ndarray:
    """exp(2 pi i <beta(lambda, t), Z(k)>) with broadcasting."""
    beta = od.beta_float(list(lam), list(t))
    k = np.asarray(k, dtype=float)
    return np.exp(2j * np.pi * (beta @ k))


def sigma_action(od: OrbitData, lam: Sequence[float], k, a, h: np.ndarray, r: int,
                 t_lo: Sequence[int]):
    """sigma_lambda(exp Z(k) exp A(a)) on a t-grid function h; returns (values, new t_lo).

    h lives on nodes (t_lo + j + 1/2)/r; the shift a must be a multiple of 1/r."""
    m = od.m
    if len(k) != od.p or len(a) != m:
        raise SpecError(f"need k in R^{od.p} and a in R^{m}")
    shift = _check_aligned(a, r)
    new_lo = tuple(g + s for g, s in zip(t_lo, shift))
    h = np.asarray(h, dtype=complex)
    if not np.any(k):
        return h.copy(), new_lo
    axes = [(g0 + np.arange(n) + 0.5) / r for g0, n in zip(new_lo, h.shape)]
    tt = np.meshgrid(*axes, indexing="ij")
    lam_b = [np.full(h.shape, float(x)) for x in lam]
    out = _multiplier(od, lam_b, tt, k) * h
    n0, n1 = float(np.sum(np.abs(h) ** 2)), float(np.sum(np.abs(out) ** 2))
    if abs(n1 - n0) > 1e-12 * max(n0, 1e-300):
        raise RuntimeError("sigma_action failed to preserve the grid norm")
    return out, new_lo


def tau_action(F: GridFunction, k, a) -> GridFunction:
    """[tau(exp Z(k) exp A(a)) F](lambda, t) = sigma_lambda(...) F(lambda, .)(t)."""
    od = F.od
    if len(k) != od.p or len(a) != od.m:
        raise SpecError(f"need k in R^{od.p} and a in R^{od.m}")
    shift = _check_aligned(a, F.r)
    new_lo = tuple(g + s for g, s in zip(F.t_lo, shift))
    if not np.any(k):
        return F.with_values(F.values.copy(), t_lo=new_lo)
    d, m = od.d, od.m
    lam = [x.reshape(x.shape + (1,) * m) for x in F.lambda_mesh()]
    axes = [(g0 + np.arange(n) + 0.5) / F.r for g0, n in zip(new_lo, F.t_count)]
    tt = [x.reshape((1,) * d + x.shape) for x in np.meshgrid(*axes, indexing="ij")]
    out = _multiplier(od, lam, tt, k) * F.values
    n0 = float(np.sum(np.abs(F.values) ** 2))
    n1 = float(np.sum(np.abs(out) ** 2))
    if abs(n1 - n0) > 1e-12 * max(n0, 1e-300):
        raise RuntimeError("tau_action failed to preserve the grid norm")
    return F.with_values(out, t_lo=new_lo)


# ---------------------------------------------------------------- the transform


def _cell_nodes(F: GridFunction, l=None):
    """lambda-mesh (flattened) x t-nodes in the unit cell [0,1)^m (+ l), as (N, d), (N, m)."""
    d, m = F.od.d, F.od.m
    lam = np.stack([x.ravel() for x in F.lambda_mesh()], axis=1) if d else np.zeros((1, 0))
    j = (np.arange(F.r) + 0.5) / F.r
    cell = np.stack([x.ravel() for x in np.meshgrid(*([j] * m), indexing="ij")], axis=1) if m else np.zeros((1, 0))
    if l is not None:
        cell = cell + np.asarray(l, dtype=float)
    nl, nc = lam.shape[0], cell.shape[0]
    lam_all = np.repeat(lam, nc, axis=0)
    t_all = np.tile(cell, (nl, 1))
    return lam_all, t_all


def _beta_points(F: GridFunction, lam_all, t_all) -> np.ndarray:
    od = F.od
    return od.beta_float([lam_all[:, a] for a in range(od.d)], [t_all[:, a] for a in range(od.m)])


def _cell_values(F: GridFunction, l) -> np.ndarray:
    """F(lambda, t - l) on lambda-nodes x unit-cell nodes, flattened (zero off-support)."""
    d, m, r = F.od.d, F.od.m, F.r
    out = np.zeros(F.n_lambda + (r,) * m, dtype=complex)
    src, dst = [slice(None)] * d, [slice(None)] * d
    for a in range(m):
        # cell node j maps to global node j - l r, i.e. array index j - l r - t_lo
        start = -int(l[a]) * r - F.t_lo[a]
        lo, hi = max(0, start), min(F.t_count[a], start + r)
        if lo >= hi:
            return out.reshape(-1)
        src.append(slice(lo, hi))
        dst.append(slice(lo - start, hi - start))
    out[tuple(dst)] = F.values[tuple(src)]
    return out.reshape(-1)


def _run_type1(points, strengths, K, method, eps, backend):
    if method == "direct":
        return nufft.direct_type1(points, strengths, K)
    if method != "nufft":
        raise SpecError(f"unknown method {method!r}")
    plan = nufft.Plan.make(points.shape[1], K, eps)
    L = strengths.shape[0]
    nchunk = min(worker_count(), L)
    if nchunk <= 1:
        return nufft.type1(points, strengths, K, backend=backend, plan=plan)
    bounds = np.linspace(0, L, nchunk + 1).astype(int)
    parts = map_ordered(lambda ab: nufft.type1(points, strengths[ab[0]:ab[1]], K, backend=backend, plan=plan),
                        list(zip(bounds[:-1], bounds[1:])))
    return np.concatenate(parts, axis=0)


def j_transform(F: GridFunction, window: LatticeWindow | None = None, method: str = "nufft",
                eps: float = 1e-12, backend=None, k_max: int = REF_KMAX) -> SampleSequence:
    """Quadrature for [J_A F](exp Z(k) exp A(l)) over the window."""
    od = F.od
    if window is None:
        window = LatticeWindow.for_function(F, k_max)
    lo, hi = LatticeWindow.needed_l(F)
    need = LatticeWindow(window.k_max, lo, hi)
    if not window.covers(need):
        # only an error if mass would actually be dropped
        for l in need.ls():
            if window_index(window, l) is None and np.any(_cell_values(F, l)):
                raise SpecError("lattice window is smaller than the t-support of F; mass would be dropped")
    lam_all, t_all = _cell_nodes(F)
    pts = _beta_points(F, lam_all, t_all)
    w = np.repeat(F.lambda_weights().ravel(), F.r ** od.m) * F.t_weight
    ls = window.ls()
    c = np.stack([w * _cell_values(F, l) for l in ls], axis=0)
    vals = _run_type1(pts, c, window.k_max, method, eps, backend)
    vals = vals.reshape((len(ls),) + (2 * window.k_max + 1,) * od.p)
    return SampleSequence(window, vals, od.p)


def window_index(window: LatticeWindow, l) -> int | None:
    if any(x < a or x > b for x, a, b in zip(l, window.l_lo, window.l_hi)):
        return None
    idx = tuple(int(x - a) for x, a in zip(l, window.l_lo))
    return int(np.ravel_multi_index(idx, window.l_shape)) if idx else 0


# ---------------------------------------------------------------- test functions


def reference_function(od: OrbitData, box: SpectralBox, variant: int = 0, T: int = REF_T,
                       n_lambda=REF_LAMBDA_NODES, r: int = REF_T_NODES) -> GridFunction:
    """Smooth compactly supported a(lambda) b(t).

    a sits inside the box and away from the coordinate hyperplanes (where the
    Plancherel density may vanish and beta degenerates); b(t) is a bump on
    [-T, T]^m times a factor flat at integer t, so every cell piece is smooth
    on the torus. Variants differ in lambda-lobe, t-profile and phase."""
    lo, hi = box.lo, box.hi
    if variant not in (0, 1, 2):
        raise SpecError("reference variants are 0, 1, 2")

    def lobe(lam, sign, a_frac=0.2, b_frac=0.85):
        out = 1.0
        for x, l0, h0 in zip(lam, lo, hi):
            edge = h0 if sign > 0 else l0
            if edge * sign <= 0:
                edge = h0 if abs(h0) >= abs(l0) else l0
            u0, u1 = sorted((a_frac * edge, b_frac * edge))
            c, hw = (u0 + u1) / 2, (u1 - u0) / 2
            out = out * bump((x - c) / hw)
        return out

    def tprof(t, centre=0.0, width=float(T)):
        out = 1.0
        for x in t:
            out = out * bump((x - centre) / width) * cell_taper(x)
        return out

    def fn(lam, t):
        if variant == 0:
            return lobe(lam, 1) * tprof(t)
        if variant == 1:
            return lobe(lam, -1, 0.3, 0.9) * tprof(t, 0.5, T - 0.5) * np.exp(2j * np.pi * 0.3 * sum(t))
        return (lobe(lam, 1, 0.1, 0.6) + 0.5j * lobe(lam, -1, 0.4, 0.95)) * tprof(t, -0.25, T - 0.25)

    return GridFunction.from_callable(od, box, fn, T, n_lambda, r)


def plain_bump(od: OrbitData, box: SpectralBox, T: int = REF_T, n_lambda=REF_LAMBDA_NODES,
               r: int = REF_T_NODES) -> GridFunction:
    """Plain tensor bump over the whole box and [-T, T]^m (slow Fourier decay; diagnostic)."""
    lo, hi = box.lo, box.hi

    def fn(lam, t):
        out = 1.0
        for x, a, b in zip(lam, lo, hi):
            out = out * bump((2 * x - a - b) / (b - a))
        for x in t:
            out = out * bump(x / T)
        return out

    return GridFunction.from_callable(od, box, fn, T, n_lambda, r)


OVERLAP_BOX = "-5/2,5/2"


def overlap_control(od: OrbitData, T: int = REF_T, n_lambda=REF_LAMBDA_NODES,
                    r: int = REF_T_NODES) -> GridFunction:
    """Heisenberg-type negative control: a lobe at lambda in (1.9, 2.4) inside the box
    (-5/2, 5/2), whose image overlaps itself mod Z^p without tiling."""
    if od.d != 1:
        raise SpecError("the overlap control is defined for one free coordinate")
    box = SpectralBox.parse(OVERLAP_BOX)

    def fn(lam, t):
        out = bump((lam[0] - 2.15) / 0.25)
        for x in t:
            out = out * bump(x / T) * cell_taper(x)
        return out

    return GridFunction.from_callable(od, box, fn, T, n_lambda, r)


def eta_hat(od: OrbitData, box: SpectralBox, smoothed: bool = False, T: int = 1,
            n_lambda=REF_LAMBDA_NODES, r: int = REF_T_NODES) -> GridFunction:
    """Indicator of box x [0,1)^m; the smoothed variant has raised-cosine edges
    two grid cells wide in every variable."""
    lo, hi = box.lo, box.hi
    nl = (n_lambda,) * od.d if np.isscalar(n_lambda) else tuple(n_lambda)

    def ramp(x, a, b, width):
        # 1 inside [a, b], raised-cosine to 0 over `width` just inside each edge
        u = np.clip(np.minimum(x - a, b - x) / width, 0, 1)
        return 0.5 - 0.5 * np.cos(np.pi * u)

    def fn(lam, t):
        out = 1.0
        for x, a, b, n in zip(lam, lo, hi, nl):
            out = out * (ramp(x, a, b, 2 * (b - a) / n) if smoothed else ((x > a) & (x < b)).astype(float))
        for x in t:
            out = out * (ramp(x, 0.0, 1.0, 2.0 / r) if smoothed else ((x >= 0) & (x < 1)).astype(float))
        return out

    return GridFunction.from_callable(od, box, fn, T, n_lambda, r, check_support=False)


# ---------------------------------------------------------------- verification


@dataclass
class Precondition:
    established: bool
    route: str  # "containment", "tiling", "forced" or "refused"
    negative_control: bool
    detail: dict


def establish_domain(od: OrbitData, box: SpectralBox, force: bool = False, samples: int = 100_000,
                     seed: int = DEFAULT_SEED) -> Precondition:
    """beta(box x [0,1)^m) inside a fundamental domain: containment, or a tiling
    (equal to a fundamental domain up to a null set)."""
    c = check_containment(od, box, samples, seed)
    if c.contained:
        return Precondition(True, "containment", False, c.to_json())
    t = check_tiling(od, box, samples, seed)
    if t.tiling:
        return Precondition(True, "tiling", False, t.to_json())
    if force:
        return Precondition(False, "forced", True, {"containment": c.to_json(), "tiling": t.to_json()})
    raise ContainmentRefused("the image of box x [0,1)^m is not shown to lie in a fundamental domain of Z^p", c)


@dataclass
class IsometryReport:
    norm_ratio: float
    tail_estimate: float  # last-shell mass relative to ||F||^2
    norm_F2: float
    norm_J2: float
    zero_norm: bool
    k_max: int
    precondition: Precondition | None = None

    @property
    def negative_control(self) -> bool:
        return bool(self.precondition and self.precondition.negative_control)

    def to_json(self) -> dict:
        return {
            "norm_ratio": self.norm_ratio,
            "tail_estimate": self.tail_estimate,
            "norm_F2": self.norm_F2,
            "norm_J2": self.norm_J2,
            "zero_norm": self.zero_norm,
            "k_max": self.k_max,
            "negative_control": self.negative_control,
            "domain_route": self.precondition.route if self.precondition else None,
        }


def isometry_test(F: GridFunction, window: LatticeWindow | None = None, k_max: int = REF_KMAX,
                  force: bool = False, precondition: Precondition | None = None, **kw) -> IsometryReport:
    pre = precondition or establish_domain(F.od, F.box, force)
    if window is None:
        window = LatticeWindow.for_function(F, k_max)
    n2 = F.norm2()
    if n2 == 0:
        return IsometryReport(1.0, 0.0, 0.0, 0.0, True, window.k_max, pre)
    J = j_transform(F, window, **kw)
    nj = J.norm2()
    return IsometryReport(nj / n2, J.shell_mass() / n2, n2, nj, False, window.k_max, pre)


@dataclass
class IntertwiningReport:
    generator: str
    deviation: float  # max |difference| / ||F||
    abs_deviation: float
    compared: int
    norm_F: float

    def to_json(self) -> dict:
        return {"generator": self.generator, "deviation": self.deviation, "abs_deviation": self.abs_deviation,
                "entries_compared": self.compared, "norm_F": self.norm_F}


def parse_generator(od: OrbitData, text: str):
    """'A2' / 'Z1' / 'id' -> (k, l) integer vectors."""
    text = text.strip()
    k, l = [0] * od.p, [0] * od.m
    if text.lower() in ("id", "identity", "e"):
        return k, l
    if len(text) < 2 or text[0] not in "AZ" or not text[1:].isdigit():
        raise SpecError(f"generator must look like A1 or Z2, got {text!r}")
    i = int(text[1:])
    if text[0] == "A":
        if not 1 <= i <= od.m:
            raise SpecError(f"A-generators are A1..A{od.m}")
        l[i - 1] = 1
    else:
        if not 1 <= i <= od.p:
            raise SpecError(f"Z-generators are Z1..Z{od.p}")
        k[i - 1] = 1
    return k, l


def intertwining_test(F: GridFunction, generator, k_max: int = REF_KMAX, force: bool = False,
                      precondition: Precondition | None = None, JF: SampleSequence | None = None,
                      **kw) -> IntertwiningReport:
    """Compare J_A(tau(gamma') F) with R(gamma') J_A F on their common window.

    For gamma' = exp Z(k') exp A(l') (one of the two factors trivial):
    R(gamma') J F (k, l) = J F (k + exp(ad A(l))|p k', l + l')."""
    od = F.od
    if precondition is None:
        establish_domain(od, F.box, force)  # refuses unless the domain is established or forced
    name = generator if isinstance(generator, str) else None
    kp, lp = parse_generator(od, generator) if isinstance(generator, str) else generator
    kp, lp = list(kp), list(lp)
    if any(kp) and any(lp):
        raise SpecError("use one generator at a time (a Z-part or an A-part)")
    name = name or f"k={kp},l={lp}"
    nF = F.norm2() ** 0.5
    if JF is None:
        JF = j_transform(F, k_max=k_max, **kw)
    K = JF.window.k_max
    TF = tau_action(F, kp, lp)
    if not any(kp) and not any(lp):
        JT = JF
    else:
        JT = j_transform(TF, LatticeWindow.for_function(TF, K), **kw)
    diffs, count = [], 0
    kgrid = np.stack(np.meshgrid(*([np.arange(-K, K + 1)] * od.p), indexing="ij"), axis=-1).reshape(-1, od.p)
    for i, l in enumerate(JT.window.ls()):
        src_l = [int(a + b) for a, b in zip(l, lp)]
        j = window_index(JF.window, src_l)
        a = JT.values[i].reshape(-1)
        if j is None:
            diffs.append(float(np.abs(a).max()))
            count += a.size
            continue
        E = od.exp_ad(list(l))
        shift = np.rint(E @ np.asarray(kp, dtype=float)).astype(np.int64)
        tk = kgrid + shift
        ok = np.all(np.abs(tk) <= K, axis=1)
        b = JF.values[j][tuple((tk[ok] + K).T)]
        diffs.append(float(np.abs(a[ok] - b).max()) if ok.any() else 0.0)
        count += int(ok.sum())
    dev = max(diffs) if diffs else 0.0
    rel = dev / nF if nF > 0 else dev
    return IntertwiningReport(name, rel, dev, count, nF)


@dataclass
class ParsevalReport:
    frame_sum_ratio: float
    frame_sum: float
    norm_F2: float
    zero_norm: bool
    k_max: int
    tail_estimate: float
    coefficients: SampleSequence | None = None

    def to_json(self) -> dict:
        return {"frame_sum_ratio": self.frame_sum_ratio, "frame_sum": self.frame_sum, "norm_F2": self.norm_F2,
                "zero_norm": self.zero_norm, "k_max": self.k_max, "tail_estimate": self.tail_estimate}


def frame_coefficients(F: GridFunction, window: LatticeWindow, method: str = "nufft", eps: float = 1e-12,
                       backend=None) -> SampleSequence:
    """c(k, l) = <F, tau(exp Z(k) exp A(l)) eta>, eta = indicator of box x [0,1)^m:
    the integral of F(lambda, t) exp(-2 pi i <beta(lambda, t), k>) over t in l + [0,1)^m."""
    od = F.od
    w = np.repeat(F.lambda_weights().ravel(), F.r ** od.m) * F.t_weight
    K = window.k_max
    out = []
    for l in window.ls():
        lam_all, t_all = _cell_nodes(F, l)
        pts = -_beta_points(F, lam_all, t_all)
        c = w * _cell_values(F, [-x for x in l])
        if not np.any(c):
            out.append(np.zeros((2 * K + 1,) * od.p, dtype=complex))
            continue
        out.append(_run_type1(pts, c[None], K, method, eps, backend)[0])
    return SampleSequence(window, np.stack(out, axis=0), od.p)


def parseval_window(F: GridFunction, k_max: int) -> LatticeWindow:
    # t in l + [0,1)^m meets the support: l = -l' for the J-window l'
    w = LatticeWindow.for_function(F, k_max)
    return LatticeWindow(k_max, tuple(-b for b in w.l_hi), tuple(-a for a in w.l_lo))


def parseval_check(F: GridFunction, window: LatticeWindow | None = None, k_max: int = REF_KMAX,
                   force: bool = False, precondition: Precondition | None = None, keep: bool = False,
                   **kw) -> ParsevalReport:
    if precondition is None:
        establish_domain(F.od, F.box, force)
    if window is None:
        window = parseval_window(F, k_max)
    n2 = F.norm2()
    if n2 == 0:
        return ParsevalReport(0.0, 0.0, 0.0, True, window.k_max, 0.0)
    c = frame_coefficients(F, window, **kw)
    s = c.norm2()
    return ParsevalReport(s / n2, s, n2, False, window.k_max, c.shell_mass() / n2, c if keep else None)


@dataclass
class ReconstructionReport:
    rel_l2_error: float
    zero_norm: bool
    k_max: int
    frame_sum_ratio: float
    F_tilde: GridFunction | None = None

    def to_json(self) -> dict:
        return {"rel_l2_error": self.rel_l2_error, "zero_norm": self.zero_norm, "k_max": self.k_max,
                "frame_sum_ratio": self.frame_sum_ratio}


def synthesize(F: GridFunction, coef: SampleSequence, eps: float = 1e-12, method: str = "nufft",
               backend=None) -> GridFunction:
    """F~ = sum c(k,l) tau(exp Z(k) exp A(l)) eta on the grid of F."""
    od = F.od
    out = np.zeros_like(F.values)
    m, r = od.m, F.r
    for i, l in enumerate(coef.window.ls()):
        lam_all, t_all = _cell_nodes(F, l)
        pts = _beta_points(F, lam_all, t_all)
        # sum_k c_k exp(+2 pi i <s, k>) = type-2 at -s
        if method == "direct":
            vals = nufft.direct_type2(-pts, coef.values[i])
        else:
            vals = nufft.type2(-pts, coef.values[i], eps, backend=backend)
        vals = vals.reshape(F.n_lambda + (r,) * m)
        dst, src = [slice(None)] * od.d, [slice(None)] * od.d
        skip = False
        for a in range(m):
            start = int(l[a]) * r - F.t_lo[a]
            lo, hi = max(0, start), min(F.t_count[a], start + r)
            if lo >= hi:
                skip = True
                break
            dst.append(slice(lo, hi))
            src.append(slice(lo - start, hi - start))
        if not skip:
            out[tuple(dst)] += vals[tuple(src)]
    return F.with_values(out)


def reconstruct(F: GridFunction, window: LatticeWindow | None = None, k_max: int = REF_KMAX,
                force: bool = False, precondition: Precondition | None = None, keep: bool = False,
                **kw) -> ReconstructionReport:
    pre = precondition or establish_domain(F.od, F.box, force)
    if window is None:
        window = parseval_window(F, k_max)
    par = parseval_check(F, window, precondition=pre, keep=True, **kw)
    if par.zero_norm:
        return ReconstructionReport(0.0, True, window.k_max, 0.0, F.with_values(np.zeros_like(F.values)) if keep else None)
    Ft = synthesize(F, par.coefficients, **kw)
    err = (Ft - F).norm2() ** 0.5 / F.norm2() ** 0.5
    return ReconstructionReport(err, False, window.k_max, par.frame_sum_ratio, Ft if keep else None)


def linearity_defect(F: GridFunction, G: GridFunction, a: complex, b: complex, k_max: int = 8, **kw) -> float:
    """max |J(aF + bG) - a JF - b JG| relative to the largest entry."""
    w = LatticeWindow.for_function(F, k_max)
    lhs = j_transform(F.scale(a) + G.scale(b), w, **kw).values
    rhs = a * j_transform(F, w, **kw).values + b * j_transform(G, w, **kw).values
    scale = max(float(np.abs(rhs).max()), 1e-300)
    return float(np.abs(lhs - rhs).max()) / scale
