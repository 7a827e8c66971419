"""Periodic nonuniform FFTs on [0,1)^p with Gaussian gridding.

type1:  out[l, k] = sum_n c[l, n] exp(+2 pi i k.x_n),   k in [-K, K]^p
type2:  out[l, n] = sum_k c[l, k] exp(-2 pi i k.x_n)
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log, pi, sqrt

import numpy as np

from . import kernels

_SMOOTH = (2, 3, 5)


def _next_smooth(n: int) -> int:
    while True:
        r = n
        for f in _SMOOTH:
            while r % f == 0:
                r //= f
        if r == 1 and n % 2 == 0:
            return n
        n += 1


@dataclass(frozen=True)
class Plan:
    p: int
    K: int
    eps: float
    G: int
    w: int
    sig2: float  # Gaussian variance in grid units
    phihat: np.ndarray  # per-axis kernel transform at k = -K..K

    @classmethod
    def make(cls, p: int, K: int, eps: float = 1e-12) -> "Plan":
        if p < 1 or K < 0:
            raise ValueError("need p >= 1 and K >= 0")
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        w = max(2, int(ceil(3 * log(1 / eps) / (2 * pi))) + 1)
        G = _next_smooth(max(2 * (2 * K + 1), 2 * w + 2))
        sig2 = 2 * w / (3 * pi)
        s = sqrt(sig2) / G
        k = np.arange(-K, K + 1)
        phihat = s * sqrt(2 * pi) * np.exp(-2 * pi**2 * s**2 * k**2)
        return cls(p, K, eps, G, w, sig2, phihat)

    def _deconv(self) -> np.ndarray:
        out = self.phihat
        for _ in range(self.p - 1):
            out = np.multiply.outer(out, self.phihat)
        return out

    def _index(self):
        k = np.arange(-self.K, self.K + 1) % self.G
        return np.ix_(*([k] * self.p))


def _prep(x, c, p):
    x = np.ascontiguousarray(np.mod(np.asarray(x, dtype=float), 1.0))
    if x.ndim != 2 or x.shape[1] != p:
        raise ValueError(f"points must have shape (N, {p})")
    x[x >= 1.0] = 0.0
    c = np.asarray(c, dtype=complex)
    single = c.ndim == 1
    c = np.ascontiguousarray(np.atleast_2d(c))
    return x, c, single


def type1(x, c, K: int, eps: float = 1e-12, backend=None, plan: Plan | None = None):
    """Returns shape (L,) + (2K+1,)*p (or without L for 1-D strengths)."""
    p = np.shape(x)[1]
    plan = plan or Plan.make(p, K, eps)
    x, c, single = _prep(x, c, p)
    if c.shape[1] != x.shape[0]:
        raise ValueError("strengths and points disagree in length")
    L, G = c.shape[0], plan.G
    grid = np.zeros((L, G**p), dtype=complex)
    kernels.spread(x, c, G, plan.w, plan.sig2, grid, backend=backend)
    grid = grid.reshape((L,) + (G,) * p)
    F = np.fft.ifftn(grid, axes=tuple(range(1, p + 1)))
    idx = plan._index()
    out = F[(slice(None),) + idx] / plan._deconv()
    return out[0] if single else out


def type2(x, coef, eps: float = 1e-12, backend=None, plan: Plan | None = None):
    """coef shape (L,) + (2K+1,)*p or (2K+1,)*p; returns (L, N) or (N,)."""
    coef = np.asarray(coef, dtype=complex)
    p = np.shape(x)[1]
    single = coef.ndim == p
    if single:
        coef = coef[None]
    K = (coef.shape[1] - 1) // 2
    plan = plan or Plan.make(p, K, eps)
    x, _, _ = _prep(x, np.zeros(1), p)
    L, G = coef.shape[0], plan.G
    A = np.zeros((L,) + (G,) * p, dtype=complex)
    A[(slice(None),) + plan._index()] = coef / plan._deconv()
    # u_m = sum_k c_k exp(-2 pi i k m / G), scaled by the quadrature weight G^-p
    U = np.fft.fftn(A, axes=tuple(range(1, p + 1))).reshape(L, -1) / float(G) ** p
    U = np.ascontiguousarray(U)
    out = np.empty((L, x.shape[0]), dtype=complex)
    kernels.interp(x, U, G, plan.w, plan.sig2, out, backend=backend)
    return out[0] if single else out


def _phase_block(x, K):
    # (n, (2K+1)^p) matrix of exp(2 pi i k.x)
    k = np.arange(-K, K + 1)
    n, p = x.shape
    E = np.exp(2j * np.pi * x[:, 0, None] * k)
    for a in range(1, p):
        Ea = np.exp(2j * np.pi * x[:, a, None] * k)
        E = (E[:, :, None] * Ea[:, None, :]).reshape(n, -1)
    return E


def direct_type1(x, c, K: int, chunk: int | None = None):
    """Plain summation (matrix products); the reference for type1."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    c = np.asarray(c, dtype=complex)
    single = c.ndim == 1
    c = np.atleast_2d(c)
    p = x.shape[1]
    M = (2 * K + 1) ** p
    chunk = chunk or max(1, (1 << 21) // M)
    out = np.zeros((c.shape[0], M), dtype=complex)
    for s in range(0, x.shape[0], chunk):
        out += c[:, s:s + chunk] @ _phase_block(x[s:s + chunk], K)
    out = out.reshape((c.shape[0],) + (2 * K + 1,) * p)
    return out[0] if single else out


def direct_type2(x, coef, chunk: int | None = None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = x.shape[1]
    coef = np.asarray(coef, dtype=complex)
    single = coef.ndim == p
    if single:
        coef = coef[None]
    K = (coef.shape[1] - 1) // 2
    flat = coef.reshape(coef.shape[0], -1)
    M = flat.shape[1]
    chunk = chunk or max(1, (1 << 21) // M)
    out = np.empty((coef.shape[0], x.shape[0]), dtype=complex)
    for s in range(0, x.shape[0], chunk):
        out[:, s:s + chunk] = flat @ np.conj(_phase_block(x[s:s + chunk], K)).T
    return out[0] if single else out
