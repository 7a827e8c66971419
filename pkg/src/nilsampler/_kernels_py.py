"""Pure numpy versions of the spreading/interpolation kernels."""
import numpy as np

_CHUNK_TAPS = 1 << 22  # (points x taps) handled per chunk


def _taps(x, G, w, sig2):
    # per-axis weights and wrapped indices, shapes (n, p, 2w)
    g = x * G
    m0 = np.floor(g).astype(np.int64) - w + 1
    j = np.arange(2 * w)
    m = m0[..., None] + j
    d = m - g[..., None]
    wt = np.exp(-d * d / (2.0 * sig2))
    return wt, np.mod(m, G)


def _flat(wt, idx, G):
    n, p, q = wt.shape
    W = wt[:, 0, :]
    I = idx[:, 0, :]
    for a in range(1, p):
        W = (W[:, :, None] * wt[:, a, None, :]).reshape(n, -1)
        I = (I[:, :, None] * G + idx[:, a, None, :]).reshape(n, -1)
    return W, I


def _chunks(N, p, w):
    step = max(1, _CHUNK_TAPS // (2 * w) ** p)
    return range(0, N, step), step


def spread(x, c, G, w, sig2, grid):
    N, p = x.shape
    size = grid.shape[1]
    starts, step = _chunks(N, p, w)
    for s in starts:
        W, I = _flat(*_taps(x[s:s + step], G, w, sig2), G)
        flatI = I.ravel()
        for l in range(c.shape[0]):
            v = W * c[l, s:s + step, None]
            grid[l] += np.bincount(flatI, weights=v.real.ravel(), minlength=size)
            grid[l] += 1j * np.bincount(flatI, weights=v.imag.ravel(), minlength=size)


def interp(x, grid, G, w, sig2, out):
    N, p = x.shape
    starts, step = _chunks(N, p, w)
    for s in starts:
        W, I = _flat(*_taps(x[s:s + step], G, w, sig2), G)
        for l in range(grid.shape[0]):
            out[l, s:s + step] = (W * grid[l][I]).sum(axis=1)
