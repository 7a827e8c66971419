"""Bandwidth bound, fundamental-domain containment/tiling and dilated lattices."""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from ._parallel import map_ordered
from .lie_core import AlgebraSpec, SpecError, bracket
from .orbit import OrbitData
from .poly import Poly, PolyMatrix, as_rational, frac_str, rational_det

DEFAULT_SEED = 0xC0FFEE
MC_TASKS = 16  # fixed task count keeps Monte Carlo streams independent of thread count


# ---------------------------------------------------------------- boxes


@dataclass(frozen=True)
class SpectralBox:
    """Product of intervals over the free coordinates; open unless ``closed``."""

    intervals: tuple
    closed: bool = False

    def __post_init__(self):
        ivs = []
        for lo, hi in self.intervals:
            lo, hi = _endpoint(lo), _endpoint(hi)
            if lo > hi:
                raise SpecError(f"interval ({lo}, {hi}) has lo > hi")
            ivs.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def parse(cls, text: str) -> "SpectralBox":
        """'lo,hi' per axis, axes separated by ';' or given as a flat even list."""
        text = text.strip()
        if not text:
            raise SpecError("empty box specification")
        groups = [g for g in re.split(r"[;\s]+", text) if g]
        vals: list = []
        for g in groups:
            vals.extend(x for x in g.split(",") if x != "")
        if len(vals) % 2:
            raise SpecError(f"box needs an even number of endpoints, got {len(vals)}")
        try:
            nums = [_endpoint(v) for v in vals]
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"cannot parse box {text!r}") from None
        return cls(tuple((nums[2 * i], nums[2 * i + 1]) for i in range(len(nums) // 2)))

    @classmethod
    def cube(cls, eps, d: int) -> "SpectralBox":
        eps = as_rational(eps)
        return cls(tuple((-eps, eps) for _ in range(d)))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lo(self) -> np.ndarray:
        return np.array([float(a) for a, _ in self.intervals])

    @property
    def hi(self) -> np.ndarray:
        return np.array([float(b) for _, b in self.intervals])

    def volume(self) -> Fraction:
        v = Fraction(1)
        for a, b in self.intervals:
            v *= b - a
        return v

    def is_empty(self) -> bool:
        return any(a == b for a, b in self.intervals)

    def radius(self) -> Fraction:
        return max((max(abs(a), abs(b)) for a, b in self.intervals), default=Fraction(0))

    def scaled(self, c) -> "SpectralBox":
        c = as_rational(c)
        return SpectralBox(tuple((a * c, b * c) for a, b in self.intervals), self.closed)

    def to_json(self) -> list:
        return [[frac_str(a), frac_str(b)] for a, b in self.intervals]


def _endpoint(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        x = x.strip()
        if x.lower() in ("inf", "+inf", "-inf", "infinity", "-infinity", "nan"):
            raise SpecError("box must be bounded")
        return Fraction(x)
    if isinstance(x, float) and not np.isfinite(x):
        raise SpecError("box must be bounded")
    return as_rational(x)


def check_box(od: OrbitData, box: SpectralBox) -> None:
    if box.dim != od.d:
        raise SpecError(f"box has {box.dim} axes but the cross-section has {od.d} free coordinates")


# ---------------------------------------------------------------- sup norm


@dataclass
class NormBound:
    lower: float
    upper: float
    exact: Fraction | None = None
    converged: bool = True
    argmax: tuple | None = None
    boxes: int = 0
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": frac_str(self.exact) if self.exact is not None else None,
            "converged": self.converged,
            "argmax": [frac_str(x) for x in self.argmax] if self.argmax else None,
            "boxes": self.boxes,
            "diagnostics": self.diagnostics,
        }


class _EntryBound:
    """Exact range enclosure of one polynomial over sub-boxes of [0,1]^m."""

    def __init__(self, q: Poly):
        self.q = q
        self.pos, self.neg = q.split_signs()
        self.derivs = [d.split_signs() for d in (q.diff(i) for i in range(q.nvars))]

    @staticmethod
    def _mono(pos: Poly, neg: Poly, a, b):
        return pos.eval(a) - neg.eval(b), pos.eval(b) - neg.eval(a)

    def range(self, a, b):
        if not self.q.terms:
            return Fraction(0), Fraction(0)
        lo, hi = self._mono(self.pos, self.neg, a, b)
        if self.q.degree() < 2:
            return lo, hi
        # monotone in every variable on the box: the range is attained at corners
        dr = [self._mono(dp, dn, a, b) for dp, dn in self.derivs]
        if all(dlo >= 0 or dhi <= 0 for dlo, dhi in dr):
            vmin = [x if dlo >= 0 else y for (dlo, _), x, y in zip(dr, a, b)]
            vmax = [y if dlo >= 0 else x for (dlo, _), x, y in zip(dr, a, b)]
            return self.q.eval(vmin), self.q.eval(vmax)
        # centered (mean value) form, second order near interior extrema
        c = [(x + y) / 2 for x, y in zip(a, b)]
        qc = self.q.eval(c)
        rad = sum((max(abs(dlo), abs(dhi)) * (y - x) / 2 for (dlo, dhi), x, y in zip(dr, a, b)), Fraction(0))
        return max(lo, qc - rad), min(hi, qc + rad)


class _RowBound:
    """Upper bound of sum_j |q_j| over a box; on boxes where every entry keeps
    one sign the row is a single polynomial and gets its own tight enclosure."""

    def __init__(self, row):
        self.entries = [_EntryBound(q) for q in row]
        self._signed: dict = {}

    def upper(self, a, b):
        ranges = [eb.range(a, b) for eb in self.entries]
        loose = sum((max(abs(lo), abs(hi)) for lo, hi in ranges), Fraction(0))
        signs = []
        for lo, hi in ranges:
            if lo >= 0:
                signs.append(1)
            elif hi <= 0:
                signs.append(-1)
            else:
                return loose
        key = tuple(signs)
        if key not in self._signed:
            nv = self.entries[0].q.nvars
            R = Poly(nv)
            for sgn, eb in zip(signs, self.entries):
                R = R + eb.q * sgn
            self._signed[key] = _EntryBound(R)
        return min(loose, self._signed[key].range(a, b)[1])


def _row_norm_exact(P: PolyMatrix, s) -> Fraction:
    return max(sum((abs(P[i, j].eval(s)) for j in range(P.cols)), Fraction(0)) for i in range(P.rows))


def _norm_grid(P: PolyMatrix, n: int):
    m = P.nvars
    axes = [np.linspace(0.0, 1.0, n + 1)] * m
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = P.eval_float(mesh)
    norms = np.abs(vals).sum(axis=-1).max(axis=-1)
    idx = np.unravel_index(int(np.argmax(norms)), norms.shape)
    point = tuple(Fraction(int(i), n) for i in idx)
    return float(norms.max()), point


def sup_inf_norm(P: PolyMatrix, tol: float = 1e-9, max_boxes: int = 20000,
                 grid_rounds: int = 6) -> NormBound:
    """Enclose sup over [0,1]^m of the max-row-sum norm of a polynomial matrix."""
    if not tol > 0:
        raise SpecError("tol must be positive")
    m = P.nvars
    if m == 0:
        v = _row_norm_exact(P, ())
        return NormBound(float(v), float(v), v, True, ())
    rows = [_RowBound([P[i, j] for j in range(P.cols)]) for i in range(P.rows)]

    def upper(a, b):
        return max(r.upper(a, b) for r in rows)

    best_low, best_pt = Fraction(-1), None

    def probe(pt):
        nonlocal best_low, best_pt
        v = _row_norm_exact(P, pt)
        if v > best_low:
            best_low, best_pt = v, tuple(pt)

    for corner in product((Fraction(0), Fraction(1)), repeat=m):
        probe(corner)
    zero, one = (Fraction(0),) * m, (Fraction(1),) * m
    root_up = upper(zero, one)
    diags = []
    # grid lower bound, doubling per axis (point count capped)
    n = 8
    for _ in range(grid_rounds):
        if root_up - best_low <= tol or (n + 1) ** m > 2**17:
            break
        _, pt = _norm_grid(P, n)
        probe(pt)
        n *= 2
    heap = [(-root_up, 0, zero, one)]
    counter = 1
    boxes = 1
    while heap:
        neg_up, _, a, b = heap[0]
        up = -neg_up
        if up <= best_low or up - best_low <= Fraction(tol):
            break
        if boxes >= max_boxes:
            diags.append(f"box budget {max_boxes} exhausted")
            break
        heapq.heappop(heap)
        k = max(range(m), key=lambda i: b[i] - a[i])
        mid = (a[k] + b[k]) / 2
        for lo_k, hi_k in ((a[k], mid), (mid, b[k])):
            a2 = tuple(lo_k if i == k else a[i] for i in range(m))
            b2 = tuple(hi_k if i == k else b[i] for i in range(m))
            probe(tuple((x + y) / 2 for x, y in zip(a2, b2)))
            probe(a2)
            probe(b2)
            u = upper(a2, b2)
            boxes += 1
            if u > best_low:
                heapq.heappush(heap, (-u, counter, a2, b2))
                counter += 1
    up = -heap[0][0] if heap else best_low
    up = max(up, best_low)
    exact = best_low if up == best_low else None
    conv = float(up - best_low) <= tol
    return NormBound(float(best_low), float(up), exact, conv, best_pt, boxes, diags)


@dataclass
class DeltaReport:
    sup: NormBound
    delta_lower: float
    delta_upper: float
    exact: Fraction | None
    empirical_epsilon: float

    def to_json(self) -> dict:
        return {
            "delta": frac_str(self.exact) if self.exact is not None else None,
            "delta_lower": self.delta_lower,
            "delta_upper": self.delta_upper,
            "delta_float": float(self.exact) if self.exact is not None else None,
            "sup_norm": self.sup.to_json(),
            "empirical_epsilon": self.empirical_epsilon,
            "empirical_epsilon_note": "diagnostic only: largest grid epsilon (step 1/1000) with image inside (-1/2,1/2)^p",
        }


def delta_bound(od: OrbitData, tol: float = 1e-9) -> DeltaReport:
    nb = sup_inf_norm(od.P, tol)
    exact = Fraction(1) / (2 * nb.exact) if nb.exact is not None else None
    return DeltaReport(nb, 1 / (2 * nb.upper), 1 / (2 * nb.lower), exact, _empirical_epsilon(od))


def _empirical_epsilon(od: OrbitData, n: int = 50) -> float:
    # beta is linear in the free coordinates, so the worst f over a cube is a corner:
    # the relevant norm only sees the free columns of P(A(t))
    m = od.m
    pts = max(2, min(n, int(round(2e5 ** (1 / m)))))
    mesh = np.meshgrid(*([np.linspace(0, 1, pts)] * m), indexing="ij")
    vals = od.P.eval_float(mesh)[..., :, list(od.free0)]
    S = float(np.abs(vals).sum(axis=-1).max())
    return min(1.0, np.floor(1000 / (2 * S)) / 1000)


# ---------------------------------------------------------------- measures


def _shifted(P: Poly, a, b) -> Poly:
    """Q(u) = P(a + (b - a) u) on the unit cube."""
    nv = P.nvars
    return P.compose([Poly(nv, {tuple(int(i == k) for i in range(nv)): b[k] - a[k]}) + a[k] for k in range(nv)])


def _unit_integral(Q: Poly) -> Fraction:
    total = Fraction(0)
    for e, c in Q.terms.items():
        v = c
        for k in e:
            v /= k + 1
        total += v
    return total


def _gl_abs(Q: Poly, order: int = 24) -> float:
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = (x + 1) / 2, w / 2
    d = Q.nvars
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    W = np.ones([order] * d)
    for k in range(d):
        shape = [1] * d
        shape[k] = order
        W = W * w.reshape(shape)
    return float((np.abs(Q.eval_float(mesh)) * W).sum())


def _orthant_sign(P: Poly, a, b) -> int:
    """+1/-1 when every monomial has the same sign on a box inside one closed orthant."""
    signs = set()
    for lo, hi in zip(a, b):
        if lo < 0 < hi:
            return 0
    for e, c in P.terms.items():
        s = 1 if c > 0 else -1
        for k, ek in enumerate(e):
            if ek % 2 and b[k] <= 0:
                s = -s
        signs.add(s)
    return signs.pop() if len(signs) == 1 else 0


def integrate_abs_poly(P: Poly, box: SpectralBox, max_depth: int = 10):
    """Integral of |P| over the box: exact rational when a sign-constant
    decomposition is found, otherwise Gauss-Legendre on undecided pieces."""
    if box.is_empty():
        return 0.0, Fraction(0)
    d = P.nvars
    if d == 0:
        v = abs(P.constant_term())
        return float(v), v
    # split at coordinate zeros first
    pieces = [[]]
    for a, b in box.intervals:
        parts = [(a, Fraction(0)), (Fraction(0), b)] if a < 0 < b else [(a, b)]
        pieces = [pc + [iv] for pc in pieces for iv in parts]
    exact_total = Fraction(0)
    float_extra = 0.0
    decided = True
    stack = [(tuple(x for x, _ in pc), tuple(y for _, y in pc), 0) for pc in pieces]
    while stack:
        a, b, depth = stack.pop()
        vol = Fraction(1)
        for x, y in zip(a, b):
            vol *= y - x
        Q = _shifted(P, a, b)
        if _orthant_sign(P, a, b) != 0:
            exact_total += abs(_unit_integral(Q)) * vol
            continue
        pos, neg = Q.split_signs()
        one, zero = (Fraction(1),) * d, (Fraction(0),) * d
        lo = pos.eval(zero) - neg.eval(one)
        hi = pos.eval(one) - neg.eval(zero)
        if lo >= 0 or hi <= 0:
            exact_total += abs(_unit_integral(Q)) * vol
            continue
        if depth >= max_depth:
            decided = False
            float_extra += _gl_abs(Q) * float(vol)
            continue
        k = max(range(d), key=lambda i: b[i] - a[i])
        mid = (a[k] + b[k]) / 2
        stack.append((a, tuple(mid if i == k else b[i] for i in range(d)), depth + 1))
        stack.append((tuple(mid if i == k else a[i] for i in range(d)), b, depth + 1))
    value = float(exact_total) + float_extra
    return value, (exact_total if decided else None)


def image_measure_quadrature(od: OrbitData, box: SpectralBox, order: int | None = None) -> float:
    """Integral of |det J_beta(lambda, t)| over box x [0,1]^m from the float
    Jacobian matrix (independent of the symbolic determinant)."""
    if box.is_empty():
        return 0.0
    d, m = od.d, od.m
    if order is None:
        order = max(4, min(16, int(2e6 ** (1 / (d + m)) / 2)))
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = (x + 1) / 2, w / 2
    axes_nodes, axes_w = [], []
    for a, b in box.intervals:
        a, b = float(a), float(b)
        cuts = [a, 0.0, b] if a < 0 < b else [a, b]
        nodes = np.concatenate([lo + (hi - lo) * x for lo, hi in zip(cuts, cuts[1:])])
        wts = np.concatenate([(hi - lo) * w for lo, hi in zip(cuts, cuts[1:])])
        axes_nodes.append(nodes)
        axes_w.append(wts)
    for _ in range(m):
        axes_nodes.append(x)
        axes_w.append(w)
    mesh = np.meshgrid(*axes_nodes, indexing="ij")
    J = od.jacobian.eval_float(mesh)
    dets = np.abs(np.linalg.det(J))
    W = np.ones(dets.shape)
    for k, wk in enumerate(axes_w):
        shape = [1] * len(axes_w)
        shape[k] = len(wk)
        W = W * wk.reshape(shape)
    return float((dets * W).sum())


# ---------------------------------------------------------------- Monte Carlo


def _mc_chunks(samples: int, seed: int):
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(MC_TASKS)
    base, extra = divmod(samples, MC_TASKS)
    return [(children[i], base + (i < extra)) for i in range(MC_TASKS)]


def _mc_sample(od: OrbitData, box: SpectralBox, samples: int, seed: int):
    """Uniform (sigma, t) in box x [0,1)^m, reproducible for any thread count.

    Unit-cube variates are drawn first and mapped affinely into the box, so nested
    boxes sharing a center reuse the same relative sample positions."""
    lo, hi = box.lo, box.hi

    def task(arg):
        child, n = arg
        rng = np.random.default_rng(child)
        u = rng.random((n, od.d))
        t = rng.random((n, od.m))
        sigma = lo + (hi - lo) * u
        beta = od.beta_float([sigma[:, a] for a in range(od.d)], [t[:, k] for k in range(od.m)])
        return sigma, t, beta

    parts = map_ordered(task, _mc_chunks(samples, seed))
    sigma = np.concatenate([p[0] for p in parts])
    t = np.concatenate([p[1] for p in parts])
    beta = np.concatenate([p[2] for p in parts])
    return sigma, t, beta


@dataclass
class DomainCheck:
    contained: bool
    mu_measure: float
    lebesgue_measure_of_image: float
    collision_rate: float | None
    samples_used: int
    tier: str = ""
    mu_exact: Fraction | None = None
    max_abs_image: float | None = None
    witness: tuple | None = None
    tiling: bool | None = None
    mc_measure: float | None = None
    mc_measure_stderr: float | None = None
    mesh_cells: int | None = None
    delta: Fraction | float | None = None
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "contained": self.contained,
            "tier": self.tier,
            "mu_measure": self.mu_measure,
            "mu_measure_exact": frac_str(self.mu_exact) if self.mu_exact is not None else None,
            "lebesgue_measure_of_image": self.lebesgue_measure_of_image,
            "quadrature_tol": 1e-6,
            "samples_used": self.samples_used,
            "max_abs_image": self.max_abs_image,
            "witness": list(self.witness) if self.witness else None,
            "diagnostics": self.diagnostics,
        }
        if self.delta is not None:
            out["delta"] = frac_str(self.delta) if isinstance(self.delta, Fraction) else self.delta
        if self.tiling is not None:
            out.update(
                tiling=self.tiling,
                collision_rate=self.collision_rate,
                mc_measure=self.mc_measure,
                mc_measure_stderr=self.mc_measure_stderr,
                mesh_cells=self.mesh_cells,
                thresholds={"measure": 5e-3, "collision_rate": 1e-2},
            )
        return out


def check_containment(od: OrbitData, box: SpectralBox, samples: int = 100_000,
                      seed: int = DEFAULT_SEED, delta: DeltaReport | None = None) -> DomainCheck:
    check_box(od, box)
    if delta is None:
        delta = delta_bound(od)
    diags = []
    r = box.radius()
    if delta.exact is not None:
        tier_i = r < delta.exact or (r == delta.exact and not box.closed)
    else:
        tier_i = float(r) < delta.delta_lower
    mu_float, mu_exact = integrate_abs_poly(od.density, box)
    leb = image_measure_quadrature(od, box)
    if box.is_empty():
        return DomainCheck(True, 0.0, 0.0, None, 0, "empty", Fraction(0), 0.0,
                           delta=delta.exact if delta.exact is not None else delta.delta_lower,
                           diagnostics=["empty box"])
    sigma, t, beta = _mc_sample(od, box, samples, seed)
    absb = np.abs(beta).max(axis=1)
    inside = absb < 0.5
    max_abs = float(absb.max()) if len(absb) else 0.0
    witness = None
    if not inside.all():
        i = int(np.argmax(~inside))
        witness = tuple(float(x) for x in np.concatenate([sigma[i], t[i], beta[i]]))
        diags.append("Monte Carlo found image points outside (-1/2,1/2)^p (witness = sigma, t, beta)")
    if tier_i:
        tier = "rigorous"
        contained = True
        if witness is not None:
            diags.append("inconsistent: rigorous tier holds but a sample escaped")
    else:
        contained = bool(inside.all())
        tier = "empirical" if contained else "violated"
    return DomainCheck(contained, mu_float, leb, None, int(len(absb)), tier, mu_exact, max_abs, witness,
                       delta=delta.exact if delta.exact is not None else delta.delta_lower,
                       diagnostics=diags)


def collision_rate(od: OrbitData, box: SpectralBox, samples: int = 100_000, seed: int = DEFAULT_SEED,
                   mesh: int = 64):
    """Overlap of the image mod Z^p, as a fraction of the image measure.

    Each sample carries weight vol(box)|det J|/N (the image measure it represents);
    a mesh cell hit by several integer translates (labels) contributes the weight
    it holds beyond its own area."""
    p = od.p
    per_axis = mesh
    while per_axis ** p > 2**24:
        per_axis //= 2
    sigma, t, beta = _mc_sample(od, box, samples, seed)
    vol = float(box.volume())
    w = vol * od.density_float([sigma[:, a] for a in range(od.d)]) / max(len(sigma), 1)
    fl = np.floor(beta).astype(np.int64)
    red = beta - fl
    cell_idx = np.minimum((red * per_axis).astype(np.int64), per_axis - 1)
    cell = np.ravel_multi_index(tuple(cell_idx.T), (per_axis,) * p)
    _, label = np.unique(fl, axis=0, return_inverse=True)
    label = label.reshape(-1)
    pair = cell * (label.max() + 1 if len(label) else 1) + label
    upair, pinv = np.unique(pair, return_inverse=True)
    ucell = upair // (label.max() + 1 if len(label) else 1)
    labels_per_cell = np.bincount(ucell, minlength=per_axis**p)
    wcell = np.bincount(cell, weights=w, minlength=per_axis**p)
    area = 1.0 / per_axis**p
    mixed = labels_per_cell >= 2
    overlap = float(np.clip(wcell[mixed] - area, 0, None).sum())
    total = float(w.sum())
    se = float(np.std(w * len(w), ddof=1) / np.sqrt(len(w))) if len(w) > 1 else 0.0
    rate = overlap / total if total > 0 else 0.0
    return rate, total, se, per_axis**p, len(w)


def check_tiling(od: OrbitData, box: SpectralBox, samples: int = 100_000, seed: int = DEFAULT_SEED,
                 mesh: int = 64) -> DomainCheck:
    check_box(od, box)
    mu_float, mu_exact = integrate_abs_poly(od.density, box)
    leb = image_measure_quadrature(od, box)
    if box.is_empty():
        return DomainCheck(False, 0.0, 0.0, 0.0, 0, "empty", Fraction(0), tiling=False,
                           mc_measure=0.0, mc_measure_stderr=0.0, diagnostics=["empty box"])
    rate, mc, se, cells, n = collision_rate(od, box, samples, seed, mesh)
    measure = float(mu_exact) if mu_exact is not None else mu_float
    tiling = abs(measure - 1) < 5e-3 and rate < 1e-2
    diags = []
    if cells < 64 ** od.p:
        diags.append(f"coarse collision mesh ({cells} cells) for p={od.p}")
    return DomainCheck(False, mu_float, leb, rate, n, "tiling", mu_exact, tiling=tiling,
                       mc_measure=mc, mc_measure_stderr=se, mesh_cells=cells, diagnostics=diags)


# ---------------------------------------------------------------- dilations


@dataclass
class DilationReport:
    accepted: bool
    generators: dict
    violation: tuple | None
    diagnostics: list

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "generators": {k: [frac_str(x) for x in v] for k, v in self.generators.items()},
            "violation": list(self.violation) if self.violation else None,
            "diagnostics": self.diagnostics,
        }


def dilate_sampling_set(spec: AlgebraSpec, alpha: Sequence[Sequence]) -> DilationReport:
    """alpha acts on coefficient vectors; column i is the image of X_i."""
    n = spec.n
    A = [[as_rational(x) for x in row] for row in alpha]
    if len(A) != n or any(len(r) != n for r in A):
        raise SpecError(f"alpha must be {n}x{n}")
    labels = spec.labels

    def apply(v):
        return tuple(sum((A[i][j] * v[j] for j in range(n)), Fraction(0)) for i in range(n))

    images = [apply(spec.basis(i)) for i in range(n)]
    gens = {labels[i]: images[i] for i in range(n)}
    if rational_det(A) == 0:
        return DilationReport(False, gens, None, ["alpha is singular"])
    for i in range(n):
        for j in range(i + 1, n):
            lhs = bracket(spec, images[i], images[j])
            rhs = apply(spec.structure(i, j))
            if lhs != rhs:
                return DilationReport(
                    False, gens, (i + 1, j + 1),
                    [f"[alpha {labels[i]}, alpha {labels[j]}] != alpha [{labels[i]}, {labels[j]}]"],
                )
    return DilationReport(True, gens, None, [])
