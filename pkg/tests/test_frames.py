import csv

import numpy as np
import pytest

from nilsampler import corpus, frames
from nilsampler.lie_core import SpecError
from nilsampler.orbit import orbit_data
from nilsampler.sampling import SpectralBox

BOX = SpectralBox.parse("-1/4,1/4")
UNIT = SpectralBox.parse("-1,1")


@pytest.fixture(scope="module")
def heis():
    return orbit_data(corpus.heisenberg())


@pytest.fixture(scope="module")
def pre(heis):
    return frames.establish_domain(heis, BOX, samples=20000)


@pytest.fixture(scope="module")
def ref(heis):
    return [frames.reference_function(heis, BOX, v) for v in (0, 1, 2)]


def small(od, box, variant=0):
    return frames.reference_function(od, box, variant, T=2, n_lambda=32, r=16)


# ---------------------------------------------------------------- test functions and grids


def test_bump_and_taper():
    assert frames.bump(np.array([0.0]))[0] == 1.0
    assert np.all(frames.bump(np.array([-1.0, 1.0, 2.0])) == 0)
    assert frames.cell_taper(np.array([0.5]))[0] == pytest.approx(1.0)
    assert np.all(frames.cell_taper(np.array([0.0, 1.0, -3.0])) == 0)


def test_from_callable_requires_compact_support(heis):
    with pytest.raises(SpecError, match="vanish"):
        frames.GridFunction.from_callable(heis, BOX, lambda lam, t: 1.0 + 0 * t[0], T=1, n_lambda=8, r=4)


def test_norm_is_weighted_sum(heis):
    F = small(heis, BOX)
    w = F.lambda_weights()[:, None]
    assert F.norm2() == pytest.approx(float(np.sum(w * np.abs(F.values) ** 2)) / F.r)
    assert F.norm2() > 0
    assert F.inner(F).real == pytest.approx(F.norm2())


def test_lattice_window_covers_support(heis):
    F = small(heis, BOX)
    w = frames.LatticeWindow.for_function(F, 4)
    # support [-2, 2] meets [0,1) - l for l in [-1, 2]
    assert (w.l_lo, w.l_hi) == ((-1,), (2,))
    with pytest.raises(SpecError):
        frames.LatticeWindow(-1, (0,), (0,))


# ---------------------------------------------------------------- actions


def test_sigma_action_identity_and_shift(heis):
    h = np.arange(8, dtype=complex)
    out, lo = frames.sigma_action(heis, [0.1], [0, 0], [0], h, 4, (-4,))
    assert np.array_equal(out, h) and lo == (-4,)
    out, lo = frames.sigma_action(heis, [0.1], [0, 0], [0.5], h, 4, (-4,))
    assert np.array_equal(out, h) and lo == (-2,)
    with pytest.raises(SpecError, match="aligned"):
        frames.sigma_action(heis, [0.1], [0, 0], [0.3], h, 4, (-4,))


def test_sigma_action_central_multiplier(heis):
    lam = 0.17
    h = np.ones(16, dtype=complex)
    out, _ = frames.sigma_action(heis, [lam], [1, 0], [0], h, 4, (-8,))
    assert np.allclose(out, np.exp(2j * np.pi * lam), atol=1e-14)
    # the Z2 multiplier depends on t through beta_2 = -lambda t
    out2, _ = frames.sigma_action(heis, [lam], [0, 1], [0], h, 4, (-8,))
    t = (-8 + np.arange(16) + 0.5) / 4
    assert np.allclose(out2, np.exp(-2j * np.pi * lam * t), atol=1e-13)


def test_tau_action_preserves_norm(heis):
    F = small(heis, BOX)
    for k, a in (([1, 0], [0]), ([0, 1], [0]), ([0, 0], [1]), ([2, -3], [0])):
        assert frames.tau_action(F, k, a).norm2() == pytest.approx(F.norm2(), rel=1e-12)


# ---------------------------------------------------------------- the transform


def test_j_transform_zero(heis):
    F = small(heis, BOX)
    Z = F.scale(0)
    assert not np.any(frames.j_transform(Z, k_max=4).values)


def test_j_transform_origin_entry_is_plain_integral(heis):
    F = small(heis, BOX)
    J = frames.j_transform(F, k_max=4)
    # k = 0, l = 0: integral of F over box x [0,1) against the Plancherel density
    t = F.t_axes()[0]
    cell = (t >= 0) & (t < 1)
    w = F.lambda_weights()[:, None]
    expect = np.sum(w * F.values[:, cell]) / F.r
    assert J.get([0, 0], [0]) == pytest.approx(expect, rel=1e-12, abs=1e-15)


def test_j_transform_window_too_small(heis):
    F = small(heis, BOX)
    with pytest.raises(SpecError, match="dropped"):
        frames.j_transform(F, frames.LatticeWindow(4, (0,), (0,)))


def test_nufft_matches_direct(heis):
    F = small(heis, BOX, 2)
    a = frames.j_transform(F, k_max=6).values
    b = frames.j_transform(F, k_max=6, method="direct").values
    assert np.abs(a - b).max() <= 1e-11 * np.abs(b).max()


def test_linearity_on_random_pairs(heis):
    rng = np.random.default_rng(4)
    F, G = small(heis, BOX, 0), small(heis, BOX, 2)
    for _ in range(10):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        vF = F.with_values(F.values * rng.standard_normal(F.values.shape))
        assert frames.linearity_defect(vF, G, a, b, k_max=6) < 1e-12


def test_sample_sequence_window_monotone(heis):
    J = frames.j_transform(small(heis, BOX), k_max=10)
    norms = [J.truncated(k).norm2() for k in (0, 2, 5, 10)]
    assert norms == sorted(norms)


# ---------------------------------------------------------------- isometry


def test_isometry_zero_function(heis, pre):
    rep = frames.isometry_test(small(heis, BOX).scale(0), precondition=pre, k_max=4)
    assert rep.norm_ratio == 1.0 and rep.zero_norm


def test_isometry_reference(ref, pre):
    for F in ref:
        rep = frames.isometry_test(F, precondition=pre)
        assert abs(rep.norm_ratio - 1) <= 3e-3
        assert rep.tail_estimate < 1e-4


def test_isometry_unit_box_tiling(heis):
    pre = frames.establish_domain(heis, UNIT)
    assert pre.route == "tiling"
    rep = frames.isometry_test(frames.reference_function(heis, UNIT, 0), precondition=pre)
    assert abs(rep.norm_ratio - 1) <= 5e-3


def test_isometry_refused_without_containment(heis):
    F = frames.overlap_control(heis, n_lambda=32, r=16)
    with pytest.raises(frames.ContainmentRefused):
        frames.isometry_test(F, k_max=4)


def test_negative_control_breaks_isometry(heis):
    F = frames.overlap_control(heis)
    rep = frames.isometry_test(F, force=True)
    assert rep.negative_control and rep.to_json()["domain_route"] == "forced"
    assert abs(rep.norm_ratio - 1) > 5e-2


def test_plain_bump_has_slow_tail(heis, pre):
    rep = frames.isometry_test(frames.plain_bump(heis, BOX), precondition=pre)
    assert rep.norm_ratio < 1 - 3e-3


# ---------------------------------------------------------------- intertwining


def test_intertwining_reference(heis, ref, pre):
    F = ref[0]
    JF = frames.j_transform(F)
    assert frames.intertwining_test(F, "id", precondition=pre, JF=JF).deviation == 0
    assert frames.intertwining_test(F, "A1", precondition=pre, JF=JF).deviation < 1e-6
    for g in ("Z1", "Z2"):
        rep = frames.intertwining_test(F, g, precondition=pre, JF=JF)
        assert rep.deviation < 1e-3 and rep.compared > 0


def test_parse_generator(heis):
    assert frames.parse_generator(heis, "Z2") == ([0, 1], [0])
    assert frames.parse_generator(heis, "A1") == ([0, 0], [1])
    for bad in ("A2", "Z3", "X1", "A"):
        with pytest.raises(SpecError):
            frames.parse_generator(heis, bad)
    F = small(heis, BOX)
    with pytest.raises(SpecError, match="one generator"):
        frames.intertwining_test(F, ([1, 0], [1]), k_max=2, force=True)


# ---------------------------------------------------------------- Parseval and reconstruction


def test_parseval_reference_and_consistency(ref, pre):
    for F in ref[:2]:
        par = frames.parseval_check(F, precondition=pre)
        iso = frames.isometry_test(F, precondition=pre)
        assert abs(par.frame_sum_ratio - 1) <= 5e-3
        assert abs(par.frame_sum_ratio - iso.norm_ratio) <= 2 * (5e-3 + 3e-3)


def test_parseval_zero_overlap(heis, pre):
    F = small(heis, BOX).scale(0)
    rep = frames.parseval_check(F, precondition=pre, k_max=4)
    assert rep.frame_sum_ratio == 0.0 and rep.zero_norm


@pytest.mark.slow
def test_parseval_smoothed_eta_at_doubled_resolution(heis, pre):
    F = frames.eta_hat(heis, BOX, smoothed=True, n_lambda=512, r=256)
    rep = frames.parseval_check(F, precondition=pre, k_max=96)
    assert abs(rep.frame_sum_ratio - 1) <= 1e-2


def test_reconstruct_reference(ref, pre):
    errs = [frames.reconstruct(F, precondition=pre).rel_l2_error for F in ref[:2]]
    assert max(errs) < 5e-2
    coarse = frames.reconstruct(ref[0], precondition=pre, k_max=4).rel_l2_error
    assert coarse > errs[0]


def test_reconstruct_zero(heis, pre):
    rep = frames.reconstruct(small(heis, BOX).scale(0), precondition=pre, k_max=4, keep=True)
    assert rep.zero_norm and not np.any(rep.F_tilde.values)


# ---------------------------------------------------------------- export


def test_csv_export(tmp_path, heis):
    F = frames.reference_function(heis, BOX, 0, T=1, n_lambda=4, r=2)
    F.to_csv(tmp_path / "f.csv")
    rows = list(csv.reader(open(tmp_path / "f.csv")))
    assert rows[0] == ["l1", "t1", "re", "im"] and len(rows) == 1 + 4 * 4
    J = frames.j_transform(F, k_max=1)
    J.to_csv(tmp_path / "j.csv")
    rows = list(csv.reader(open(tmp_path / "j.csv")))
    assert rows[0] == ["k1", "k2", "l1", "re", "im"]
    assert len(rows) == 1 + 9 * len(J.window.ls())
    k1, k2, l1, re, im = rows[1]
    assert complex(float(re), float(im)) == J.get([int(k1), int(k2)], [int(l1)])


# ---------------------------------------------------------------- resolution doubling


@pytest.mark.slow
def test_isometry_error_shrinks_under_doubling(heis, pre):
    for v in (0, 1, 2):
        e1 = abs(frames.isometry_test(frames.reference_function(heis, BOX, v), precondition=pre).norm_ratio - 1)
        F2 = frames.reference_function(heis, BOX, v, n_lambda=512, r=256)
        e2 = abs(frames.isometry_test(F2, precondition=pre, k_max=96).norm_ratio - 1)
        assert e2 < e1


@pytest.mark.slow
@pytest.mark.parametrize("key, base", [("heisenberg_plus_r", (16, 16, 8)), ("dim4_step3", (16, 16, 8)),
                                       ("stepk_m2", (32, 8, 8))])
def test_corpus_isometry_trend(key, base):
    od = orbit_data(corpus.get(key))
    from nilsampler.sampling import delta_bound
    box = SpectralBox.cube(delta_bound(od).exact, od.d)
    pre = frames.establish_domain(od, box, samples=20000)
    errs = []
    for s in (1, 2, 4):
        nl, r, K = (x * s for x in base)
        F = frames.reference_function(od, box, 0, T=1, n_lambda=nl, r=r)
        errs.append(abs(frames.isometry_test(F, precondition=pre, k_max=K, eps=1e-10).norm_ratio - 1))
    assert errs[0] > errs[1] > errs[2]
