import itertools

import numpy as np
import pytest

from depmeter import indep_measures as im
from depmeter import _kernels
from depmeter.core import GroupSpec, MeasureId, pairwise_distances
from depmeter.errors import CapabilityError, DegenerateBlock
from depmeter.registry import evaluate

from conftest import gaussian
from oracles import ball_brute, bd_brute, cvm_grid, dcov_brute, instances, mdd_brute


def perm_null(stat, x, blocks=None, reps=200, seed=0):
    """Statistic on data whose blocks are independently row-shuffled."""
    r = np.random.default_rng(seed)
    blocks = blocks or [[c] for c in range(x.shape[1])]
    out = []
    for _ in range(reps):
        y = x.copy()
        for b in blocks[1:]:
            y[:, b] = x[r.permutation(x.shape[0])][:, b]
        out.append(stat(y))
    return np.array(out)


def in_band(value, null):
    return np.quantile(null, 0.005) <= value <= np.quantile(null, 0.995)


# ---------------------------------------------------------------- Kendall / Hoeffding

def test_ktau_identity():
    x = np.random.default_rng(0).normal(size=50)
    assert im.kendall_tau(np.column_stack([x, x])).value == 1.0


def test_ktau_gaussian():
    assert abs(im.kendall_tau(gaussian(2000, 0.5, 1)).value - 1 / 3) <= 0.04


def test_ktau_null():
    assert abs(im.kendall_tau(gaussian(800, 0.0, 2)).value) <= 0.07


def test_ktau_brute_force():
    r = np.random.default_rng(3)
    x, y = r.integers(0, 5, 25).astype(float), r.integers(0, 5, 25).astype(float)
    s = sum(np.sign(x[i] - x[j]) * np.sign(y[i] - y[j])
            for i, j in itertools.combinations(range(25), 2))
    assert im.kendall_tau_value(x, y) == pytest.approx(s / 300, abs=1e-15)


def test_hoeffding_identity():
    x = np.random.default_rng(4).random(2000)
    assert abs(im.hoeffding_d(np.column_stack([x, x])).value - 1 / 30) <= 0.003


def test_hoeffding_null():
    assert abs(im.hoeffding_d(gaussian(800, 0.0, 5)).value) <= 0.002


# ---------------------------------------------------------------- Bergsma-Dassios


@pytest.mark.parametrize("seed", range(50))
def test_bd_exact_matches_brute(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(4, 9))
    x = r.integers(0, 6, n).astype(float)
    y = x + r.integers(-2, 3, n) if seed % 2 else r.integers(0, 6, n).astype(float)
    assert im.bergsma_dassios_exact(x, y) == pytest.approx(bd_brute(x, y), abs=1e-12)


def test_bd_tiny_incomplete():
    r = np.random.default_rng(6)
    x = r.normal(size=6)
    y = x + r.normal(size=6)
    exact = bd_brute(x, y)
    assert abs(im.bergsma_dassios_value(x, y, m=1_000_000, seed=1) - exact) <= 0.005


def test_bd_comonotone():
    x = np.random.default_rng(7).random(30)
    exact = im.bergsma_dassios_exact(x, x)
    assert abs(im.bergsma_dassios_value(x, x, seed=2) - exact) <= 0.02
    big = np.random.default_rng(8).random(800)
    v = im.bergsma_dassios(np.column_stack([big, big])).value
    assert 0.4 <= v <= 2 / 3


def test_bd_null():
    assert abs(im.bergsma_dassios(gaussian(800, 0.0, 9)).value) <= 0.01


# ---------------------------------------------------------------- HHG


def test_hhg_tables_exact():
    for x, y in instances(50, 60, 10):
        dx, dy = pairwise_distances(x), pairwise_distances(y)
        ref = im.hhg_tables_reference(dx, dy)
        axy, ax, ay = _kernels.dominance_counts(dx, dy)
        n = dx.shape[0]
        off = ~np.eye(n, dtype=bool)
        a11 = axy - 2
        assert np.array_equal(a11[off], ref[..., 0][off])
        assert np.array_equal((ax - 2 - a11)[off], ref[..., 1][off])
        assert np.array_equal((ay - 2 - a11)[off], ref[..., 2][off])


@pytest.mark.parametrize("score", ["chisq", "lr"])
def test_hhg_fast_path_matches_reference(score):
    p = im.HHGParams(score)
    for x, y in list(instances(47, 60, 11)) + list(instances(3, 120, 12)):
        dx, dy = pairwise_distances(x), pairwise_distances(y)
        ref = im.hhg_reference(dx, dy, p)
        assert im.hhg_value(dx, dy, p) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        pts = im.hhg(np.column_stack([x, y]), p,
                     groups=GroupSpec.of(range(x.shape[1]), [x.shape[1]])).value
        assert pts == pytest.approx(ref, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("score", ["chisq", "lr"])
def test_hhg_null_and_alternative(score):
    p = im.HHGParams(score)
    x = np.random.default_rng(13).normal(size=(200, 2))
    stat = lambda d: im.hhg(d, p).value
    assert in_band(stat(x), perm_null(stat, x))
    alt = np.column_stack([x[:, 0], x[:, 0]])
    assert stat(alt) > np.quantile(perm_null(stat, alt, reps=200), 0.99)


# ---------------------------------------------------------------- Ball covariance


@pytest.mark.parametrize("seed", range(50))
def test_ball_matches_triple_loop(seed):
    r = np.random.default_rng(100 + seed)
    n = int(r.integers(5, 21))
    x = r.normal(size=(n, 2))
    y = (x[:, :1] + r.integers(0, 3, (n, 1))) if seed % 2 else r.normal(size=(n, 1))
    ref = ball_brute(x, y)
    d = np.column_stack([x, y])
    g = GroupSpec.of((0, 1), (2,))
    assert im.ball_cov(d, g).value == pytest.approx(ref, rel=1e-12, abs=1e-15)
    assert im.ball_cov_value([pairwise_distances(x), pairwise_distances(y)]) == pytest.approx(
        ref, rel=1e-12, abs=1e-15)


def test_ball_three_blocks_reduces_to_product():
    x = np.random.default_rng(14).normal(size=(15, 3))
    d = [pairwise_distances(x[:, [c]]) for c in range(3)]
    n = 15
    ref = 0.0
    for i in range(n):
        for j in range(n):
            ins = [d[b][i] <= d[b][i, j] for b in range(3)]
            joint = np.mean(ins[0] & ins[1] & ins[2])
            ref += (joint - np.prod([v.mean() for v in ins])) ** 2
    assert im.ball_cov_value(d) == pytest.approx(ref / n ** 2, rel=1e-12)


def test_ball_null_and_alternative():
    x = np.random.default_rng(15).normal(size=(400, 2))
    stat = lambda d: im.ball_cov(d).value
    assert in_band(stat(x), perm_null(stat, x))
    alt = np.column_stack([x[:, 0], x[:, 0]])
    assert stat(alt) > np.quantile(perm_null(stat, alt), 0.99)


# ---------------------------------------------------------------- BET

def test_bet_null_bound():
    n, depth = 800, 3
    bound = np.sqrt(n * 2 * np.log(2 * (2 ** depth - 1) ** 2 / 0.01)) / n
    vals = [im.bet(np.random.default_rng(s).random((n, 2))).value for s in range(100)]
    assert sum(v > bound for v in vals) <= 2


def test_bet_identity():
    x = np.random.default_rng(16).random(800)
    assert im.bet(np.column_stack([x, x])).value >= 0.9


def test_bet_finer_scale_dependence():
    r = np.random.default_rng(17)
    x = r.random(800)
    # a quarter-turn shift leaves the first binary digits unrelated
    d = np.column_stack([x, (x + 0.25) % 1.0])
    stat1 = lambda v: im.bet(v, im.BetParams(1)).value
    stat2 = lambda v: im.bet(v, im.BetParams(2)).value
    assert in_band(stat1(d), perm_null(stat1, d))
    assert stat2(d) > 5 * np.quantile(perm_null(stat2, d), 0.99)


# ---------------------------------------------------------------- QAD

def test_qad_product_checkerboard_is_zero():
    N = 4
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    # one point per cell of the 4 x 4 grid
    x = (N * i + j).ravel().astype(float)
    y = (N * j + i).ravel().astype(float)
    res = im.qad_zeta(np.column_stack([x, y]), im.CheckerboardParams(N))
    assert abs(res.value) < 1e-12 and abs(res.params["zeta_yx"]) < 1e-12


def test_qad_identity():
    x = np.random.default_rng(18).random(800)
    res = im.qad_zeta(np.column_stack([x, x]))
    assert res.params["resolution"] == 28
    assert res.value >= 0.85


def test_qad_asymmetric():
    x = np.random.default_rng(19).uniform(-1, 1, 800)
    res = im.qad_zeta(np.column_stack([x, x ** 2]))
    assert res.value > res.params["zeta_yx"]


def test_abs_integral_linear():
    f0, f1 = np.array([1.0, -1.0, 2.0]), np.array([-1.0, -3.0, 2.0])
    np.testing.assert_allclose(im._abs_integral_linear(f0, f1, 1.0), [0.5, 2.0, 2.0])


# ---------------------------------------------------------------- product-copula CvM

def test_cvm_matches_grid_integration():
    r = np.random.default_rng(20)
    x = r.normal(size=(50, 2))
    x[:, 1] += x[:, 0]
    assert abs(im.cvm_product_copula(x).value - cvm_grid(x)) <= 1e-3


def test_cvm_null_and_trivariate_alternative():
    x = np.random.default_rng(21).normal(size=(800, 2))
    stat = lambda d: im.cvm_product_copula(d).value
    v = stat(x)
    assert 0 < v < np.quantile(perm_null(stat, x), 0.99)
    z = np.random.default_rng(22).normal(size=300)
    alt = np.column_stack([z, z ** 3, np.exp(z)])
    assert stat(alt) > np.quantile(perm_null(stat, alt), 0.99)


# ---------------------------------------------------------------- subcopula

def test_subcop_extremes():
    x = np.random.default_rng(23).random(800)
    assert im.subcop_measure(np.column_stack([x, x])).value == pytest.approx(0.25, abs=0.01)
    assert im.subcop_measure(np.column_stack([x, -x])).value == pytest.approx(-0.25, abs=0.01)
    assert abs(im.subcop_measure(gaussian(800, 0.0, 24)).value) <= 0.05


def test_subcop_3d_matches_brute():
    r = np.random.default_rng(25)
    x = r.integers(0, 6, (40, 3)).astype(float)
    best_hi, best_lo = -np.inf, -np.inf
    vals = [np.unique(x[:, c]) for c in range(3)]
    for a in vals[0]:
        for b in vals[1]:
            for c in vals[2]:
                s = np.mean((x[:, 0] <= a) & (x[:, 1] <= b) & (x[:, 2] <= c))
                p = np.mean(x[:, 0] <= a) * np.mean(x[:, 1] <= b) * np.mean(x[:, 2] <= c)
                best_hi, best_lo = max(best_hi, s - p), max(best_lo, p - s)
    assert im.subcop_value(x) == pytest.approx(best_hi - best_lo, abs=1e-12)


def test_subcop_rejects_four_columns():
    with pytest.raises(CapabilityError):
        im.subcop_measure(np.random.default_rng(0).normal(size=(20, 4)))


# ---------------------------------------------------------------- CODEC xi

def test_codec_hand_value():
    assert im.codec_xi(np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])).value == 0.25


def test_codec_null():
    assert abs(im.codec_xi(gaussian(800, 0.0, 26)).value) <= 0.07


def test_codec_function():
    x = np.random.default_rng(27).normal(size=5000)
    assert im.codec_xi(np.column_stack([x, x ** 2])).value >= 0.95


# ---------------------------------------------------------------- distance covariance


@pytest.mark.parametrize("seed", range(50))
def test_dcov_matches_four_loop(seed):
    r = np.random.default_rng(200 + seed)
    x = r.normal(size=(15, 2))
    y = x[:, :1] * r.normal(size=(15, 1))
    d = np.column_stack([x, y])
    g = GroupSpec.of((0, 1), (2,))
    assert im.dcov(d, g) == pytest.approx(dcov_brute(x, y), rel=1e-12)
    ref = dcov_brute(x, y) / np.sqrt(dcov_brute(x, x) * dcov_brute(y, y))
    assert im.dcor(d, g).value == pytest.approx(ref, rel=1e-12)


def test_dcor_identity_and_affine():
    x = np.random.default_rng(28).normal(size=300)
    assert abs(im.dcor(np.column_stack([x, x])).value - 1) <= 1e-9
    assert abs(im.dcor(np.column_stack([x, 3 * x + 2])).value - 1) <= 1e-9


def test_dcor_null():
    assert abs(im.dcor(gaussian(800, 0.0, 29)).value) <= 0.07


def test_dcor_constant_block():
    with pytest.raises(DegenerateBlock):
        im.dcor(np.column_stack([np.ones(10), np.arange(10.0)]))


def test_jdcov_null_and_alternative():
    x = np.random.default_rng(30).normal(size=(400, 3))
    stat = lambda d: im.jdcov(d).value
    assert in_band(stat(x), perm_null(stat, x))
    z = x[:, 0]
    alt = np.column_stack([z, z ** 3, np.exp(z)])
    assert stat(alt) > np.quantile(perm_null(stat, alt), 0.99)


def test_jdcov_joint_sees_xor_triple():
    r = np.random.default_rng(31)
    n = 400
    sx, sy = r.choice([-1.0, 1.0], n), r.choice([-1.0, 1.0], n)
    d = np.column_stack([sx * r.exponential(size=n), sy * r.exponential(size=n),
                         sx * sy * r.exponential(size=n)])
    joint = lambda v: im.jdcov(v).value
    pair = lambda v: im.jdcov(v, variant="pairwise").value
    assert in_band(pair(d), perm_null(pair, d))
    assert joint(d) > np.quantile(perm_null(joint, d), 0.99)


@pytest.mark.parametrize("seed", range(50))
def test_mdd_matches_pairwise_definition(seed):
    r = np.random.default_rng(300 + seed)
    x = r.normal(size=15)
    y = x ** 2 + r.normal(size=15)
    got = im.mdd_mdm(np.column_stack([x, y])).params["mdd_sq"]
    assert got == pytest.approx(mdd_brute(x, y), rel=1e-10, abs=1e-14)


def test_mdm_null_and_identity():
    r = np.random.default_rng(32)
    x = r.normal(size=400)
    y = np.sign(x) * r.normal(size=400)
    d = np.column_stack([x, y])
    stat = lambda v: im.mdd_mdm(v).value
    assert in_band(stat(d), perm_null(stat, d))
    z = r.normal(size=800)
    assert im.mdd_mdm(np.column_stack([z, z])).value >= 0.9


def test_mdm_asymmetric():
    r = np.random.default_rng(33)
    x = r.normal(size=300)
    d = np.column_stack([x, x ** 2])
    fwd = im.mdd_mdm(d).value
    back = im.mdd_mdm(d, y_cols=[0], x_cols=[1]).value
    assert fwd != back


# ---------------------------------------------------------------- dHSIC

def test_dhsic_two_blocks_is_hsic():
    r = np.random.default_rng(34)
    x = r.normal(size=(60, 2))
    k, l = im.gaussian_gram(x[:, :1]), im.gaussian_gram(x[:, 1:])
    h = np.eye(60) - 1 / 60
    assert im.dhsic(x).value == pytest.approx(np.trace(k @ h @ l @ h) / 60 ** 2, rel=1e-12)


def test_dhsic_null_and_alternative():
    r = np.random.default_rng(35)
    x = r.normal(size=(400, 2))
    stat = lambda v: im.dhsic(v).value
    assert in_band(stat(x), perm_null(stat, x))
    t = r.uniform(0, 2 * np.pi, 400)
    alt = np.column_stack([t, np.sin(t)])
    assert stat(alt) > np.quantile(perm_null(stat, alt), 0.99)


# ---------------------------------------------------------------- registry routing

def test_vector_blocks_route():
    x = np.random.default_rng(36).normal(size=(100, 4))
    g = GroupSpec.of((0, 1), (2, 3))
    for mid in (MeasureId.DCOR, MeasureId.BALL, MeasureId.DHSIC, MeasureId.HHG_CHISQ):
        assert np.isfinite(evaluate(mid, x, groups=g).value)
