import numpy as np
import pytest

from bwfusion.atrous import decompose
from bwfusion.errors import NumericError, ParameterError, ShapeError
from bwfusion.fusion import (
    METHODS,
    FusionConfig,
    fuse,
    fuse_aw,
    fuse_brovey,
    fuse_bw,
    fuse_hpf,
    fuse_ihs,
    fuse_pca,
    fuse_sw,
    match_mean_std,
    pansharpen,
    pca_forward,
    pca_inverse,
)
from bwfusion.raster import BandStack

from conftest import oracle_decompose


def rel_err(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


@pytest.fixture
def scene(rng):
    ms = BandStack(rng.uniform(0.2, 1.0, size=(4, 32, 32)))
    pan = rng.uniform(0.2, 1.0, size=(32, 32))
    return pan, ms


def cfg(method, **kw):
    return FusionConfig(method=method, **kw)


class TestConfig:
    def test_defaults_resolve(self):
        r = FusionConfig(method="aw").resolved(np.array([[0.0, 2.0]]))
        assert r.levels == 2
        assert r.pan_match == "mean_std"
        assert r.hpf_kernel == 9
        assert r.denom_epsilon == pytest.approx(2e-6)
        assert FusionConfig(method="bw").resolved(np.ones((2, 2))).pan_match == "none"

    @pytest.mark.parametrize("kw", [
        {"method": "dwt"}, {"ratio": 0}, {"levels": 0}, {"denom_epsilon": 0.0},
        {"pan_match": "hist"}, {"hpf_kernel": 4}, {"hpf_kernel": 1},
        {"method": "bw", "pan_match": "mean_std"},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            FusionConfig(**kw)


class TestBrovey:
    def test_pan_equal_to_band_mean(self, scene):
        _, ms = scene
        out = fuse_brovey(ms.data.mean(axis=0), ms).fused.data
        np.testing.assert_allclose(out, ms.data, rtol=1e-14)

    def test_single_pixel(self):
        ms = BandStack(np.array([2.0, 4.0, 6.0]).reshape(3, 1, 1))
        out = fuse_brovey(np.array([[8.0]]), ms, cfg("brovey", denom_epsilon=1e-6)).fused.data
        assert out.ravel().tolist() == [4.0, 8.0, 12.0]

    def test_zero_denominator(self):
        ms = np.ones((3, 2, 2))
        ms[:, 0, 0] = 0
        out = fuse_brovey(np.full((2, 2), 5.0), ms).fused.data
        assert np.all(out[:, 0, 0] == 0)
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out[:, 1, 1], 5.0)

    def test_ratio_preservation(self, scene):
        pan, ms = scene
        f = fuse_brovey(pan, ms).fused.data
        for i in range(4):
            for k in range(4):
                np.testing.assert_allclose(f[i] / f[k], ms.data[i] / ms.data[k], rtol=1e-9)


class TestAW:
    def test_constant_pan(self, scene):
        _, ms = scene
        for match in ("none", "mean_std"):
            out = fuse_aw(np.full(ms.shape, 3.0), ms, cfg("aw", pan_match=match)).fused.data
            np.testing.assert_allclose(out, ms.data, atol=1e-12)

    def test_common_injection_without_matching(self, scene):
        pan, ms = scene
        out = fuse_aw(pan, ms, cfg("aw", pan_match="none")).fused.data
        diff = out - ms.data
        for i in range(1, 4):
            np.testing.assert_allclose(diff[i], diff[0], atol=1e-14)

    def test_telescoping_oracle(self, scene):
        pan, ms = scene
        out = fuse_aw(pan, ms, cfg("aw", levels=2, pan_match="none")).fused.data
        _, resid = oracle_decompose(pan, 2)
        for i in range(4):
            assert rel_err(out[i], ms.data[i] + (pan - resid)) <= 1e-9

    def test_matched_oracle(self, scene):
        pan, ms = scene
        out = fuse_aw(pan, ms, cfg("aw", levels=2)).fused.data
        for i in range(4):
            b = ms.data[i]
            p = (pan - pan.mean()) / pan.std() * b.std() + b.mean()
            _, resid = oracle_decompose(p, 2)
            assert rel_err(out[i], b + p - resid) <= 1e-9


class TestSW:
    def test_pan_equals_single_band(self, rng):
        b = rng.uniform(size=(16, 16))
        out = fuse_sw(b, BandStack(b), cfg("sw", pan_match="none")).fused.data[0]
        np.testing.assert_allclose(out, b, rtol=1e-12)

    def test_constant_pan_gives_residual(self, scene):
        _, ms = scene
        out = fuse_sw(np.full(ms.shape, 2.0), ms, cfg("sw", pan_match="none", levels=2)).fused.data
        for i in range(4):
            _, resid = oracle_decompose(ms.data[i], 2)
            assert rel_err(out[i], resid) <= 1e-9

    def test_componentwise_oracle(self, scene):
        pan, ms = scene
        out = fuse_sw(pan, ms, cfg("sw", pan_match="none", levels=2)).fused.data
        w_planes, _ = oracle_decompose(pan, 2)
        for i in range(4):
            _, resid = oracle_decompose(ms.data[i], 2)
            assert rel_err(out[i], resid + sum(w_planes)) <= 1e-9

    @pytest.mark.parametrize("match", ["none", "mean_std"])
    def test_keeps_ms_residual(self, scene, match):
        pan, ms = scene
        out = fuse_sw(pan, ms, cfg("sw", pan_match=match)).fused.data
        for i in range(4):
            p = match_mean_std(pan, ms.data[i]) if match == "mean_std" else pan
            injected = p - decompose(p, 2).residual
            assert rel_err(out[i] - injected, decompose(ms.data[i], 2).residual) <= 1e-9


class TestBW:
    def test_brovey_identity_propagates(self, scene):
        _, ms = scene
        out = fuse_bw(ms.data.mean(axis=0), ms).fused.data
        assert rel_err(out, ms.data) <= 1e-9

    def test_keeps_ms_residual(self, scene):
        pan, ms = scene
        out = fuse_bw(pan, ms).fused.data
        brovey = fuse_brovey(pan, ms).fused.data
        for i in range(4):
            injected = brovey[i] - decompose(brovey[i], 2).residual
            assert rel_err(out[i] - injected, decompose(ms.data[i], 2).residual) <= 1e-9

    def test_no_histogram_matching(self, scene):
        pan, ms = scene
        # scaling PAN scales the grafted Brovey detail by the same factor
        a = fuse_bw(pan, ms).fused.data
        b = fuse_bw(3 * pan, ms).fused.data
        resid = np.stack([decompose(band, 2).residual for band in ms.data])
        np.testing.assert_allclose(b - resid, 3 * (a - resid), rtol=1e-9, atol=1e-12)

    def test_pipeline_oracle(self, scene):
        pan, ms = scene
        out = fuse_bw(pan, ms, cfg("bw", ratio=4, levels=2)).fused.data
        m = ms.data.mean(axis=0)
        for i in range(4):
            brovey = pan / m * ms.data[i]
            planes, _ = oracle_decompose(brovey, 2)
            _, resid = oracle_decompose(ms.data[i], 2)
            assert rel_err(out[i], resid + planes[0] + planes[1]) <= 1e-9

    def test_literal_level_reading(self, rng):
        ms = BandStack(rng.uniform(0.2, 1, size=(2, 64, 64)))
        pan = rng.uniform(0.2, 1, size=(64, 64))
        res = fuse_bw(pan, ms, cfg("bw", levels="ratio", ratio=4))
        assert res.config_echo.levels == 4


class TestIHS:
    def test_pan_equals_intensity(self, scene):
        _, ms = scene
        out = fuse_ihs(ms.data.mean(axis=0), ms).fused.data
        np.testing.assert_allclose(out, ms.data, atol=1e-14)

    def test_common_injection(self, scene):
        pan, ms = scene
        diff = fuse_ihs(pan, ms).fused.data - ms.data
        for i in range(1, 4):
            np.testing.assert_allclose(diff[i], diff[0], atol=1e-14)

    def test_gihs_pixel(self):
        # I = (2, 4, 6); PAN is a permutation of I, so matching leaves it
        # unchanged and P' = 4 at the first pixel, where MS = (1, 3).
        ms = BandStack(np.array([[[1.0, 3.0, 5.0]], [[3.0, 5.0, 7.0]]]))
        pan = np.array([[4.0, 2.0, 6.0]])
        np.testing.assert_allclose(match_mean_std(pan, ms.data.mean(axis=0)), pan, atol=1e-14)
        out = fuse_ihs(pan, ms).fused.data
        np.testing.assert_allclose(out[:, 0, 0], [3.0, 5.0], atol=1e-14)


class TestPCA:
    def test_round_trip(self, scene):
        _, ms = scene
        comps, vecs, means = pca_forward(ms.data)
        assert rel_err(pca_inverse(comps, vecs, means), ms.data) <= 1e-9

    def test_identity_substitution(self, scene):
        _, ms = scene
        comps, _, _ = pca_forward(ms.data)
        out = fuse_pca(comps[0], ms).fused.data
        assert rel_err(out, ms.data) <= 1e-6

    def test_two_band_oracle(self):
        ms = np.array([[[1.0, 2.0, 4.0, 7.0]], [[2.0, 1.0, 5.0, 6.0]]])
        x = ms.reshape(2, -1)
        xc = x - x.mean(axis=1, keepdims=True)
        a, b, c = (xc[0] @ xc[0]) / 4, (xc[0] @ xc[1]) / 4, (xc[1] @ xc[1]) / 4
        lam1 = (a + c) / 2 + np.sqrt(((a - c) / 2) ** 2 + b * b)
        v1 = np.array([b, lam1 - a])
        v1 /= np.linalg.norm(v1)
        v1 *= np.sign(v1.sum())
        comps, vecs, _ = pca_forward(ms)
        np.testing.assert_allclose(vecs[:, 0], v1, atol=1e-12)
        np.testing.assert_allclose(comps[0].ravel(), v1 @ xc, atol=1e-12)

    def test_sign_convention(self, scene):
        _, ms = scene
        _, vecs, _ = pca_forward(ms.data)
        assert np.all(vecs.sum(axis=0) >= 0)

    def test_rank_deficient(self, rng):
        b = rng.uniform(size=(8, 8))
        ms = BandStack(np.stack([b, 2 * b]))
        with pytest.raises(NumericError, match="eigenvalue 2"):
            fuse_pca(b, ms)

    def test_needs_two_bands(self, rng):
        with pytest.raises(ParameterError):
            fuse_pca(rng.uniform(size=(4, 4)), BandStack(rng.uniform(size=(4, 4))))


class TestHPF:
    def test_constant_pan(self, scene):
        _, ms = scene
        np.testing.assert_allclose(fuse_hpf(np.full(ms.shape, 9.0), ms).fused.data, ms.data, atol=1e-13)

    def test_common_injection(self, scene):
        pan, ms = scene
        diff = fuse_hpf(pan, ms).fused.data - ms.data
        for i in range(1, 4):
            np.testing.assert_allclose(diff[i], diff[0], atol=1e-14)

    def test_dense_boxcar_oracle(self, backend, rng):
        pan = rng.normal(size=(16, 16))
        ms = BandStack(np.zeros((1, 16, 16)))
        out = fuse_hpf(pan, ms, cfg("hpf", hpf_kernel=5)).fused.data[0]
        padded = np.pad(pan, 2, mode="reflect")
        mean = np.zeros_like(pan)
        for i in range(16):
            for j in range(16):
                mean[i, j] = padded[i:i + 5, j:j + 5].mean()
        assert rel_err(out, pan - mean) <= 1e-9


@pytest.mark.parametrize("method", METHODS)
def test_output_shape_finite_deterministic(scene, method):
    pan, ms = scene
    a = fuse(pan, ms, FusionConfig(method=method))
    b = fuse(pan, ms, FusionConfig(method=method))
    assert a.fused.data.shape == (4, 32, 32)
    assert np.all(np.isfinite(a.fused.data))
    assert a.fused.data.tobytes() == b.fused.data.tobytes()
    assert a.method == method
    assert a.fused.band_names == ms.band_names


@pytest.mark.parametrize("method", METHODS)
def test_shape_mismatch(rng, method):
    with pytest.raises(ShapeError):
        fuse(rng.uniform(size=(8, 8)), BandStack(rng.uniform(size=(2, 8, 6))), FusionConfig(method=method))


def test_pansharpen_upsamples(rng):
    pan = rng.uniform(0.2, 1, size=(32, 32))
    ms = BandStack(rng.uniform(0.2, 1, size=(3, 8, 8)))
    res = pansharpen(pan, ms, FusionConfig(method="bw", ratio=4))
    assert res.fused.shape == (32, 32)
    with pytest.raises(ShapeError, match=r"\[bw\]|upsampled"):
        pansharpen(pan, ms, FusionConfig(method="bw", ratio=2))


def test_inputs_unmodified(scene):
    pan, ms = scene
    p0 = pan.copy()
    for m in METHODS:
        fuse(pan, ms, FusionConfig(method=m))
    np.testing.assert_array_equal(pan, p0)
