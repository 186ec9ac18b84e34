import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxsubdiv.metrics import (
    FIELDS,
    MetricError,
    MetricsReport,
    metrics_report,
    psnr,
    relative_l2,
    relative_tv,
    tv_norm,
    voxelwise_errors,
    voxelwise_stats,
)
from voxsubdiv.volume import Volume


def unit_range(rng, shape=(6, 5, 4)):
    """Random field spanning exactly [0, 1]."""
    r = rng.random(shape)
    r.flat[0], r.flat[1] = 0.0, 1.0
    return r


def sorted_quantile(values, q):
    # order-statistic interpolation spelled out by hand
    s = sorted(values)
    pos = q * (len(s) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


class TestPSNR:
    def test_identical_is_infinite(self, rng):
        r = unit_range(rng)
        assert psnr(r, r) == math.inf

    @pytest.mark.parametrize("offset,db", [(0.1, 20.0), (0.01, 40.0)])
    def test_constant_offset(self, rng, offset, db):
        r = unit_range(rng)
        assert psnr(r, r + offset) == pytest.approx(db, abs=1e-9)

    def test_constant_reference_rejected(self):
        with pytest.raises(MetricError, match="constant"):
            psnr(np.ones(4), np.zeros(4))

    def test_dims_mismatch(self):
        with pytest.raises(MetricError, match="dims"):
            psnr(np.arange(4.0), np.arange(5.0))

    def test_accepts_volumes(self, rng):
        r = unit_range(rng)
        assert psnr(Volume(r), Volume(r + 0.1)) == pytest.approx(20.0, abs=1e-9)


class TestRelativeL2:
    def test_equal(self, rng):
        r = rng.random(10)
        assert relative_l2(r, r) == 0.0

    def test_scaled(self, rng):
        r = rng.random(10) + 0.5
        assert relative_l2(r, 1.1 * r) == pytest.approx(10.0, rel=1e-12)

    def test_two_voxels(self):
        assert relative_l2(np.array([3.0, 4.0]), np.array([3.0, 5.0])) == pytest.approx(20.0, rel=1e-15)

    def test_zero_reference(self):
        with pytest.raises(MetricError):
            relative_l2(np.zeros(3), np.ones(3))


class TestVoxelwise:
    def test_equal(self, rng):
        r = unit_range(rng)
        assert voxelwise_stats(r, r) == (0.0, 0.0)

    def test_constant_error(self, rng):
        r = unit_range(rng)
        med, q99 = voxelwise_stats(r, r + 0.01)
        assert med == pytest.approx(1.0, rel=1e-12)
        assert q99 == pytest.approx(1.0, rel=1e-12)

    def test_heavy_tail_below_q99(self, rng):
        # 995 voxels off by 1 %, 5 voxels off by 5 %
        r = np.zeros(1000)
        r[0] = 1.0
        err = np.full(1000, 0.01)
        err[rng.choice(1000, size=5, replace=False)] = 0.05
        t = r + err
        med, q99 = voxelwise_stats(r, t)
        e = voxelwise_errors(r, t).tolist()
        assert med == pytest.approx(sorted_quantile(e, 0.5), rel=1e-15)
        assert q99 == pytest.approx(sorted_quantile(e, 0.99), rel=1e-15)
        assert med == pytest.approx(1.0, rel=1e-12)
        assert q99 == pytest.approx(1.0, rel=1e-12)

    def test_interpolation_between_order_statistics(self):
        r = np.array([0.0, 1.0, 0.0, 0.0])
        t = r + np.array([0.0, 0.1, 0.2, 0.3])
        _, q99 = voxelwise_stats(r, t)
        e = voxelwise_errors(r, t).tolist()
        assert q99 == pytest.approx(sorted_quantile(e, 0.99), rel=1e-14)
        assert 20.0 < q99 < 30.0

    def test_constant_reference_rejected(self):
        with pytest.raises(MetricError):
            voxelwise_stats(np.zeros(5), np.ones(5))


class TestTV:
    def test_constant(self):
        assert tv_norm(np.full((3, 4, 5), 2.0)) == 0.0

    def test_one_crossing(self):
        assert tv_norm(Volume(np.array([0.0, 1.0]).reshape(2, 1, 1))) == 1.0

    def test_two_crossings(self):
        v = np.array([[0.0, 1.0], [0.0, 1.0]]).T.reshape(2, 2, 1)
        assert tv_norm(v) == 2.0

    def test_relative_self(self, rng):
        r = rng.random((5, 5, 5))
        assert relative_tv(r, r) == 100.0

    def test_relative_half(self, rng):
        r = rng.random((5, 5, 5))
        assert relative_tv(r, 0.5 * r) == pytest.approx(50.0, rel=1e-14)

    def test_smoothed_step_keeps_tv(self):
        hard = np.array([0.0] * 8 + [1.0] * 8)
        smooth = np.clip((np.arange(16) - 4) / 7.0, 0.0, 1.0)
        assert relative_tv(hard, smooth) == pytest.approx(100.0, rel=1e-14)

    def test_zero_reference(self):
        with pytest.raises(MetricError):
            relative_tv(np.ones(4), np.arange(4.0))


class TestInvariances:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 100.0), st.floats(-50.0, 50.0), st.integers(0, 2**31))
    def test_affine_invariance(self, a, b, seed):
        rng = np.random.default_rng(seed)
        r = unit_range(rng, (4, 4, 4))
        t = r + 0.05 * rng.standard_normal(r.shape)
        assert psnr(a * r + b, a * t + b) == pytest.approx(psnr(r, t), rel=1e-6)
        for x, y in zip(voxelwise_stats(a * r + b, a * t + b), voxelwise_stats(r, t)):
            assert x == pytest.approx(y, rel=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 100.0), st.integers(0, 2**31))
    def test_scale_invariance_l2(self, a, seed):
        rng = np.random.default_rng(seed)
        r, t = rng.random(20) + 0.1, rng.random(20)
        assert relative_l2(a * r, a * t) == pytest.approx(relative_l2(r, t), rel=1e-10)


class TestReport:
    def test_self_comparison(self, rng):
        r = unit_range(rng)
        rep = metrics_report(r, r)
        assert rep.psnr_db == math.inf
        assert rep.rel_l2_percent == 0.0
        assert rep.rel_tv_percent == 100.0

    def test_invariants(self, rng):
        r = unit_range(rng)
        rep = metrics_report(r, r + 0.03 * rng.standard_normal(r.shape))
        assert rep.voxel_q99_percent >= rep.voxel_median_percent >= 0.0
        assert rep.rel_l2_percent >= 0.0 and math.isfinite(rep.psnr_db)

    def test_text_roundtrip(self, rng, tmp_path):
        r = unit_range(rng)
        for t in (r, r + 0.1):
            rep = metrics_report(r, t)
            path = rep.write(tmp_path / "r.txt")
            assert MetricsReport.from_text(path.read_text()) == rep
        keys = [line.split("=")[0].strip() for line in rep.to_text().splitlines()]
        assert tuple(keys) == FIELDS

    def test_inf_written_as_text(self, rng):
        r = unit_range(rng)
        assert "psnr_db = inf\n" in metrics_report(r, r).to_text()

    def test_missing_field(self):
        with pytest.raises(MetricError, match="lacks"):
            MetricsReport.from_text("psnr_db = 3\n")
