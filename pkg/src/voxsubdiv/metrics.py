"""Image-quality metrics between a reference volume and a test volume.

Errors are normalised by the reference's dynamic range ``max - min`` so
that integer and floating volumes give comparable percentages. All sums
run in float64 with numpy's pairwise summation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .volume import Volume


class MetricError(ValueError):
    pass


FIELDS = ("psnr_db", "rel_l2_percent", "voxel_median_percent", "voxel_q99_percent", "rel_tv_percent")


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    rel_l2_percent: float
    voxel_median_percent: float
    voxel_q99_percent: float
    rel_tv_percent: float

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "MetricsReport":
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = float(value.strip())
        missing = [k for k in FIELDS if k not in values]
        if missing:
            raise MetricError(f"report lacks fields {missing}")
        return cls(**{k: values[k] for k in FIELDS})

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _pair(ref, test) -> Tuple[np.ndarray, np.ndarray]:
    r = ref.data if isinstance(ref, Volume) else np.asarray(ref)
    t = test.data if isinstance(test, Volume) else np.asarray(test)
    if r.shape != t.shape:
        raise MetricError(f"dims mismatch: reference {r.shape} vs test {t.shape}")
    return r.astype(np.float64), t.astype(np.float64)


def _range(r: np.ndarray) -> float:
    R = float(r.max() - r.min())
    if R <= 0:
        raise MetricError("reference volume is constant; dynamic range is zero")
    return R


def psnr(ref, test) -> float:
    """``10 log10(R^2 / MSE)`` in dB with ``R`` the reference range."""
    r, t = _pair(ref, test)
    R = _range(r)
    mse = float(np.mean((t - r) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(R * R / mse)


def relative_l2(ref, test) -> float:
    r, t = _pair(ref, test)
    norm = float(np.linalg.norm(r.ravel()))
    if norm == 0:
        raise MetricError("reference volume has zero L2 norm")
    return 100.0 * float(np.linalg.norm((t - r).ravel())) / norm


def voxelwise_errors(ref, test) -> np.ndarray:
    """Per-voxel ``100 |test - ref| / R`` as a flat array."""
    r, t = _pair(ref, test)
    R = _range(r)
    return (100.0 / R) * np.abs(t - r).ravel()


def voxelwise_stats(ref, test) -> Tuple[float, float]:
    """Median and 99% quantile (linear interpolation) of the voxelwise errors."""
    e = voxelwise_errors(ref, test)
    med, q99 = np.quantile(e, [0.5, 0.99], method="linear")
    return float(med), float(q99)


def tv_norm(v) -> float:
    """Anisotropic total variation over interior neighbour pairs."""
    a = v.data if isinstance(v, Volume) else np.asarray(v)
    a = a.astype(np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1, 1)
    return float(sum(np.abs(np.diff(a, axis=ax)).sum() for ax in range(a.ndim)))


def relative_tv(ref, test) -> float:
    r, t = _pair(ref, test)
    tv_ref = tv_norm(r)
    if tv_ref == 0:
        raise MetricError("reference volume has zero total variation")
    return 100.0 * tv_norm(t) / tv_ref


def metrics_report(ref, test) -> MetricsReport:
    med, q99 = voxelwise_stats(ref, test)
    return MetricsReport(
        psnr_db=psnr(ref, test),
        rel_l2_percent=relative_l2(ref, test),
        voxel_median_percent=med,
        voxel_q99_percent=q99,
        rel_tv_percent=relative_tv(ref, test),
    )
