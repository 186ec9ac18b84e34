"""Scalar volumes on isotropic grids: storage, boundary extension, ROI and raw IO.

A :class:`Volume` holds its samples in a Fortran-ordered array indexed
``data[x, y, z]`` so the flat memory layout is x fastest, then y, then z.
On disk a volume is a little-endian ``<name>.raw`` payload next to a small
UTF-8 ``<name>.meta`` text header.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

Dims = Tuple[int, int, int]
PathLike = Union[str, Path]

_MAX_VOXELS = 2**40


class VolumeError(ValueError):
    """Base class for volume related errors."""


class DimensionError(VolumeError):
    pass


class VolumeRangeError(VolumeError, IndexError):
    pass


class FormatError(VolumeError):
    pass


class BoundaryPolicy(enum.Enum):
    MIRROR = "mirror"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value: Union[str, "BoundaryPolicy"]) -> "BoundaryPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown boundary policy {value!r}") from None


_DTYPES = {
    "u8": np.dtype("u1"),
    "u16le": np.dtype("<u2"),
    "f32le": np.dtype("<f4"),
}


@dataclass
class VolumeHeader:
    dims: Dims
    dtype: str = "f32le"
    voxel_size: Optional[float] = None
    value_scale: Optional[float] = None

    def __post_init__(self):
        self.dims = _check_dims(self.dims)
        if self.dtype not in _DTYPES:
            raise FormatError(f"unknown dtype {self.dtype!r}, expected one of {sorted(_DTYPES)}")

    def to_text(self) -> str:
        lines = [
            "dims = {} {} {}".format(*self.dims),
            f"dtype = {self.dtype}",
        ]
        if self.voxel_size is not None:
            lines.append(f"voxel_size = {self.voxel_size!r}")
        if self.value_scale is not None:
            lines.append(f"value_scale = {self.value_scale!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "VolumeHeader":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"header line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            entries[key] = value
        try:
            dims = tuple(int(s) for s in entries["dims"].replace(",", " ").split())
            dtype = entries["dtype"]
        except KeyError as exc:
            raise FormatError(f"header is missing required key {exc.args[0]!r}") from None
        except ValueError:
            raise FormatError(f"bad dims entry {entries['dims']!r}") from None
        if len(dims) != 3:
            raise FormatError(f"dims must have three entries, got {entries['dims']!r}")

        def opt_float(key):
            if key not in entries:
                return None
            try:
                return float(entries[key])
            except ValueError:
                raise FormatError(f"bad {key} entry {entries[key]!r}") from None

        return cls(dims, dtype, opt_float("voxel_size"), opt_float("value_scale"))


def _check_dims(dims: Sequence[int]) -> Dims:
    try:
        dims = tuple(int(d) for d in dims)
    except (TypeError, ValueError):
        raise DimensionError(f"dims must be three integers, got {dims!r}") from None
    if len(dims) != 3:
        raise DimensionError(f"dims must have three entries, got {dims!r}")
    if any(d < 1 for d in dims):
        raise DimensionError(f"dims must be positive, got {dims!r}")
    if dims[0] * dims[1] * dims[2] > _MAX_VOXELS:
        raise DimensionError(f"dims {dims!r} overflow the supported voxel count")
    return dims


@dataclass(eq=False)
class Volume:
    """A 3D scalar field, ``data[x, y, z]`` in x-fastest (Fortran) order.

    ``data`` is float32 or float64; float64 is the default container and the
    precision used for all stencil arithmetic.
    """

    data: np.ndarray
    voxel_size: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1, 1)
        if arr.ndim != 3:
            raise DimensionError(f"volume data must be 3D, got shape {arr.shape}")
        _check_dims(arr.shape)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise VolumeError("volume data contains non-finite values")
        self.data = np.asfortranarray(arr)

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def flat(self) -> np.ndarray:
        """Samples as a 1D array, x fastest."""
        return self.data.ravel(order="F")

    def __getitem__(self, p):
        return self.data[p]

    def __eq__(self, other):
        if not isinstance(other, Volume):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.data, other.data))

    def copy(self) -> "Volume":
        return Volume(self.data.copy(order="F"), self.voxel_size, dict(self.meta))

    @classmethod
    def from_flat(cls, values, dims, **kw) -> "Volume":
        dims = _check_dims(dims)
        values = np.asarray(values)
        if values.size != dims[0] * dims[1] * dims[2]:
            raise DimensionError(f"{values.size} values do not fill dims {dims}")
        return cls(values.reshape(dims, order="F"), **kw)


def create_volume(dims: Sequence[int], fill: float = 0.0, dtype=np.float64) -> Volume:
    dims = _check_dims(dims)
    if not np.isfinite(fill):
        raise VolumeError(f"fill value must be finite, got {fill!r}")
    return Volume(np.full(dims, fill, dtype=dtype, order="F"))


def extend_indices(idx, n: int, policy: BoundaryPolicy) -> np.ndarray:
    """Map signed indices into ``[0, n)`` under a boundary policy.

    Mirror is half-sample symmetric (-1 -> 0, n -> n-1) and repeats with
    period ``2n`` for excursions beyond one axis length.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if policy is BoundaryPolicy.PERIODIC:
        return np.mod(idx, n)
    m = np.mod(idx, 2 * n)
    return np.where(m >= n, 2 * n - 1 - m, m)


def get_extended(v: Volume, p: Sequence[int], policy=BoundaryPolicy.MIRROR) -> float:
    policy = BoundaryPolicy.parse(policy)
    q = []
    for i, n in zip(p, v.dims):
        i = int(i)
        if policy is BoundaryPolicy.MIRROR and (i <= -n or i >= 2 * n - 1):
            raise VolumeRangeError(f"index {i} reflects past the far side of an axis of length {n}")
        q.append(int(extend_indices(i, n, policy)))
    return float(v.data[tuple(q)])


def extract_roi(v: Volume, origin: Sequence[int], dims: Sequence[int]) -> Volume:
    dims = _check_dims(dims)
    origin = tuple(int(o) for o in origin)
    if len(origin) != 3:
        raise DimensionError(f"origin must have three entries, got {origin!r}")
    for o, d, n in zip(origin, dims, v.dims):
        if o < 0 or o + d > n:
            raise VolumeRangeError(f"ROI origin {origin} dims {dims} exceeds volume dims {v.dims}")
    sl = tuple(slice(o, o + d) for o, d in zip(origin, dims))
    return Volume(v.data[sl].copy(order="F"), v.voxel_size)


def _split_path(path: PathLike) -> Tuple[Path, Path]:
    path = Path(path)
    if path.suffix in (".raw", ".meta"):
        path = path.with_suffix("")
    return path.with_name(path.name + ".raw"), path.with_name(path.name + ".meta")


def read_volume(path: PathLike) -> Volume:
    """Load ``<path>.raw`` / ``<path>.meta``; integer payloads become float32."""
    raw_path, meta_path = _split_path(path)
    try:
        header = VolumeHeader.from_text(meta_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read header {meta_path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"header {meta_path} is not UTF-8 text") from exc
    dt = _DTYPES[header.dtype]
    payload = np.fromfile(raw_path, dtype=dt)
    expected = header.dims[0] * header.dims[1] * header.dims[2]
    if payload.size != expected or raw_path.stat().st_size != expected * dt.itemsize:
        raise FormatError(
            f"payload size mismatch: {raw_path} holds {raw_path.stat().st_size} bytes, "
            f"header dims {header.dims} as {header.dtype} need {expected * dt.itemsize}"
        )
    data = payload.astype(np.float32)
    if header.value_scale is not None:
        data = (data.astype(np.float64) * header.value_scale).astype(np.float32)
    return Volume.from_flat(data, header.dims, voxel_size=header.voxel_size)


def write_volume(v: Volume, path: PathLike, dtype: str = "f32le",
                 value_scale: Optional[float] = None) -> Tuple[Path, Path]:
    """Write ``v`` as raw payload plus header; returns both paths.

    Integer dtypes clamp to the representable range and round half to even.
    """
    header = VolumeHeader(v.dims, dtype, v.voxel_size, value_scale)
    dt = _DTYPES[dtype]
    flat = v.flat()
    if dt.kind == "u":
        info = np.iinfo(dt)
        out = np.clip(np.rint(flat.astype(np.float64)), info.min, info.max).astype(dt)
    else:
        out = flat.astype(dt)
    raw_path, meta_path = _split_path(path)
    out.tofile(raw_path)
    meta_path.write_text(header.to_text(), encoding="utf-8")
    return raw_path, meta_path


_AXES = {"x": 0, "y": 1, "z": 2}


def axis_index(axis: Union[str, int]) -> int:
    if isinstance(axis, str):
        try:
            return _AXES[axis.lower()]
        except KeyError:
            raise ValueError(f"axis must be one of x, y, z; got {axis!r}") from None
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2; got {axis!r}")
    return int(axis)


def slice_pixels(v: Volume, axis, index: int, gamma: float = 1.0) -> np.ndarray:
    """8-bit pixels of one slice, rows/columns ordered (y, x), (z, x) or (z, y)."""
    ax = axis_index(axis)
    if not 0 <= index < v.dims[ax]:
        raise VolumeRangeError(f"slice index {index} outside [0, {v.dims[ax]}) on axis {'xyz'[ax]}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    plane = np.take(v.data, index, axis=ax).astype(np.float64).T
    lo, hi = float(v.data.min()), float(v.data.max())
    if hi <= lo:
        return np.zeros(plane.shape, dtype=np.uint8)
    t = np.clip((plane - lo) / (hi - lo), 0.0, 1.0)
    return np.rint(255.0 * t**gamma).astype(np.uint8)


def export_slice(v: Volume, axis, index: int, out_path: PathLike, gamma: float = 1.0) -> Path:
    """Write one slice as a binary 8-bit portable graymap (P5)."""
    pixels = slice_pixels(v, axis, index, gamma)
    rows, cols = pixels.shape
    out_path = Path(out_path)
    with open(out_path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels).tobytes())
    return out_path


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary 8-bit PGM written by :func:`export_slice`."""
    blob = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", blob)
    if m is None:
        raise FormatError(f"{path} is not a binary PGM")
    cols, rows, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit PGM supported")
    pixels = np.frombuffer(blob, dtype=np.uint8, count=rows * cols, offset=m.end())
    return pixels.reshape(rows, cols)
