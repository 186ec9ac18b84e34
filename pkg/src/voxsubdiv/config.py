from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from .volume import BoundaryPolicy

DEFAULT_TAU = 2.0
DEFAULT_TILE = (64, 64, 64)
DEFAULT_HALO = 6
MIN_HALO = {"linear": 3, "nonlinear": 6}


class ConfigError(ValueError):
    pass


class Mode(enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"

    @classmethod
    def parse(cls, value: Union[str, "Mode"]) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown mode {value!r}, expected 'linear' or 'nonlinear'") from None


@dataclass(frozen=True)
class SubdivisionConfig:
    """Parameters of one refinement step.

    ``tau`` is only meaningful for the nonlinear mode and must exceed 1
    there. ``tile_dims`` and ``halo`` are in input voxels; ``workers`` is the
    number of threads used by the tiled driver (``None`` means all cores).
    """

    mode: Mode = Mode.LINEAR
    tau: Optional[float] = None
    boundary: BoundaryPolicy = BoundaryPolicy.MIRROR
    tile_dims: Tuple[int, int, int] = DEFAULT_TILE
    halo: int = DEFAULT_HALO
    workers: Optional[int] = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "boundary", BoundaryPolicy.parse(self.boundary))
        tile = self.tile_dims
        if isinstance(tile, int):
            tile = (tile, tile, tile)
        tile = tuple(int(t) for t in tile)
        if len(tile) != 3 or min(tile) < 1:
            raise ConfigError(f"tile_dims must be three positive integers, got {self.tile_dims!r}")
        object.__setattr__(self, "tile_dims", tile)
        if self.mode is Mode.NONLINEAR:
            tau = DEFAULT_TAU if self.tau is None else float(self.tau)
            if not tau > 1.0 or tau != tau or tau == float("inf"):
                raise ConfigError(f"tension parameter tau must be a finite value > 1, got {self.tau!r}")
            object.__setattr__(self, "tau", tau)
        elif self.tau is not None:
            raise ConfigError("tau applies to the nonlinear mode only")
        if int(self.halo) != self.halo or self.halo < MIN_HALO[self.mode.value]:
            raise ConfigError(
                f"halo must be an integer >= {MIN_HALO[self.mode.value]} for {self.mode.value} mode, got {self.halo!r}"
            )
        workers = self.workers
        if workers is None:
            workers = os.cpu_count() or 1
        if int(workers) < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers!r}")
        object.__setattr__(self, "workers", int(workers))

    @property
    def nonlinear(self) -> bool:
        return self.mode is Mode.NONLINEAR


def linear(**kw) -> SubdivisionConfig:
    return SubdivisionConfig(mode=Mode.LINEAR, **kw)


def nonlinear(tau: float = DEFAULT_TAU, **kw) -> SubdivisionConfig:
    return SubdivisionConfig(mode=Mode.NONLINEAR, tau=tau, **kw)


def parse_triple(text: Union[str, Sequence[int]]) -> Tuple[int, int, int]:
    if not isinstance(text, str):
        vals = tuple(int(v) for v in text)
    else:
        parts = [p for p in text.replace("x", ",").split(",") if p.strip()]
        vals = tuple(int(p) for p in parts)
    if len(vals) == 1:
        vals = vals * 3
    if len(vals) != 3:
        raise ValueError(f"expected one or three comma separated integers, got {text!r}")
    return vals
