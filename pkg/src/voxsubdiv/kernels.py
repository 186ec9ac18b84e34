"""Coefficient tables of the 6-point cell-average scheme.

All stencils carry explicit offsets and are applied pointwise,
``(f * s)_i = sum_r s[r] * f[i + r]``; there is no flip convention.
Integer numerators over 1024 are the source of truth; floats are derived.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

DENOM = 1024


@dataclass(frozen=True)
class Stencil:
    numerators: Tuple[int, ...]
    first_offset: int

    @property
    def offsets(self) -> range:
        return range(self.first_offset, self.first_offset + len(self.numerators))

    @property
    def exact(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(n, DENOM) for n in self.numerators)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.numerators, dtype=np.float64) / DENOM

    def __getitem__(self, offset: int) -> Fraction:
        if offset not in self.offsets:
            raise KeyError(f"offset {offset} outside {self.offsets}")
        return Fraction(self.numerators[offset - self.first_offset], DENOM)

    def total(self) -> Fraction:
        return Fraction(sum(self.numerators), DENOM)


@dataclass(frozen=True)
class KernelSet:
    a0: Stencil
    a1: Stencil
    b0: Stencil
    b1: Stencil
    c0: Stencil
    c1: Stencil
    d2: Stencil

    def a(self, phase: int) -> Stencil:
        return (self.a0, self.a1)[phase]

    def b(self, phase: int) -> Stencil:
        return (self.b0, self.b1)[phase]

    def c(self, phase: int) -> Stencil:
        return (self.c0, self.c1)[phase]

    def as_arrays(self) -> Dict[str, np.ndarray]:
        """Float tables stacked by phase: ``a`` and ``b`` are (2, 6), ``c`` is (2, 4)."""
        return {
            "a": np.stack([self.a0.values, self.a1.values]),
            "b": np.stack([self.b0.values, self.b1.values]),
            "c": np.stack([self.c0.values, self.c1.values]),
            "d2": self.d2.values,
        }


_A0 = (14, -126, 924, 276, -74, 10)
_B0 = (11, 165, 462, 330, 55, 1)
_C0 = (3, -285, -111, 9)
_D2 = (DENOM, -2 * DENOM, DENOM)


@lru_cache(maxsize=None)
def kernel_set() -> KernelSet:
    return KernelSet(
        a0=Stencil(_A0, -2),
        a1=Stencil(_A0[::-1], -2),
        b0=Stencil(_B0, -2),
        b1=Stencil(_B0[::-1], -2),
        c0=Stencil(_C0, -2),
        c1=Stencil(_C0[::-1], -2),
        d2=Stencil(_D2, 0),
    )


def expand_bc(phase: int, ks: KernelSet | None = None) -> Dict[int, Fraction]:
    """Exact 6-tap stencil of ``f * b + (d2 * f) * c`` for one phase."""
    ks = ks or kernel_set()
    out = {r: ks.b(phase)[r] for r in ks.b(phase).offsets}
    c = ks.c(phase)
    for r in c.offsets:
        for t in ks.d2.offsets:
            out[r + t] = out.get(r + t, Fraction(0)) + c[r] * ks.d2[t]
    return out


def kernel_identity_residual() -> Fraction:
    """Largest |a - (b + d2 composed with c)| over both phases and all offsets; exactly 0."""
    ks = kernel_set()
    worst = Fraction(0)
    for phase in (0, 1):
        a = ks.a(phase)
        expanded = expand_bc(phase, ks)
        for r in set(expanded) | set(a.offsets):
            ar = a[r] if r in a.offsets else Fraction(0)
            worst = max(worst, abs(ar - expanded.get(r, Fraction(0))))
    return worst
