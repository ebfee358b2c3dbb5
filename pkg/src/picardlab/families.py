"""Parametric initial-data constructors on the frequency grid.

Four families: a pair of cubes at heights N and 2N with their mirror images,
a thin slab at height N, a unit window at height N (for the fifth-order
model), and a truncated Gaussian used as a smooth perturbation.  Amplitudes
follow fixed power laws in (N, A, s).

Indicator supports are sampled with the half-open convention (a node belongs
to [a, b) iff a <= node < b) on the positive-frequency component; the mirror
component is the exact grid reflection of that node set, so every field built
here is Hermitian-symmetric and represents a real-valued function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Box, GridSpec, SpectralField, make_field

__all__ = ["DataFamily", "build_data", "closed_form_norms"]

KINDS = ("cube_pair", "slab", "kawahara_window", "smooth_perturbation")


@dataclass(frozen=True)
class DataFamily:
    """Initial-data recipe: kind plus the scale parameters (N, A, s).

    ``amp`` is only used by the smooth perturbation (the other amplitudes are
    derived).  The Gaussian profile has unit mass before truncation.
    """

    kind: str
    N: float
    A: float = 1.0
    s: float = 0.0
    amp: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "cube_pair":
            if self.A <= 0 or self.N < max(2 * self.A, 2):
                raise ValueError("cube_pair requires N >= max(2A, 2), A > 0")
        elif self.kind == "slab":
            if not (0 < self.A <= 1 <= self.N):
                raise ValueError("slab requires 0 < A <= 1 <= N")
        elif self.kind == "kawahara_window":
            if self.N < 2:
                raise ValueError("kawahara_window requires N >= 2")
        else:
            if self.N <= 0:
                raise ValueError("smooth_perturbation requires N > 0")

    def amplitude(self, d: int) -> float:
        N, A, s = self.N, self.A, self.s
        if self.kind == "cube_pair":
            return math.log(N) ** (-1 / 16) * N**-s * A ** (-d / 2)
        if self.kind == "slab":
            return math.log(N) ** (-1 / 16) * N**-s * A**-0.5
        if self.kind == "kawahara_window":
            return N**-s / math.log(N)
        return self.amp * (2 * math.pi) ** (-d / 2)

    def outer_radius(self) -> float:
        """Largest |coordinate| in the support, for grid sizing."""
        if self.kind == "cube_pair":
            return 2 * self.N + self.A
        if self.kind == "slab":
            return self.N + self.A
        if self.kind == "kawahara_window":
            return self.N + 1
        return self.N

    def support_measure(self, d: int) -> float:
        if self.kind == "cube_pair":
            return 4 * (2 * self.A) ** d
        if self.kind == "slab":
            return 2 * (2 * self.A) * 2 ** (d - 1)
        if self.kind == "kawahara_window":
            return 4.0
        raise ValueError("smooth_perturbation has no indicator measure")


def _positive_mask(family: DataFamily, grid: GridSpec) -> np.ndarray:
    """Half-open indicator of the positive-frequency component."""
    ax = grid.axis()
    N, A = family.N, family.A

    def interval(a, b):
        return (ax >= a) & (ax < b)

    if family.kind == "kawahara_window":
        return interval(N - 1, N + 1)

    if family.kind == "cube_pair":
        first = interval(N - A, N + A) | interval(2 * N - A, 2 * N + A)
        trans = interval(-A, A)
    else:  # slab
        first = interval(N - A, N + A)
        trans = interval(-1.0, 1.0)

    mask = first
    for _ in range(grid.d - 1):
        mask = mask[..., None] & trans
    return mask


def _mirror_mask(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    d = mask.ndim
    out[(slice(1, None),) * d] = mask[(slice(None, 0, -1),) * d]
    return out


def build_data(family: DataFamily, grid: GridSpec) -> SpectralField:
    """Sample the family on the grid: amplitude times the support indicator.

    The support must fit strictly inside the grid.
    """
    if family.kind == "kawahara_window" and grid.d != 1:
        raise ValueError("kawahara_window data is one-dimensional")
    if family.outer_radius() >= grid.extent:
        raise ValueError(
            f"family support radius {family.outer_radius():g} exceeds grid "
            f"extent {grid.extent:g}"
        )
    amp = family.amplitude(grid.d)
    if family.kind == "smooth_perturbation":
        r2 = grid.radius2()
        ax = grid.axis()
        inside = np.abs(ax) <= family.N
        box_mask = inside
        for _ in range(grid.d - 1):
            box_mask = box_mask[..., None] & inside
        values = np.where(box_mask, amp * np.exp(-r2 / 2.0), 0.0)
    else:
        pos = _positive_mask(family, grid)
        values = amp * (pos | _mirror_mask(pos)).astype(float)

    nz = np.nonzero(values)
    box = None
    if nz[0].size:
        box = Box(tuple(int(a.min()) for a in nz), tuple(int(a.max()) for a in nz))
    return make_field(grid, values, support_box=box, real_data=True)


def closed_form_norms(family: DataFamily, d: int) -> dict[str, float]:
    """Continuum norms of the family data (no grid): FL1, L2, and their max.

    Used by parameter choosers and condition scans where building the grid
    would be wasteful.
    """
    amp = family.amplitude(d)
    if family.kind == "smooth_perturbation":
        erf_half = math.erf(family.N / math.sqrt(2.0))
        fl1 = family.amp * erf_half**d
        l2 = family.amp * (4 * math.pi) ** (-d / 4) * math.erf(family.N) ** (d / 2)
    else:
        measure = family.support_measure(d)
        fl1 = amp * measure
        l2 = amp * math.sqrt(measure)
    return {"FL1": fl1, "L2": l2, "D": max(fl1, l2)}
