"""Uniform frequency grids, spectral fields, norms, and convolution algebra.

Functions are represented by samples of their Fourier transform on a uniform
grid covering [-extent, extent)^d.  All quadrature is plain Riemann summation
with weight h^d, which is exact up to boundary effects for the indicator-type
data used throughout.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "GridSpec",
    "Box",
    "SpectralField",
    "make_grid",
    "make_field",
    "zero_field",
    "norm",
    "convolve",
    "convolve_arrays",
    "conj_reflect",
    "hermitian_defect",
    "scale_field",
    "ConvolutionOverflowError",
]


class ConvolutionOverflowError(ValueError):
    """Raised when a convolution result would not fit on the grid."""


# Transform-based convolution takes over above this many grid nodes.
DIRECT_CONV_MAX_NODES = 256


@dataclass(frozen=True)
class Box:
    """Axis-aligned inclusive index box marking the support of a field."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box lo/hi dimension mismatch")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty box: lo={self.lo} hi={self.hi}")

    @property
    def d(self) -> int:
        return len(self.lo)

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(l, h + 1) for l, h in zip(self.lo, self.hi))

    def contains(self, idx) -> bool:
        return all(l <= i <= h for l, i, h in zip(self.lo, idx, self.hi))

    def within_grid(self, points: int) -> bool:
        return all(l >= 0 for l in self.lo) and all(h < points for h in self.hi)

    def hull(self, other: "Box") -> "Box":
        return Box(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def minkowski(self, other: "Box", half: int) -> "Box":
        """Index box of {i + j - half}: the support box of a convolution."""
        return Box(
            tuple(a + b - half for a, b in zip(self.lo, other.lo)),
            tuple(a + b - half for a, b in zip(self.hi, other.hi)),
        )

    def reflect(self, points: int) -> "Box":
        """Index box under k -> points - k (index 0 has no mirror node)."""
        return Box(
            tuple(points - h for h in self.hi),
            tuple(points - max(l, 1) for l in self.lo),
        )


@dataclass(frozen=True)
class GridSpec:
    """Uniform frequency grid on [-extent, extent)^d with an even node count."""

    d: int
    extent: float
    points: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"unsupported dimension d={self.d}")
        if self.extent <= 0:
            raise ValueError("grid extent must be positive")
        if self.points % 2 != 0 or self.points < 8:
            raise ValueError("points must be even and >= 8")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.points

    @property
    def half(self) -> int:
        return self.points // 2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.d

    @property
    def size(self) -> int:
        return self.points**self.d

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis; node k sits at (k - G/2) h."""
        return (np.arange(self.points) - self.half) * self.h

    def coord_arrays(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij")

    def radius2(self) -> np.ndarray:
        """|xi|^2 on the grid."""
        return _grid_radius2(self)


@functools.lru_cache(maxsize=32)
def _grid_radius2(grid: GridSpec) -> np.ndarray:
    ax2 = grid.axis() ** 2
    out = np.zeros(grid.shape)
    for a in range(grid.d):
        shape = [1] * grid.d
        shape[a] = grid.points
        out = out + ax2.reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralField:
    """Complex samples of a Fourier transform on a grid.  Immutable.

    ``support_box``, when present, contains every nonzero index.  A field
    tagged ``real_data`` is Hermitian-symmetric up to grid reflection.
    """

    grid: GridSpec
    values: np.ndarray
    support_box: Optional[Box] = None
    real_data: bool = False

    def nonzero_box(self) -> Optional[Box]:
        """Tight bounding box of the nonzero entries (None if all zero)."""
        idx = np.nonzero(self.values)
        if idx[0].size == 0:
            return None
        return Box(tuple(int(a.min()) for a in idx), tuple(int(a.max()) for a in idx))

    def box_or_scan(self) -> Optional[Box]:
        return self.support_box if self.support_box is not None else self.nonzero_box()


def make_grid(d: int, extent: float, points: int) -> GridSpec:
    """Grid over [-extent, extent)^d with the given even node count per axis."""
    return GridSpec(d=d, extent=float(extent), points=int(points))


def make_field(
    grid: GridSpec,
    values: np.ndarray,
    support_box: Optional[Box] = None,
    real_data: bool = False,
) -> SpectralField:
    vals = np.ascontiguousarray(values, dtype=np.complex128)
    if vals.shape != grid.shape:
        raise ValueError(f"values shape {vals.shape} != grid shape {grid.shape}")
    vals.setflags(write=False)
    f = SpectralField(grid=grid, values=vals, support_box=support_box, real_data=real_data)
    if real_data and hermitian_defect(f) > 1e-12:
        raise ValueError("field tagged real-data is not Hermitian-symmetric")
    return f


def zero_field(grid: GridSpec) -> SpectralField:
    return make_field(grid, np.zeros(grid.shape, dtype=np.complex128))


def scale_field(f: SpectralField, lam: complex) -> SpectralField:
    return make_field(f.grid, lam * f.values, support_box=f.support_box)


def norm(field: SpectralField, which: str, s: float | None = None) -> float:
    """Riemann-sum norm of the function the field represents.

    ``which`` is one of ``L2``, ``FL1``, ``FLinf``, ``Hs`` (the latter needs
    the Sobolev index ``s``).  An all-zero field has norm 0.
    """
    v = field.values
    hd = field.grid.h**field.grid.d
    if which == "L2":
        return float(np.sqrt(np.sum(np.abs(v) ** 2) * hd))
    if which == "FL1":
        return float(np.sum(np.abs(v)) * hd)
    if which == "FLinf":
        return float(np.max(np.abs(v))) if v.size else 0.0
    if which == "Hs":
        if s is None:
            raise ValueError("Hs norm needs the index s")
        w = (1.0 + field.grid.radius2()) ** s
        return float(np.sqrt(np.sum(w * np.abs(v) ** 2) * hd))
    raise ValueError(f"unknown norm {which!r}")


def hermitian_defect(field: SpectralField) -> float:
    """Relative sup deviation from u(-xi) = conj(u(xi)) on the paired sublattice."""
    v = field.values
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0:
        return 0.0
    inner = (slice(1, None),) * field.grid.d
    flipped = v[(slice(None, 0, -1),) * field.grid.d]
    defect = float(np.max(np.abs(v[inner] - np.conj(flipped))))
    return defect / scale


def conj_reflect(field: SpectralField) -> SpectralField:
    """Frequency-side conjugation: out(xi) = conj(f(-xi)).

    The unpaired lowest node (index 0 along any axis, coordinate -extent) has
    no mirror on the grid and maps to zero.
    """
    g = field.grid
    out = np.zeros(g.shape, dtype=np.complex128)
    inner = (slice(1, None),) * g.d
    out[inner] = np.conj(field.values[(slice(None, 0, -1),) * g.d])
    box = field.box_or_scan()
    # a box confined to an unpaired index-0 plane reflects to nothing
    rbox = box.reflect(g.points) if box is not None and min(box.hi) >= 1 else None
    return make_field(g, out, support_box=rbox)


def _next_fast_len(n: int) -> int:
    """Smallest 5-smooth integer >= n (keeps FFT sizes cheap)."""
    if n <= 6:
        return max(n, 1)
    if not (n & (n - 1)):
        return n
    best = 1 << n.bit_length()
    p5 = 1
    while p5 < best:
        p35 = p5
        while p35 < best:
            q = -(-n // p35)
            cand = p35 * (1 << (q - 1).bit_length())
            if n <= cand < best:
                best = cand
            if p35 >= n:
                break
            p35 *= 3
        if p5 >= n:
            break
        p5 *= 5
    return best


def _conv_fft(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    """Full linear convolution of two small arrays via zero-padded FFT."""
    out_shape = tuple(s1 + s2 - 1 for s1, s2 in zip(a1.shape, a2.shape))
    fshape = tuple(_next_fast_len(s) for s in out_shape)
    c = np.fft.ifftn(np.fft.fftn(a1, fshape) * np.fft.fftn(a2, fshape))
    return c[tuple(slice(0, s) for s in out_shape)]


def _conv_direct(v1: np.ndarray, v2: np.ndarray, half: int) -> np.ndarray:
    """Direct-summation convolution (self-check route for small grids)."""
    out = np.zeros(v1.shape, dtype=np.complex128)
    nz = np.nonzero(v1)
    idx2 = np.nonzero(v2)
    vals2 = v2[idx2]
    for j in zip(*nz):
        target = tuple(jj + i2 - half for jj, i2 in zip(j, idx2))
        np.add.at(out, target, v1[j] * vals2)
    return out


def convolve_arrays(
    v1: np.ndarray,
    b1: Optional[Box],
    v2: np.ndarray,
    b2: Optional[Box],
    grid: GridSpec,
    route: str = "auto",
) -> tuple[np.ndarray, Optional[Box]]:
    """Array-level convolution; see ``convolve``.  Boxes may be None (zero)."""
    if b1 is None or b2 is None:
        return np.zeros(grid.shape, dtype=np.complex128), None
    out_box = b1.minkowski(b2, grid.half)
    if not out_box.within_grid(grid.points):
        raise ConvolutionOverflowError(
            f"convolution support {out_box} exceeds grid [0, {grid.points - 1}]"
        )
    hd = grid.h**grid.d
    if route == "auto":
        route = "direct" if grid.size < DIRECT_CONV_MAX_NODES else "fft"
    if route == "direct":
        out = _conv_direct(v1, v2, grid.half) * hd
    elif route == "fft":
        c = _conv_fft(v1[b1.slices()], v2[b2.slices()]) * hd
        out = np.zeros(grid.shape, dtype=np.complex128)
        out[out_box.slices()] = c
    else:
        raise ValueError(f"unknown route {route!r}")
    return out, out_box


def convolve(f: SpectralField, g: SpectralField, route: str = "auto") -> SpectralField:
    """Quadrature-weighted convolution (f*g)(xi) = sum_eta f(eta) g(xi-eta) h^d.

    The combined support must fit on the grid; anything that would wrap
    around raises ConvolutionOverflowError instead of silently aliasing.
    ``route`` forces ``fft`` or ``direct`` (the two agree to 1e-10; small
    grids default to direct summation).
    """
    if f.grid != g.grid:
        raise ValueError("convolve requires identical grids")
    out, out_box = convolve_arrays(
        f.values, f.box_or_scan(), g.values, g.box_or_scan(), f.grid, route
    )
    if out_box is None:
        return zero_field(f.grid)
    return make_field(f.grid, out, support_box=out_box)
