"""Model-equation catalog: dispersion symbols, nonlinearity descriptors,
and the resonance (modulation) function with its envelope checks.

Conventions (fixed once, used everywhere): the linear flow multiplies a
frequency sample by exp(i t phi(xi)); in the p-linear term, unconjugated
factors enter the modulation function with a minus sign and conjugated ones
with a plus sign,

    M(xi_1..xi_p) = phi(sum xi_j) - sum_{unconj} phi(xi_j) + sum_{conj} phi(xi_l).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import DataFamily

__all__ = [
    "Dispersion",
    "Nonlinearity",
    "EquationSpec",
    "catalog",
    "modulation",
    "modulation_envelope_check",
]


@dataclass(frozen=True)
class Dispersion:
    """Dispersion symbol: radial power |xi|^alpha, or an odd 1-d polynomial."""

    kind: str  # "radial" | "poly1d"
    alpha: float = 0.0
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "radial":
            if self.alpha <= 0:
                raise ValueError("radial dispersion needs alpha > 0")
        elif self.kind == "poly1d":
            if not self.coeffs:
                raise ValueError("poly1d dispersion needs coefficients")
        else:
            raise ValueError(f"unknown dispersion kind {self.kind!r}")

    @property
    def is_even(self) -> bool:
        return self.kind == "radial"

    def phi(self, xi, d: int = 1) -> np.ndarray:
        """Evaluate the symbol; for d > 1, xi must be shaped (..., d)."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "radial":
            if d > 1:
                if xi.shape[-1] != d:
                    raise ValueError(f"expected points shaped (..., {d})")
                r = np.sqrt(np.sum(xi**2, axis=-1))
            else:
                r = np.abs(xi)
            return r**self.alpha
        if d != 1:
            raise ValueError("poly1d dispersion is one-dimensional")
        return np.polynomial.polynomial.polyval(xi, np.asarray(self.coeffs))

    def phi_axis(self, axis: np.ndarray) -> np.ndarray:
        if self.kind == "radial":
            return np.abs(axis) ** self.alpha
        return np.polynomial.polynomial.polyval(axis, np.asarray(self.coeffs))

    def phi_grid(self, grid) -> np.ndarray:
        if self.kind == "radial":
            return grid.radius2() ** (self.alpha / 2.0)
        if grid.d != 1:
            raise ValueError("poly1d dispersion is one-dimensional")
        return self.phi_axis(grid.axis())


@dataclass(frozen=True)
class Nonlinearity:
    """Degree-p monomial descriptor: m conjugated factors, an output
    multiplier, and the coupling coefficient."""

    p: int
    m: int
    coefficient: complex
    multiplier: str = "one"  # "one" | "omega" | "ixi"
    real_reduction: bool = False

    def __post_init__(self):
        if self.p < 2 or not (0 <= self.m <= self.p):
            raise ValueError("need p >= 2 and 0 <= m <= p")
        if self.multiplier not in ("one", "omega", "ixi"):
            raise ValueError(f"unknown multiplier {self.multiplier!r}")

    def mu_grid(self, grid) -> np.ndarray:
        if self.multiplier == "one":
            return np.ones(grid.shape)
        if self.multiplier == "omega":
            r2 = grid.radius2()
            return r2 / (1.0 + r2)
        if grid.d != 1:
            raise ValueError("derivative multiplier is one-dimensional")
        return 1j * grid.axis()


@dataclass(frozen=True)
class EquationSpec:
    name: str
    dispersion: Dispersion
    nonlinearity: Nonlinearity
    mass_term: bool = False
    params: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.nonlinearity.p

    @property
    def m(self) -> int:
        return self.nonlinearity.m

    def slot_sigmas(self) -> tuple[int, ...]:
        """Phase sign per factor slot: +1 unconjugated, -1 conjugated."""
        n = self.nonlinearity
        return (1,) * (n.p - n.m) + (-1,) * n.m

    @property
    def preserves_real_data(self) -> bool:
        """Whether iterates of Hermitian data stay Hermitian.

        True for the real fifth-order flow (odd symbol, real coefficient,
        no conjugations).  The reduced Boussinesq variable is genuinely
        complex even for real displacement data, so it does not qualify.
        """
        d, n = self.dispersion, self.nonlinearity
        return (
            d.kind == "poly1d"
            and n.m == 0
            and not n.real_reduction
            and abs(complex(n.coefficient).imag) == 0.0
            and n.multiplier == "ixi"
        )


def catalog(name: str, **params) -> EquationSpec:
    """Frozen equation specs by name.

    Names: nls_uu, nls_ubar2, nls_mod2, nls4_mod2, power_nls(alpha, p, m),
    boussinesq(p), kawahara(b).
    """
    aliases = {
        "nls_uu": dict(alpha=2.0, p=2, m=0),
        "nls_ubar2": dict(alpha=2.0, p=2, m=2),
        "nls_mod2": dict(alpha=2.0, p=2, m=1),
        "nls4_mod2": dict(alpha=4.0, p=2, m=1),
    }
    if name in aliases:
        _reject_extra(name, params)
        return _power_nls(name, **aliases[name])
    if name == "power_nls":
        alpha = float(params.pop("alpha"))
        p = int(params.pop("p"))
        m = int(params.pop("m", 0))
        _reject_extra(name, params)
        return _power_nls(f"power_nls(a={alpha:g},p={p},m={m})", alpha, p, m)
    if name == "boussinesq":
        p = int(params.pop("p"))
        _reject_extra(name, params)
        return EquationSpec(
            name=f"boussinesq(p={p})",
            dispersion=Dispersion("radial", alpha=2.0),
            nonlinearity=Nonlinearity(
                p=p, m=0, coefficient=-1j / 2**p, multiplier="omega", real_reduction=True
            ),
            mass_term=True,
            params={"p": p},
        )
    if name == "kawahara":
        b = params.pop("b")
        _reject_extra(name, params)
        if b not in (-1, 0, 1):
            raise ValueError("kawahara coefficient b must be -1, 0, or 1")
        return EquationSpec(
            name=f"kawahara(b={b:+d})",
            dispersion=Dispersion("poly1d", coeffs=(0.0, 0.0, 0.0, float(b), 0.0, 1.0)),
            nonlinearity=Nonlinearity(p=2, m=0, coefficient=-1.0, multiplier="ixi"),
            params={"b": b},
        )
    raise ValueError(f"unknown equation {name!r}")


def _reject_extra(name, params):
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")


def _power_nls(name: str, alpha: float, p: int, m: int) -> EquationSpec:
    return EquationSpec(
        name=name,
        dispersion=Dispersion("radial", alpha=alpha),
        nonlinearity=Nonlinearity(p=p, m=m, coefficient=-1j),
        params={"alpha": alpha, "p": p, "m": m},
    )


def modulation(eq: EquationSpec, *xis, d: int = 1) -> np.ndarray:
    """Phase mismatch M(xi_1 .. xi_p); broadcasts over stacked points.

    For d > 1 pass each xi as (..., d).
    """
    if len(xis) != eq.p:
        raise ValueError(f"{eq.name} expects {eq.p} frequencies")
    pts = [np.asarray(x, dtype=float) for x in xis]
    total = pts[0]
    for q in pts[1:]:
        total = total + q
    disp = eq.dispersion
    out = disp.phi(total, d)
    for sigma, q in zip(eq.slot_sigmas(), pts):
        out = out - sigma * disp.phi(q, d)
    return out


def _support_boxes(family: DataFamily, d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Continuum support components as (lo, hi) coordinate boxes."""
    N, A = family.N, family.A
    if family.kind == "cube_pair":
        comps = []
        for c in (N, 2 * N, -N, -2 * N):
            lo = np.full(d, -A)
            hi = np.full(d, A)
            lo[0] += c
            hi[0] += c
            comps.append((lo, hi))
        return comps
    if family.kind == "slab":
        comps = []
        for c in (N, -N):
            lo = np.concatenate([[c - A], -np.ones(d - 1)])
            hi = np.concatenate([[c + A], np.ones(d - 1)])
            comps.append((lo, hi))
        return comps
    if family.kind == "kawahara_window":
        return [(np.array([N - 1]), np.array([N + 1])), (np.array([-N - 1]), np.array([-N + 1]))]
    raise ValueError(f"no tuple constraint set for family {family.kind!r}")


def _output_window(family: DataFamily, d: int) -> tuple[np.ndarray, np.ndarray]:
    if family.kind == "cube_pair":
        return -np.full(d, family.A), np.full(d, family.A)
    if family.kind == "slab":
        lo = np.concatenate([[-family.A], -np.ones(d - 1)])
        return lo, -lo
    return np.array([-1.0]), np.array([1.0])


def _in_support(x: np.ndarray, comps) -> bool:
    return any(np.all(x >= lo) and np.all(x <= hi) for lo, hi in comps)


def _box_corners(lo: np.ndarray, hi: np.ndarray) -> list[np.ndarray]:
    d = len(lo)
    pts = []
    for mask in range(2**d):
        pts.append(np.array([hi[a] if mask >> a & 1 else lo[a] for a in range(d)]))
    pts.append((lo + hi) / 2.0)
    return pts


def modulation_envelope_check(
    eq: EquationSpec,
    family: DataFamily,
    sample_count: int = 2000,
    seed: int = 0,
    d: int = 1,
    beta: float = 1.0,
) -> dict:
    """Measure sup |M| over admissible frequency tuples against the predicted
    envelope (N^alpha for cube pairs, N^(alpha-beta) A^beta + 1 for slabs,
    N^4 for the fifth-order window).

    Tuples are the extreme corners plus ``sample_count`` seeded rejection
    samples; each xi_j lies in the family support and the tuple sum in the
    family's output window.
    """
    p = eq.p
    comps = _support_boxes(family, d)
    wlo, whi = _output_window(family, d)

    tuples: list[list[np.ndarray]] = []

    corner_sets = [pt for lo, hi in comps for pt in _box_corners(lo, hi)]
    window_pts = _box_corners(wlo, whi) + [np.zeros(d)]

    def push(tup):
        tuples.append(tup)

    # extreme corners: first p-1 slots on component corners, last slot closes
    # the sum onto a window corner
    def corner_rec(prefix):
        if len(prefix) == p - 1:
            total = np.sum(prefix, axis=0) if prefix else np.zeros(d)
            for sig in window_pts:
                last = sig - total
                if _in_support(last, comps):
                    push(list(prefix) + [last])
            return
        for c in corner_sets:
            corner_rec(prefix + [c])

    corner_rec([])

    rng = np.random.default_rng(seed)
    attempts = 0
    found = 0
    while found < sample_count and attempts < 50 * max(sample_count, 1):
        attempts += 1
        tup = []
        for _ in range(p - 1):
            lo, hi = comps[rng.integers(len(comps))]
            tup.append(lo + (hi - lo) * rng.random(d))
        target = wlo + (whi - wlo) * rng.random(d)
        last = target - np.sum(tup, axis=0)
        if _in_support(last, comps):
            push(tup + [last])
            found += 1

    if not tuples:
        raise ValueError("empty admissible tuple set for this family")

    pts = np.array(tuples)  # (n, p, d)
    if d == 1:
        args = [pts[:, j, 0] for j in range(p)]
    else:
        args = [pts[:, j, :] for j in range(p)]
    measured = float(np.max(np.abs(modulation(eq, *args, d=d))))

    if family.kind == "kawahara_window":
        predicted = family.N**4
    elif family.kind == "slab":
        alpha = eq.dispersion.alpha
        predicted = family.N ** (alpha - beta) * family.A**beta + 1.0
    else:
        predicted = family.N ** eq.dispersion.alpha
    return {
        "measured_sup": measured,
        "predicted": float(predicted),
        "ratio": measured / float(predicted),
        "tuples": len(tuples),
    }
