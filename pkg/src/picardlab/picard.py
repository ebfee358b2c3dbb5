"""Picard/Duhamel iterates on the frequency grid.

Two routes to the same objects: ``iterate_series`` computes every iterate
level by composite-Simpson time quadrature of the Duhamel integrand (the
p-fold products are frequency-side convolutions with hard anti-alias
guards), and ``leading_iterate_closed`` / ``iterate3_closed`` evaluate the
first nonlinear levels exactly in time by direct tuple summation with
oscillatory time weights.

The iterate recursion is

    I_1(t) = e^{i t phi} u0,
    I_n(t) = sum_{n_1+..+n_p = n} N_p(I_{n_1}, .., I_{n_p}),

and I_n vanishes unless n = l(p-1) + 1.  The bounded mass term of the
Boussinesq reduction is deliberately excluded from the recursion (the full
time stepper in ``oracles`` carries it).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .equations import EquationSpec
from .spectral import (
    Box,
    ConvolutionOverflowError,
    GridSpec,
    SpectralField,
    convolve_arrays,
    hermitian_defect,
    make_field,
    norm as field_norm,
)

__all__ = [
    "time_factor",
    "time_factor2",
    "IterateSet",
    "SeriesSum",
    "iterate_series",
    "leading_iterate_closed",
    "iterate3_closed",
    "series_sum",
    "active_levels",
    "coord_window",
    "QuadratureError",
]


class QuadratureError(RuntimeError):
    """Time quadrature did not reach the requested tolerance."""


def time_factor(t: float, M) -> np.ndarray:
    """Phi(t, M) = int_0^t e^{-i t' M} dt' = (1 - e^{-i t M}) / (i M).

    Evaluated as t sinc(tM/2) e^{-i tM/2}: stable for all M, Phi(t, 0) = t.
    """
    return _kernels.phi_factor_np(t, M)


def _h_poly(k: int, z: np.ndarray) -> np.ndarray:
    """H_k(z) = int_0^1 u^k e^{z u} du, stable for any complex z."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape, dtype=np.complex128)
    small = np.abs(z) <= 1.0
    zs = z[small]
    acc = np.zeros(zs.shape, dtype=np.complex128)
    term = np.ones(zs.shape, dtype=np.complex128)  # z^m / m!
    for m in range(0, 22):
        acc = acc + term / (k + m + 1)
        term = term * zs / (m + 1)
    out[small] = acc
    zb = z[~small]
    if zb.size:
        ez = np.exp(zb)
        h = (ez - 1.0) / zb
        for j in range(1, k + 1):
            h = (ez - j * h) / zb
        out[~small] = h
    return out


def time_factor2(t: float, a, b) -> np.ndarray:
    """Nested weight int_0^t e^{-i a t'} Phi(t', b) dt'.

    Equals (Phi(t, a) - Phi(t, a + b)) / (i b), with a series switch where
    that difference cancels.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape, dtype=np.complex128)
    small = np.abs(b) * t < 1e-4
    if small.any():
        asml = a[small]
        ib = 1j * b[small]
        j1 = t**2 * _h_poly(1, -1j * asml * t)
        j2 = t**3 * _h_poly(2, -1j * asml * t)
        j3 = t**4 * _h_poly(3, -1j * asml * t)
        out[small] = j1 - (ib / 2.0) * j2 + (ib * ib / 6.0) * j3
    big = ~small
    if big.any():
        ab, bb = a[big], b[big]
        out[big] = (time_factor(t, ab) - time_factor(t, ab + bb)) / (1j * bb)
    return out


def active_levels(p: int, n_max: int) -> list[int]:
    """Levels where the iterate is nonzero: n = l (p-1) + 1."""
    return [n for n in range(1, n_max + 1) if (n - 1) % (p - 1) == 0]


def _compositions(n: int, p: int, levels: set[int]):
    """Ordered p-tuples of active levels summing to n."""

    def rec(prefix, remaining, slots):
        if slots == 1:
            if remaining in levels:
                yield prefix + (remaining,)
            return
        for v in sorted(levels):
            if v > remaining - (slots - 1):
                break
            yield from rec(prefix + (v,), remaining - v, slots - 1)

    yield from rec((), n, p)


def coord_window(grid: GridSpec, half_widths) -> Box:
    """Index box of nodes with |coord_a| <= half_widths[a] (closed)."""
    hw = np.atleast_1d(np.asarray(half_widths, dtype=float))
    if hw.size == 1 and grid.d > 1:
        hw = np.repeat(hw, grid.d)
    if hw.size != grid.d:
        raise ValueError("one half-width per axis")
    ax = grid.axis()
    lo, hi = [], []
    for a in range(grid.d):
        lo.append(int(np.searchsorted(ax, -hw[a], side="left")))
        hi.append(int(np.searchsorted(ax, hw[a], side="right")) - 1)
        if hi[-1] < lo[-1]:
            raise ValueError("window contains no grid nodes")
    return Box(tuple(lo), tuple(hi))


def _creflect_values(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    d = v.ndim
    out[(slice(1, None),) * d] = np.conj(v[(slice(None, 0, -1),) * d])
    return out


def _reflect_box(box: Box | None, points: int) -> Box | None:
    if box is None or min(box.hi) < 1:
        return None
    return box.reflect(points)


def _nfold_box(box: Box, n: int, half: int) -> Box:
    return Box(
        tuple(n * l - (n - 1) * half for l in box.lo),
        tuple(n * h - (n - 1) * half for h in box.hi),
    )


def _cumulative_simpson(g: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative integral of samples g[k] at uniform spacing dt, 4th order.

    Even prefixes use composite Simpson; odd prefixes close with a 3/8 block
    (the first interval integrates the quadratic through the first three
    nodes).
    """
    K = g.shape[0]
    if K < 3:
        raise ValueError("need at least 3 time nodes")
    out = np.zeros_like(g)
    out[1] = dt * (5.0 * g[0] + 8.0 * g[1] - g[2]) / 12.0
    for k in range(2, K):
        if k % 2 == 0:
            out[k] = out[k - 2] + dt * (g[k - 2] + 4.0 * g[k - 1] + g[k]) / 3.0
        else:
            out[k] = out[k - 3] + dt * 0.375 * (
                g[k - 3] + 3.0 * g[k - 2] + 3.0 * g[k - 1] + g[k]
            )
    return out


@dataclass
class IterateSet:
    """Computed iterates I_1..I_{n_max} at shared time nodes.

    ``arrays[n]`` has shape (K,) + grid.shape; absent levels are identically
    zero.  Norms are taken at the final time.
    """

    equation: EquationSpec
    data: SpectralField
    t: float
    time_nodes: np.ndarray
    n_max: int
    arrays: dict[int, np.ndarray]
    boxes: dict[int, Box | None]
    hermitian_defects: dict[int, float] = dc_field(default_factory=dict)

    @property
    def grid(self) -> GridSpec:
        return self.data.grid

    @property
    def levels(self) -> list[int]:
        return sorted(self.arrays)

    def field_at(self, n: int, node: int = -1) -> SpectralField:
        if n not in self.arrays:
            return make_field(self.grid, np.zeros(self.grid.shape, np.complex128))
        return make_field(self.grid, self.arrays[n][node], support_box=self.boxes[n])

    def norm(self, n: int, which: str, s: float | None = None, node: int = -1) -> float:
        return field_norm(self.field_at(n, node), which, s=s)

    def sup_norm_over_time(self, which: str, s: float | None = None, n_min: int = 1) -> float:
        """sup over time nodes of the partial-sum norm (levels >= n_min)."""
        best = 0.0
        for k in range(len(self.time_nodes)):
            total = np.zeros(self.grid.shape, dtype=np.complex128)
            for n in self.levels:
                if n >= n_min:
                    total = total + self.arrays[n][k]
            best = max(best, field_norm(make_field(self.grid, total), which, s=s))
        return best


def _slot_plan(eq: EquationSpec):
    """Per-slot factor transform kinds for the series recursion."""
    if eq.nonlinearity.real_reduction:
        return ("sum",) * eq.p
    return tuple("id" if s > 0 else "reflect" for s in eq.slot_sigmas())


def _exchangeable(eq: EquationSpec) -> bool:
    plan = _slot_plan(eq)
    return all(k == plan[0] for k in plan)


def iterate_series(
    eq: EquationSpec,
    u0: SpectralField,
    t: float,
    n_max: int,
    quadrature_nodes: int = 17,
    check_tol: float | None = None,
) -> IterateSet:
    """Compute I_1..I_{n_max} at ``quadrature_nodes`` uniform times in [0, t].

    The p-fold products are evaluated as chained frequency convolutions on
    the zero-padded grid (loud failure on any would-be aliasing), the output
    multiplier and coupling coefficient are applied in frequency space, and
    conjugated slots use the reflection-conjugation transform.  With
    ``check_tol`` set, the run is repeated on a refined mesh and the two
    must agree in relative FL1 at every level (QuadratureError otherwise;
    the refined result is returned).
    """
    if check_tol is not None:
        coarse = iterate_series(eq, u0, t, n_max, quadrature_nodes)
        fine = iterate_series(eq, u0, t, n_max, 2 * quadrature_nodes - 1)
        for n in fine.levels:
            if n == 1:
                continue
            ref = fine.norm(n, "FL1")
            diff = field_norm(
                make_field(u0.grid, coarse.arrays[n][-1] - fine.arrays[n][-1]), "FL1"
            )
            if ref > 0 and diff / ref > check_tol:
                raise QuadratureError(
                    f"level {n}: K vs 2K disagreement {diff / ref:.2e} > {check_tol:g}"
                )
        return fine

    K = int(quadrature_nodes)
    if K < 9:
        raise ValueError("need at least 9 quadrature nodes")
    if t < 0:
        raise ValueError("t must be nonnegative")
    grid = u0.grid
    p = eq.p
    if eq.nonlinearity.m > 0 and not eq.dispersion.is_even:
        raise ValueError("conjugated factors need an even dispersion symbol")
    if eq.nonlinearity.real_reduction and hermitian_defect(u0) > 1e-10:
        raise ValueError("real-reduction equations need Hermitian data")

    data_box = u0.box_or_scan()
    if data_box is not None:
        base = data_box
        rbox = _reflect_box(data_box, grid.points)
        if rbox is not None:
            base = base.hull(rbox)
        nbox = _nfold_box(base, n_max, grid.half)
        if not nbox.within_grid(grid.points):
            raise ConvolutionOverflowError(
                f"grid too small for the {n_max}-fold sumset of the data support"
            )

    times = np.linspace(0.0, t, K)
    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    coeff = eq.nonlinearity.coefficient
    phase = np.exp(1j * times.reshape((K,) + (1,) * grid.d) * phi)

    levels = active_levels(p, n_max)
    arrays: dict[int, np.ndarray] = {1: phase * u0.values}
    boxes: dict[int, Box | None] = {1: data_box}

    transformed: dict[tuple[int, str], tuple[np.ndarray, Box | None]] = {}

    def slot_arrays(n_j: int, kind: str):
        key = (n_j, kind)
        if key not in transformed:
            vals, box = arrays[n_j], boxes[n_j]
            if kind == "id":
                transformed[key] = (vals, box)
            elif kind == "reflect":
                refl = np.stack([_creflect_values(vals[k]) for k in range(K)])
                transformed[key] = (refl, _reflect_box(box, grid.points))
            else:  # "sum"
                refl = np.stack([_creflect_values(vals[k]) for k in range(K)])
                rbox = _reflect_box(box, grid.points)
                hull = box.hull(rbox) if (box and rbox) else (box or rbox)
                transformed[key] = (vals + refl, hull)
        return transformed[key]

    plan = _slot_plan(eq)
    exch = _exchangeable(eq)

    for n in levels[1:]:
        comps: list[tuple[tuple[int, ...], int]] = []
        if exch:
            seen: dict[tuple[int, ...], int] = {}
            for comp in _compositions(n, p, set(levels)):
                key = tuple(sorted(comp))
                seen[key] = seen.get(key, 0) + 1
            comps = [(k, mult) for k, mult in sorted(seen.items())]
        else:
            comps = [(c, 1) for c in _compositions(n, p, set(levels))]

        total = np.zeros((K,) + grid.shape, dtype=np.complex128)
        out_box: Box | None = None
        for comp, mult in comps:
            slot_data = [slot_arrays(nj, kind) for nj, kind in zip(comp, plan)]
            # iterates above level 1 vanish at t'=0, so node 0 only matters
            # for the all-I_1 composition
            k_start = 0 if all(nj == 1 for nj in comp) else 1
            for k in range(k_start, K):
                acc, abox = slot_data[0][0][k], slot_data[0][1]
                for vals_j, box_j in slot_data[1:]:
                    acc, abox = convolve_arrays(acc, abox, vals_j[k], box_j, grid)
                total[k] += mult * acc
                if abox is not None:
                    out_box = abox if out_box is None else out_box.hull(abox)

        integrand = np.conj(phase) * (mu * total)
        if K > 1 and t > 0:
            J = _cumulative_simpson(integrand, times[1] - times[0])
        else:
            J = np.zeros_like(integrand)
        arrays[n] = coeff * phase * J
        boxes[n] = out_box

    itset = IterateSet(
        equation=eq,
        data=u0,
        t=t,
        time_nodes=times,
        n_max=n_max,
        arrays=arrays,
        boxes=boxes,
    )
    if eq.preserves_real_data and u0.real_data:
        for n in levels:
            itset.hermitian_defects[n] = hermitian_defect(itset.field_at(n))
    return itset


# ---------------------------------------------------------------------------
# closed-form leading terms
# ---------------------------------------------------------------------------


def _closed_form_terms(eq: EquationSpec, u0: SpectralField):
    """(signs, weights, factor arrays) for the exact tuple sums."""
    p = eq.p
    if eq.nonlinearity.real_reduction:
        if hermitian_defect(u0) > 1e-10:
            raise ValueError("real-reduction equations need Hermitian data")
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=p)))
        weights = np.full(signs.shape[0], 1.0)
        factors = [u0.values] * p
        return signs, weights, factors
    sigmas = eq.slot_sigmas()
    signs = np.array([[float(s) for s in sigmas]])
    weights = np.array([1.0])
    refl = None
    factors = []
    for s in sigmas:
        if s > 0:
            factors.append(u0.values)
        else:
            if refl is None:
                refl = _creflect_values(u0.values)
            factors.append(refl)
    return signs, weights, factors


def _support_intervals(v: np.ndarray) -> np.ndarray:
    """Maximal runs of nonzero entries of a 1-d array, as (k, 2) inclusive."""
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    breaks = np.flatnonzero(np.diff(nz) > 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [nz.size - 1]])
    return np.stack([nz[starts], nz[ends]], axis=1).astype(np.int64)


def _window_indices(window: Box, grid: GridSpec) -> np.ndarray:
    if not window.within_grid(grid.points):
        raise ValueError("output window is outside the grid")
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(window.lo, window.hi)]
    if grid.d == 1:
        return axes[0][:, None]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _feasible_triples(ivls, window_lo: int, window_hi: int, G: int, ordered: bool):
    """Class triples whose index sums can land in [window_lo, window_hi]+G."""
    if ordered:
        combos = itertools.product(*(range(iv.shape[0]) for iv in ivls))
        ivl_for = lambda j, qj: ivls[j][qj]  # noqa: E731
    else:
        combos = itertools.combinations_with_replacement(range(ivls[0].shape[0]), 3)
        ivl_for = lambda j, qj: ivls[0][qj]  # noqa: E731
    out = []
    for q in combos:
        lo = sum(ivl_for(j, qj)[0] for j, qj in enumerate(q))
        hi = sum(ivl_for(j, qj)[1] for j, qj in enumerate(q))
        if lo <= window_hi + G and hi >= window_lo + G:
            out.append(q)
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def _embed_window(grid: GridSpec, window: Box, out_idx: np.ndarray, vals: np.ndarray):
    full = np.zeros(grid.shape, dtype=np.complex128)
    if grid.d == 1:
        full[out_idx[:, 0]] = vals
    else:
        full[tuple(out_idx[:, a] for a in range(grid.d))] = vals
    return make_field(grid, full, support_box=window)


def leading_iterate_closed(
    eq: EquationSpec, u0: SpectralField, t: float, window: Box
) -> SpectralField:
    """Exact-in-time I_p on the window by direct tuple summation.

    Cost is O(|window| G^(p-1)) restricted to the data support; p in {2, 3}
    only, and the p = 3 sums are one-dimensional at desk scale.
    """
    p = eq.p
    if p not in (2, 3):
        raise ValueError("closed-form leading term implemented for p in {2, 3}")
    grid = u0.grid
    signs, weights, factors = _closed_form_terms(eq, u0)
    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    out_idx = _window_indices(window, grid)

    if p == 2:
        raw = _kernels.p2_window_sum(
            out_idx, factors[0], factors[1], phi, signs, weights, t, grid.half
        )
    else:
        if grid.d != 1:
            raise NotImplementedError("p = 3 closed form is one-dimensional")
        ki = out_idx[:, 0]
        cb = np.exp(-1j * t * phi[ki])
        u = np.exp(1j * t * phi)
        raw = np.zeros(ki.shape[0], dtype=np.complex128)
        if eq.nonlinearity.real_reduction:
            # identical factors, all 2^3 sign patterns: symmetric fast path
            ivl = _support_intervals(factors[0])
            triples = _feasible_triples(
                [ivl] * 3, int(ki.min()), int(ki.max()), grid.points, ordered=False
            )
            _kernels.p3_sum_symmetric(
                ki, cb, phi, u, factors[0], ivl, triples, 1.0, t, grid.points, raw
            )
        else:
            ivls = [_support_intervals(f) for f in factors]
            triples = _feasible_triples(
                ivls, int(ki.min()), int(ki.max()), grid.points, ordered=True
            )
            _kernels.p3_sum_general(
                ki, cb, phi, u, factors[0], factors[1], factors[2],
                ivls[0], ivls[1], ivls[2], triples, signs, weights, t,
                grid.points, raw,
            )

    hd = grid.h ** ((p - 1) * grid.d)
    coeff = eq.nonlinearity.coefficient
    sel = tuple(out_idx[:, a] for a in range(grid.d))
    mu_sel = mu[sel] if isinstance(mu, np.ndarray) else mu
    vals = coeff * np.exp(1j * t * phi[sel]) * mu_sel * raw * hd
    return _embed_window(grid, window, out_idx, vals)


def iterate3_closed(eq: EquationSpec, u0: SpectralField, t: float, window: Box) -> SpectralField:
    """Exact-in-time I_3 for quadratic (p = 2) equations on a 1-d window.

    I_3 = N(I_1, I_2) + N(I_2, I_1); the nested oscillatory integral is the
    closed-form ``time_factor2``.  Intended for oracle-scale grids.
    """
    if eq.p != 2:
        raise ValueError("iterate3_closed applies to p = 2 equations")
    grid = u0.grid
    if grid.d != 1:
        raise NotImplementedError("iterate3_closed is one-dimensional")
    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    mu_arr = mu if isinstance(mu, np.ndarray) else np.full(grid.shape, complex(mu))
    coeff = eq.nonlinearity.coefficient
    G, half = grid.points, grid.half

    rr = eq.nonlinearity.real_reduction
    if rr and hermitian_defect(u0) > 1e-10:
        raise ValueError("real-reduction equations need Hermitian data")
    sig1, sig2 = eq.slot_sigmas()

    # outer (slot of I_1, slot of I_2) sign classes and inner I_2 classes;
    # the real reduction expands every slot into both signs
    outer = list(itertools.product((1, -1), repeat=2)) if rr else [(sig1, sig2)]
    inner = list(itertools.product((1, -1), repeat=2)) if rr else [(sig1, sig2)]

    uvals = u0.values
    refl = _creflect_values(uvals)

    def slot_array(s: int) -> np.ndarray:
        return uvals if (rr or s > 0) else refl

    out_idx = _window_indices(window, grid)
    ki = out_idx[:, 0]
    out = np.zeros(ki.shape[0], dtype=np.complex128)
    i2_all = np.arange(G)

    for a_pos in (0, 1):  # N(I_1, I_2) and N(I_2, I_1)
        for so in outer:
            s_a = so[a_pos]
            s_b = so[1 - a_pos]  # sign of the I_2 slot
            beta = coeff if s_b > 0 else np.conj(coeff)
            a1 = slot_array(s_a)
            nz1 = np.flatnonzero(a1)
            if nz1.size == 0:
                continue
            for ti in inner:
                # conjugating the whole inner block flips its signs and
                # reflect-conjugates its factor arrays
                t2_eff, t3_eff = s_b * ti[0], s_b * ti[1]
                g2 = slot_array(t2_eff)
                g3 = slot_array(t3_eff)
                for a, k in enumerate(ki):
                    izeta = k + half - nz1
                    ok = (izeta >= 0) & (izeta < G)
                    if not ok.any():
                        continue
                    i1 = nz1[ok]
                    iz = izeta[ok]
                    b_out = phi[k] - s_a * phi[i1] - s_b * phi[iz]
                    i3 = iz[:, None] + half - i2_all[None, :]
                    valid = (i3 >= 0) & (i3 < G)
                    i3c = np.clip(i3, 0, G - 1)
                    pair = g2[None, :] * g3[i3c] * valid
                    b_in = (
                        s_b * phi[iz][:, None]
                        - t2_eff * phi[i2_all][None, :]
                        - t3_eff * phi[i3c]
                    )
                    W = time_factor2(t, b_out[:, None], b_in)
                    inner_sum = np.sum(pair * W, axis=1)
                    out[a] += beta * np.sum(a1[i1] * mu_arr[iz] * inner_sum)

    vals = coeff * np.exp(1j * t * phi[ki]) * mu_arr[ki] * out * grid.h**2
    return _embed_window(grid, window, out_idx, vals)


# ---------------------------------------------------------------------------
# series summation with tail control
# ---------------------------------------------------------------------------


@dataclass
class SeriesSum:
    """Partial sum of the iterate series at the final time plus a geometric
    tail estimate per norm."""

    field: SpectralField
    ratio_fl1: float
    tails: dict[str, float]

    def tail(self, which: str) -> float:
        return self.tails[which]


def series_sum(itset: IterateSet, s: float | None = None) -> SeriesSum:
    """Sum the stored levels at the final time.

    Requires observed geometric decay in FL1 between the last two active
    levels (ratio <= 1/2); refuses otherwise since the series may diverge at
    this time.  Tail estimates extrapolate each norm's own last ratio.
    """
    levels = itset.levels
    if len(levels) < 2:
        raise ValueError("need at least two computed levels for a tail estimate")
    n_last, n_prev = levels[-1], levels[-2]
    r_fl1 = _safe_ratio(itset.norm(n_last, "FL1"), itset.norm(n_prev, "FL1"))
    if not (r_fl1 <= 0.5):
        raise RuntimeError(
            f"outside convergence regime: FL1 level ratio {r_fl1:.3g} > 0.5 "
            f"between levels {n_prev} and {n_last}"
        )
    total = np.zeros(itset.grid.shape, dtype=np.complex128)
    box = None
    for n in levels:
        total = total + itset.arrays[n][-1]
        b = itset.boxes[n]
        if b is not None:
            box = b if box is None else box.hull(b)
    fld = make_field(itset.grid, total, support_box=box)

    tails: dict[str, float] = {}
    kinds = [("L2", None), ("FL1", None), ("FLinf", None)]
    if s is not None:
        kinds.append(("Hs", s))
    for which, sv in kinds:
        last = itset.norm(n_last, which, s=sv)
        prev = itset.norm(n_prev, which, s=sv)
        q = min(max(_safe_ratio(last, prev), r_fl1), 0.75)
        tails[which] = last * q / (1.0 - q)
    return SeriesSum(field=fld, ratio_fl1=r_fl1, tails=tails)


def _safe_ratio(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den
