"""Independent reference computations.

``brute_leading_iterate`` and ``brute_iterate3`` re-derive the closed-form
iterates from the Duhamel integral with their own index arithmetic and their
own oscillatory weights (nested integrals by Gauss-Legendre quadrature) - no
code shared with the engine's closed forms.  ``step_solver`` is a full
integrating-factor RK4 pseudo-spectral time stepper, and
``general_data_experiment`` runs the perturbed-data comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .equations import EquationSpec
from .families import DataFamily, build_data
from .picard import iterate_series, series_sum
from .spectral import (
    Box,
    GridSpec,
    SpectralField,
    hermitian_defect,
    make_field,
    norm as field_norm,
)

__all__ = [
    "brute_leading_iterate",
    "brute_iterate3",
    "step_solver",
    "SolverResult",
    "general_data_experiment",
]

BRUTE_TUPLE_BUDGET = 2**24


def _phi_brute(t: float, M: np.ndarray) -> np.ndarray:
    """(1 - exp(-i t M)) / (i M), series for small arguments.  Recomputed
    from scratch on purpose (the engine uses a different stable form)."""
    x = t * M
    small = np.abs(x) < 1e-5
    out = np.empty(np.shape(M), dtype=np.complex128)
    Msafe = np.where(small, 1.0, M)
    out = (1.0 - np.exp(-1j * t * Msafe)) / (1j * Msafe)
    xs = x[small]
    out[small] = t * (1.0 - 0.5j * xs - xs * xs / 6.0 + 1j * xs**3 / 24.0)
    return out


def _reflect_conj(vals: np.ndarray) -> np.ndarray:
    d = vals.ndim
    out = np.zeros_like(vals)
    out[(slice(1, None),) * d] = np.conj(vals[(slice(None, 0, -1),) * d])
    return out


def _term_table(eq: EquationSpec, u0: SpectralField):
    """Sign patterns and per-slot arrays for the tuple expansion."""
    p = eq.p
    if eq.nonlinearity.real_reduction:
        patterns = list(itertools.product((1.0, -1.0), repeat=p))
        arrays = {1.0: u0.values, -1.0: _reflect_conj(u0.values)}
        slots = [[arrays[s] for s in pat] for pat in patterns]
        return patterns, slots
    pat = tuple(float(s) for s in eq.slot_sigmas())
    refl = _reflect_conj(u0.values)
    return [pat], [[u0.values if s > 0 else refl for s in pat]]


def _padded(vals: np.ndarray, G: int, d: int) -> np.ndarray:
    """Embed into a (3G,)^d array at offset G so that arbitrary shifted
    reversed reads stay in range."""
    big = np.zeros((3 * G,) * d, dtype=vals.dtype)
    big[(slice(G, 2 * G),) * d] = vals
    return big


def brute_leading_iterate(
    eq: EquationSpec, u0: SpectralField, t: float, window: Box
) -> SpectralField:
    """I_p on the window by an exhaustive tuple scan (p in {2, 3})."""
    p = eq.p
    grid = u0.grid
    G, half, d = grid.points, grid.half, grid.d
    if G**p > BRUTE_TUPLE_BUDGET:
        raise ValueError(f"tuple budget exceeded: G^p = {G**p}")
    if p == 3 and d != 1:
        raise NotImplementedError("brute p = 3 scan is one-dimensional")
    if p not in (2, 3):
        raise ValueError("brute scan implemented for p in {2, 3}")

    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    mu_arr = mu if isinstance(mu, np.ndarray) else np.full(grid.shape, complex(mu))
    patterns, slot_arrays = _term_table(eq, u0)

    axes = [range(l, h + 1) for l, h in zip(window.lo, window.hi)]
    out = np.zeros(grid.shape, dtype=np.complex128)
    phi_pad = _padded(phi.astype(complex), G, d).real

    for pat, slots in zip(patterns, slot_arrays):
        if p == 2:
            f2_pad = _padded(slots[1], G, d)
            for k in itertools.product(*axes):
                # w(j) = f2(k + half - j): reversed slices of the padded copy
                sl = tuple(slice(G + ka + half, ka + half, -1) for ka in k)
                w2 = f2_pad[sl]
                phi2 = phi_pad[sl]
                M = phi[k] - pat[0] * phi - pat[1] * phi2
                out[k] += np.sum(slots[0] * w2 * _phi_brute(t, M))
        else:
            f1 = slots[0]
            nz1 = np.flatnonzero(f1)
            f3_pad = _padded(slots[2], G, 1)
            for (k,) in itertools.product(*axes):
                acc = 0.0 + 0.0j
                for i1 in nz1:
                    r = k + G - i1  # i3 = r - i2
                    w3 = f3_pad[r + G : r : -1]
                    phi3 = phi_pad[r + G : r : -1]
                    M = phi[k] - pat[0] * phi[i1] - pat[1] * phi - pat[2] * phi3
                    acc += f1[i1] * np.sum(slots[1] * w3 * _phi_brute(t, M))
                out[k] += acc

    hd = grid.h ** ((p - 1) * d)
    coeff = eq.nonlinearity.coefficient
    wsl = window.slices()
    final = np.zeros(grid.shape, dtype=np.complex128)
    final[wsl] = coeff * np.exp(1j * t * phi[wsl]) * mu_arr[wsl] * out[wsl] * hd
    return make_field(grid, final, support_box=window)


def _gl_nodes(t: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * t * (x + 1.0), 0.5 * t * w


def brute_iterate3(
    eq: EquationSpec, u0: SpectralField, t: float, window: Box, gl_nodes: int | None = None
) -> SpectralField:
    """I_3 for p = 2 equations: outer Duhamel integral by Gauss-Legendre over
    brute I_2 snapshots, products by direct summation.  One-dimensional."""
    if eq.p != 2:
        raise ValueError("brute_iterate3 applies to p = 2 equations")
    grid = u0.grid
    if grid.d != 1:
        raise NotImplementedError("brute_iterate3 is one-dimensional")
    G, half = grid.points, grid.half
    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    mu_arr = mu if isinstance(mu, np.ndarray) else np.full(grid.shape, complex(mu))
    coeff = eq.nonlinearity.coefficient
    rr = eq.nonlinearity.real_reduction
    sig = eq.slot_sigmas()

    if gl_nodes is None:
        sup_phase = float(np.max(np.abs(phi))) * t
        gl_nodes = max(48, int(1.5 * sup_phase) + 8)
        if gl_nodes > 400:
            raise ValueError(
                f"oscillation t sup|phi| = {sup_phase:.3g} needs {gl_nodes} nodes; "
                "reduce t or the grid extent"
            )
    nodes, wts = _gl_nodes(t, gl_nodes)

    full = Box((0,), (G - 1,))

    def transform(vals: np.ndarray, s: int) -> np.ndarray:
        if rr:
            return vals + _reflect_conj(vals)
        return vals if s > 0 else _reflect_conj(vals)

    def direct_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(G, dtype=np.complex128)
        nza = np.flatnonzero(a)
        nzb = np.flatnonzero(b)
        for j in nza:
            tgt = j + nzb - half
            ok = (tgt >= 0) & (tgt < G)
            np.add.at(out, tgt[ok], a[j] * b[nzb[ok]])
        return out * grid.h

    acc = np.zeros(G, dtype=np.complex128)
    for tp, wq in zip(nodes, wts):
        I1 = np.exp(1j * tp * phi) * u0.values
        I2 = brute_leading_iterate(eq, u0, tp, full).values
        # N(I_1, I_2) + N(I_2, I_1)
        prod = direct_conv(transform(I1, sig[0]), transform(I2, sig[1]))
        prod += direct_conv(transform(I2, sig[0]), transform(I1, sig[1]))
        acc += wq * np.exp(-1j * tp * phi) * mu_arr * prod

    vals = np.zeros(G, dtype=np.complex128)
    wsl = window.slices()
    vals[wsl] = coeff * np.exp(1j * t * phi[wsl]) * acc[wsl]
    return make_field(grid, vals, support_box=window)


# ---------------------------------------------------------------------------
# full pseudo-spectral time stepping
# ---------------------------------------------------------------------------


@dataclass
class SolverResult:
    field: SpectralField
    steps: int
    dt: float
    dropped_mass: float  # largest per-step projected-out FL1 fraction
    sup_norms: dict[str, float] = dc_field(default_factory=dict)
    hermitian_defect_max: float = 0.0


def _projected_product(
    factors: list[np.ndarray], grid: GridSpec
) -> tuple[np.ndarray, float]:
    """Linear convolution of all factors via zero-padded FFT, projected back
    onto the grid.  Returns the grid part and the discarded FL1 fraction."""
    G, d = grid.points, grid.d
    p = len(factors)
    L = p * G
    # 5-smooth-ish padding: next power-of-two multiple is fine here
    Lfast = 1 << (L - 1).bit_length()
    fshape = (Lfast,) * d
    spec = np.fft.fftn(factors[0], fshape)
    for f in factors[1:]:
        spec = spec * np.fft.fftn(f, fshape)
    conv = np.fft.ifftn(spec)
    full = conv[tuple(slice(0, p * (G - 1) + 1) for _ in range(d))]
    lo = (p - 1) * (G // 2)
    keep = full[tuple(slice(lo, lo + G) for _ in range(d))]
    total = float(np.sum(np.abs(full)))
    kept = float(np.sum(np.abs(keep)))
    dropped = 0.0 if total == 0 else (total - kept) / total
    return keep * grid.h ** ((p - 1) * d), dropped


def step_solver(
    eq: EquationSpec,
    u0: SpectralField,
    T: float,
    dt: float,
    include_mass: bool | None = None,
    enforce_radius: bool = True,
    track: tuple[tuple[str, float | None], ...] = (),
) -> SolverResult:
    """March the frequency-side equation to time T with integrating-factor
    classical RK4: exact linear propagation composed with explicit stages on
    the transformed nonlinearity (mass term included when the equation
    carries one), products dealiased by zero-padded convolution projected
    back onto the grid.

    ``track`` lists (norm, s) pairs whose sup over all steps is recorded.
    Diverging runs (FL1 beyond 10x the fixed-point ball) raise RuntimeError.
    """
    grid = u0.grid
    phi = eq.dispersion.phi_grid(grid)
    mu = eq.nonlinearity.mu_grid(grid)
    coeff = eq.nonlinearity.coefficient
    p = eq.p
    if include_mass is None:
        include_mass = eq.mass_term
    rr = eq.nonlinearity.real_reduction

    d_norm = max(field_norm(u0, "L2"), field_norm(u0, "FL1"))
    mu_max = float(np.max(np.abs(mu))) if isinstance(mu, np.ndarray) else 1.0
    if enforce_radius:
        from .bounds import contraction_time

        t_star = contraction_time(p, d_norm, mu_max)
        if T > t_star:
            raise ValueError(
                f"T = {T:g} outside the guaranteed existence time {t_star:g}; "
                "scale the data or pass enforce_radius=False"
            )
    blowup_gate = 10.0 * 2.0 * max(d_norm, 1e-300)

    def nonlinear(w: np.ndarray) -> tuple[np.ndarray, float]:
        if rr:
            base = w + _reflect_conj(w)
            factors = [base] * p
        else:
            refl = None
            factors = []
            for s in eq.slot_sigmas():
                if s > 0:
                    factors.append(w)
                else:
                    if refl is None:
                        refl = _reflect_conj(w)
                    factors.append(refl)
        prod, dropped = _projected_product(factors, grid)
        out = coeff * (mu * prod)
        if include_mass:
            out = out + 0.5j * (w - _reflect_conj(w))
        return out, dropped

    n_steps = max(1, int(math.ceil(T / dt - 1e-12)))
    h = T / n_steps
    E = np.exp(1j * (h / 2.0) * phi)
    E2 = E * E

    w = u0.values.copy()
    dropped_max = 0.0
    herm_max = hermitian_defect(u0) if eq.preserves_real_data else 0.0
    sup: dict[str, float] = {}

    def record(wv):
        nonlocal herm_max
        fld = make_field(grid, wv)
        for which, s in track:
            key = which if s is None else f"{which}({s:g})"
            sup[key] = max(sup.get(key, 0.0), field_norm(fld, which, s=s))
        if eq.preserves_real_data:
            herm_max = max(herm_max, hermitian_defect(fld))

    record(w)
    for _ in range(n_steps):
        # classical RK4 on z(tau) = e^{-i tau phi} w(t + tau)
        k1, d1 = nonlinear(w)
        a = E * (w + 0.5 * h * k1)
        k2, d2 = nonlinear(a)
        b = E * w + 0.5 * h * k2
        k3, d3 = nonlinear(b)
        c = E2 * w + h * E * k3
        k4, d4 = nonlinear(c)
        w = E2 * w + (h / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
        dropped_max = max(dropped_max, d1, d2, d3, d4)
        fl1 = float(np.sum(np.abs(w))) * grid.h**grid.d
        if not np.isfinite(fl1) or fl1 > blowup_gate:
            raise RuntimeError(
                f"time step unstable: FL1 = {fl1:.3g} beyond 10x the "
                f"fixed-point ball {blowup_gate / 10:.3g}"
            )
        record(w)

    return SolverResult(
        field=make_field(grid, w),
        steps=n_steps,
        dt=h,
        dropped_mass=dropped_max,
        sup_norms=sup,
        hermitian_defect_max=herm_max,
    )


# ---------------------------------------------------------------------------
# perturbed-data experiment
# ---------------------------------------------------------------------------


def general_data_experiment(
    eq: EquationSpec,
    family: DataFamily,
    grid: GridSpec,
    t: float,
    s: float,
    pert_amp: float = 0.05,
    method: str = "series",
    n_max: int = 5,
    quadrature_nodes: int = 17,
    dt_factor: float = 0.02,
) -> dict:
    """Evolve the family data u0 and its perturbation v0 = u0 + phi_N (the
    canonical Gaussian truncated to the family's frequency box) and report
    the lower-bound comparison

        sup_t ||v||_B >= 1/2 sup_t ||u||_B - ||phi||_{L2 ^ FL1}

    together with ||v(0) - phi - u0||_{H^s} (the truncation defect, which
    vanishes as N grows).
    """
    u0 = build_data(family, grid)
    pert = DataFamily("smooth_perturbation", N=family.N, amp=pert_amp)
    phi_n = build_data(pert, grid)
    untrunc = DataFamily(
        "smooth_perturbation", N=grid.extent - grid.h, amp=pert_amp
    )
    phi_full = build_data(untrunc, grid)
    v0 = make_field(grid, u0.values + phi_n.values)

    phi_d = max(field_norm(phi_full, "L2"), field_norm(phi_full, "FL1"))
    trunc_defect = field_norm(
        make_field(grid, phi_n.values - phi_full.values), "Hs", s=s
    )

    report: dict = {
        "N": family.N,
        "t": t,
        "pert_amp": pert_amp,
        "phi_D": phi_d,
        "trunc_defect_Hs": trunc_defect,
        "method": method,
    }

    if method == "series":
        its_u = iterate_series(eq, u0, t, n_max, quadrature_nodes)
        its_v = iterate_series(eq, v0, t, n_max, quadrature_nodes)
        sup_u = its_u.sup_norm_over_time("Hs", s=s)
        sup_v = its_v.sup_norm_over_time("Hs", s=s)
        report["series_ratio_u"] = series_sum(its_u, s=s).ratio_fl1
        diffs = []
        for n in its_u.levels:
            if n < 2:
                continue
            dv = its_u.arrays[n][-1] - its_v.arrays[n][-1]
            diffs.append(
                {
                    "n": n,
                    "diff_FL1": field_norm(make_field(grid, dv), "FL1"),
                    "diff_L2": field_norm(make_field(grid, dv), "L2"),
                }
            )
        report["level_diffs"] = diffs
        report["u0_FL1"] = field_norm(u0, "FL1")
    elif method == "solver":
        dt = dt_factor * t
        ru = step_solver(eq, u0, t, dt, track=(("Hs", s),))
        rv = step_solver(eq, v0, t, dt, track=(("Hs", s),))
        key = f"Hs({s:g})"
        sup_u, sup_v = ru.sup_norms[key], rv.sup_norms[key]
    else:
        raise ValueError(f"unknown method {method!r}")

    report["sup_u_Hs"] = sup_u
    report["sup_v_Hs"] = sup_v
    report["lower_bound_rhs"] = 0.5 * sup_u - phi_d
    report["lower_bound_ok"] = sup_v >= 0.5 * sup_u - phi_d
    return report
