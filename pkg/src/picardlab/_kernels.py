"""Hot inner loops for closed-form iterate tuple sums.

Each kernel exists twice: a scalar-loop version compiled with numba when it
is importable, and a vectorized pure-numpy twin.  The public names
(``p3_sum_general``, ``p3_sum_symmetric``) point at the numba build unless
the environment variable ``PICARDLAB_NO_NUMBA`` is set (or numba is
missing), in which case the numpy twins are used.  Both builds are always
importable for cross-checks and for benchmarks/bench_kernels.py.

The oscillatory time weight used throughout is

    Phi(t, M) = integral_0^t exp(-i t' M) dt' = (1 - exp(-i t M)) / (i M),

evaluated in the stable form t * sinc(tM/2) * exp(-i tM/2) (vectorized) or
with a small-argument series (scalar loops).
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("PICARDLAB_NO_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _FLAG not in {"1", "true", "yes"}
HAVE_NUMBA = False
if NUMBA_REQUESTED:
    try:
        from numba import njit, prange

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass

# threshold below which (1 - e^{-ix})/(ix) switches to its series
_SMALL = 1e-5


def phi_factor_np(t: float, M: np.ndarray) -> np.ndarray:
    """Vectorized Phi(t, M); exact and cancellation-free for any argument."""
    x = 0.5 * t * np.asarray(M, dtype=float)
    return t * np.sinc(x / np.pi) * np.exp(-1j * x)


def _ragged_arange(lo: np.ndarray, lens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate arange(lo[i], lo[i]+lens[i]) for all i.

    Returns (values, owner_row) with owner_row mapping back to i.
    """
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    owner = np.repeat(np.arange(lens.size), lens)
    starts = np.concatenate([[0], np.cumsum(lens)[:-1]])
    vals = np.arange(total, dtype=np.int64) - starts[owner] + lo[owner]
    return vals, owner


def _phi_masked(t: float, M: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Phi(t, M) given precomputed E = exp(-i t M) (unit phases)."""
    x = t * M
    out = np.empty(M.shape, dtype=np.complex128)
    small = np.abs(x) < _SMALL
    xs = x[small]
    out[small] = t * (1.0 - 0.5j * xs - xs * xs / 6.0)
    big = ~small
    out[big] = (1.0 - E[big]) / (1j * M[big])
    return out


# ---------------------------------------------------------------------------
# p = 2: window tuple sum, any dimension (vectorized; never the bottleneck)
# ---------------------------------------------------------------------------


def p2_window_sum(
    out_idx: np.ndarray,  # (n_out, d) int64 multi-indices
    f1: np.ndarray,
    f2: np.ndarray,
    phi: np.ndarray,
    signs: np.ndarray,  # (T, 2) of +-1
    weights: np.ndarray,  # (T,)
    t: float,
    half: int,
) -> np.ndarray:
    """sum_eta f1(eta) f2(xi - eta) * sum_T w_T Phi(t, phi(xi) - s1 phi(eta) - s2 phi(xi-eta))."""
    G = phi.shape[0]
    d = phi.ndim
    nz = np.nonzero(f1)
    f1v = f1[nz]
    phi1 = phi[nz]
    u1 = np.exp(1j * t * phi1)
    u1c = np.conj(u1)
    phif = phi.reshape(-1)
    f2f = f2.reshape(-1)
    out = np.zeros(out_idx.shape[0], dtype=np.complex128)
    for a in range(out_idx.shape[0]):
        k = out_idx[a]
        laxes = [k[ax] + half - nz[ax] for ax in range(d)]
        valid = np.ones(f1v.shape[0], dtype=bool)
        for l in laxes:
            valid &= (l >= 0) & (l < G)
        if not valid.any():
            continue
        flat = np.zeros(int(valid.sum()), dtype=np.int64)
        for l in laxes:
            flat = flat * G + l[valid]
        f2v = f2f[flat]
        live = f2v != 0
        if not live.any():
            continue
        flat = flat[live]
        f2v = f2v[live]
        P = f1v[valid][live] * f2v
        p1 = phi1[valid][live]
        p2 = phif[flat]
        v1 = u1[valid][live]
        v1c = u1c[valid][live]
        u2 = np.exp(1j * t * p2)
        b = phif[int(np.ravel_multi_index(tuple(k), phi.shape))]
        cb = np.exp(-1j * t * b)
        acc = np.zeros(P.shape, dtype=np.complex128)
        for tau in range(signs.shape[0]):
            s1, s2 = signs[tau]
            M = b - s1 * p1 - s2 * p2
            U = (v1 if s1 > 0 else v1c) * (u2 if s2 > 0 else np.conj(u2))
            acc += weights[tau] * _phi_masked(t, M, cb * U)
        out[a] = np.sum(P * acc)
    return out


# ---------------------------------------------------------------------------
# p = 3, d = 1: general terms (slot-specific factors, arbitrary sign rows)
# ---------------------------------------------------------------------------


def _p3_general_loops(out_idx, cb, phi, u, f1, f2, f3, ivl1, ivl2, ivl3, triples, signs, weights, t, G, out):
    T = signs.shape[0]
    for a in prange(out_idx.shape[0]):  # noqa: F821  (prange bound below)
        k = out_idx[a]
        R = k + G
        b = phi[k]
        cbv = cb[a]
        acc = 0.0 + 0.0j
        for tr in range(triples.shape[0]):
            q1 = triples[tr, 0]
            q2 = triples[tr, 1]
            q3 = triples[tr, 2]
            lo3 = ivl3[q3, 0]
            hi3 = ivl3[q3, 1]
            for i1 in range(ivl1[q1, 0], ivl1[q1, 1] + 1):
                f1v = f1[i1]
                if f1v == 0:
                    continue
                rem = R - i1
                jlo = rem - hi3
                if ivl2[q2, 0] > jlo:
                    jlo = ivl2[q2, 0]
                jhi = rem - lo3
                if ivl2[q2, 1] < jhi:
                    jhi = ivl2[q2, 1]
                if jhi < jlo:
                    continue
                u1 = u[i1]
                p1 = phi[i1]
                for i2 in range(jlo, jhi + 1):
                    f2v = f2[i2]
                    if f2v == 0:
                        continue
                    i3 = rem - i2
                    f3v = f3[i3]
                    if f3v == 0:
                        continue
                    P = f1v * f2v * f3v
                    p2 = phi[i2]
                    p3v = phi[i3]
                    u2 = u[i2]
                    u3 = u[i3]
                    tsum = 0.0 + 0.0j
                    for tau in range(T):
                        s1 = signs[tau, 0]
                        s2 = signs[tau, 1]
                        s3 = signs[tau, 2]
                        M = b - s1 * p1 - s2 * p2 - s3 * p3v
                        x = t * M
                        if -_SMALL < x < _SMALL:
                            Phi = t * (1.0 - 0.5j * x - x * x / 6.0)
                        else:
                            U1 = u1 if s1 > 0 else u1.conjugate()
                            U2 = u2 if s2 > 0 else u2.conjugate()
                            U3 = u3 if s3 > 0 else u3.conjugate()
                            Phi = (1.0 - cbv * U1 * U2 * U3) / (1j * M)
                        tsum += weights[tau] * Phi
                    acc += P * tsum
        out[a] = acc
    return out


# ---------------------------------------------------------------------------
# p = 3, d = 1: fully symmetric cosine case (identical factors, all 2^3 sign
# patterns with equal weight).  Unordered tuples with multiplicity; this is
# the production-hot path.
# ---------------------------------------------------------------------------


def _p3_symmetric_loops(out_idx, cb, phi, u, f, ivl, triples, term_weight, t, G, out):
    for a in prange(out_idx.shape[0]):  # noqa: F821
        k = out_idx[a]
        R = k + G
        b = phi[k]
        cbv = cb[a]
        acc = 0.0 + 0.0j
        for tr in range(triples.shape[0]):
            q1 = triples[tr, 0]
            q2 = triples[tr, 1]
            q3 = triples[tr, 2]
            same12 = q1 == q2
            same23 = q2 == q3
            lo3 = ivl[q3, 0]
            hi3 = ivl[q3, 1]
            for i1 in range(ivl[q1, 0], ivl[q1, 1] + 1):
                f1v = f[i1]
                if f1v == 0:
                    continue
                rem = R - i1
                jlo = rem - hi3
                if ivl[q2, 0] > jlo:
                    jlo = ivl[q2, 0]
                if same12 and i1 > jlo:
                    jlo = i1
                jhi = rem - lo3
                if ivl[q2, 1] < jhi:
                    jhi = ivl[q2, 1]
                if same23:
                    half_rem = rem // 2  # enforce i2 <= i3 within equal classes
                    if half_rem < jhi:
                        jhi = half_rem
                if jhi < jlo:
                    continue
                u1 = u[i1]
                p1 = phi[i1]
                for i2 in range(jlo, jhi + 1):
                    i3 = rem - i2
                    f2v = f[i2]
                    f3v = f[i3]
                    P = f1v * f2v * f3v
                    if P == 0:
                        continue
                    # orderings of the multiset {i1, i2, i3}
                    if same12 and same23:
                        if i1 == i2 and i2 == i3:
                            mult = 1.0
                        elif i1 == i2 or i2 == i3:
                            mult = 3.0
                        else:
                            mult = 6.0
                    elif (same12 and i2 == i1) or (same23 and i3 == i2):
                        mult = 3.0
                    else:
                        mult = 6.0
                    p2 = phi[i2]
                    p3v = phi[i3]
                    u2 = u[i2]
                    u3 = u[i3]
                    u12p = u1 * u2
                    u12m = u1 * u2.conjugate()
                    s12p = p1 + p2
                    s12m = p1 - p2
                    tsum = 0.0 + 0.0j
                    # four +-S pairs cover all eight sign patterns
                    for pat in range(4):
                        if pat == 0:
                            S = s12p + p3v
                            U = u12p * u3
                        elif pat == 1:
                            S = s12p - p3v
                            U = u12p * u3.conjugate()
                        elif pat == 2:
                            S = s12m + p3v
                            U = u12m * u3
                        else:
                            S = s12m - p3v
                            U = u12m * u3.conjugate()
                        Mm = b - S
                        xm = t * Mm
                        if -_SMALL < xm < _SMALL:
                            tsum += t * (1.0 - 0.5j * xm - xm * xm / 6.0)
                        else:
                            tsum += (1.0 - cbv * U) / (1j * Mm)
                        Mp = b + S
                        xp = t * Mp
                        if -_SMALL < xp < _SMALL:
                            tsum += t * (1.0 - 0.5j * xp - xp * xp / 6.0)
                        else:
                            tsum += (1.0 - cbv * U.conjugate()) / (1j * Mp)
                    acc += (mult * term_weight) * (P * tsum)
        out[a] = acc
    return out


# ---------------------------------------------------------------------------
# numpy twins (the env-flag fallback)
# ---------------------------------------------------------------------------


def _p3_general_numpy(out_idx, cb, phi, u, f1, f2, f3, ivl1, ivl2, ivl3, triples, signs, weights, t, G, out):
    uc = np.conj(u)
    for a in range(out_idx.shape[0]):
        k = int(out_idx[a])
        R = k + G
        b = phi[k]
        cbv = cb[a]
        acc = 0.0 + 0.0j
        for q1, q2, q3 in triples:
            i1 = np.arange(ivl1[q1, 0], ivl1[q1, 1] + 1, dtype=np.int64)
            rem = R - i1
            jlo = np.maximum(ivl2[q2, 0], rem - ivl3[q3, 1])
            jhi = np.minimum(ivl2[q2, 1], rem - ivl3[q3, 0])
            lens = np.clip(jhi - jlo + 1, 0, None)
            i2, owner = _ragged_arange(jlo, lens)
            if i2.size == 0:
                continue
            i1r = i1[owner]
            i3 = R - i1r - i2
            P = f1[i1r] * f2[i2] * f3[i3]
            live = P != 0
            if not live.any():
                continue
            i1r, i2, i3, P = i1r[live], i2[live], i3[live], P[live]
            p1, p2, p3v = phi[i1r], phi[i2], phi[i3]
            tsum = np.zeros(P.shape, dtype=np.complex128)
            for tau in range(signs.shape[0]):
                s1, s2, s3 = signs[tau]
                M = b - s1 * p1 - s2 * p2 - s3 * p3v
                U1 = u[i1r] if s1 > 0 else uc[i1r]
                U2 = u[i2] if s2 > 0 else uc[i2]
                U3 = u[i3] if s3 > 0 else uc[i3]
                tsum += weights[tau] * _phi_masked(t, M, cbv * U1 * U2 * U3)
            acc += np.sum(P * tsum)
        out[a] = acc
    return out


def _p3_symmetric_numpy(out_idx, cb, phi, u, f, ivl, triples, term_weight, t, G, out):
    uc = np.conj(u)
    for a in range(out_idx.shape[0]):
        k = int(out_idx[a])
        R = k + G
        b = phi[k]
        cbv = cb[a]
        acc = 0.0 + 0.0j
        for q1, q2, q3 in triples:
            same12 = q1 == q2
            same23 = q2 == q3
            i1 = np.arange(ivl[q1, 0], ivl[q1, 1] + 1, dtype=np.int64)
            rem = R - i1
            jlo = np.maximum(ivl[q2, 0], rem - ivl[q3, 1])
            if same12:
                jlo = np.maximum(jlo, i1)
            jhi = np.minimum(ivl[q2, 1], rem - ivl[q3, 0])
            if same23:
                jhi = np.minimum(jhi, rem // 2)  # enforce i2 <= i3
            lens = np.clip(jhi - jlo + 1, 0, None)
            i2, owner = _ragged_arange(jlo, lens)
            if i2.size == 0:
                continue
            i1r = i1[owner]
            i3 = R - i1r - i2
            P = f[i1r] * f[i2] * f[i3]
            live = P != 0
            if not live.any():
                continue
            i1r, i2, i3, P = i1r[live], i2[live], i3[live], P[live]
            eq12 = (i1r == i2) if same12 else np.zeros(P.shape, bool)
            eq23 = (i2 == i3) if same23 else np.zeros(P.shape, bool)
            mult = np.full(P.shape, 6.0)
            mult[eq12 | eq23] = 3.0
            mult[eq12 & eq23] = 1.0
            p1, p2, p3v = phi[i1r], phi[i2], phi[i3]
            u12 = {1: u[i1r] * u[i2], -1: u[i1r] * uc[i2]}
            u3 = {1: u[i3], -1: uc[i3]}
            tsum = np.zeros(P.shape, dtype=np.complex128)
            for s2 in (1, -1):
                for s3 in (1, -1):
                    S = p1 + s2 * p2 + s3 * p3v
                    U = u12[s2] * u3[s3]
                    tsum += _phi_masked(t, b - S, cbv * U)
                    tsum += _phi_masked(t, b + S, cbv * np.conj(U))
            acc += np.sum((mult * term_weight) * P * tsum)
        out[a] = acc
    return out


if HAVE_NUMBA:
    _p3_general_jit = njit(cache=True, parallel=True)(_p3_general_loops)
    _p3_symmetric_jit = njit(cache=True, parallel=True)(_p3_symmetric_loops)
    p3_sum_general = _p3_general_jit
    p3_sum_symmetric = _p3_symmetric_jit
else:  # pragma: no cover - env-flag path, exercised explicitly in tests
    prange = range
    p3_sum_general = _p3_general_numpy
    p3_sum_symmetric = _p3_symmetric_numpy
