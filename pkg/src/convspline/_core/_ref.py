"""Pure-NumPy reference implementation of the numerical core.

Mirrors the Cython module ``_fast`` function-for-function; used as import-time
fallback and as the comparison baseline in tests and benchmarks.
"""

from __future__ import annotations

import numpy as np

# Cardinal B-spline pieces b^m on [k, k+1), ascending coefficients in the
# global variable u; b^m is supported on [0, m+1).
_CARDINAL_PIECES = {
    0: ((1.0,),),
    1: ((0.0, 1.0), (2.0, -1.0)),
    2: (
        (0.0, 0.0, 0.5),
        (-1.5, 3.0, -1.0),
        (4.5, -3.0, 0.5),
    ),
    3: (
        (0.0, 0.0, 0.0, 1.0 / 6.0),
        (4.0 / 6.0, -2.0, 2.0, -0.5),
        (-44.0 / 6.0, 10.0, -4.0, 0.5),
        (64.0 / 6.0, -8.0, 2.0, -1.0 / 6.0),
    ),
}

_OVERFLOW_LIMIT = 1e250


def cardinal_bspline(degree: int, u):
    """Evaluate the cardinal B-spline b^degree at u (array-valued)."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    for k, coeffs in enumerate(_CARDINAL_PIECES[degree]):
        mask = (u >= k) & (u < k + 1)
        if not mask.any():
            continue
        uk = u[mask]
        acc = np.full_like(uk, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * uk + c
        out[mask] = acc
    return out


def march_core(q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Solve sum_{j=0}^n q_j v_{n-j} = a_n for v by forward substitution.

    q is trimmed to its effective support; cost O(n * len(q)).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    n_tot = a.shape[0]
    nq = q.shape[0]
    v = np.empty(n_tot)
    inv_q0 = 1.0 / q[0]
    v[0] = a[0] * inv_q0
    for n in range(1, n_tot):
        jmax = min(n, nq - 1)
        s = np.dot(q[1 : jmax + 1], v[n - 1 : n - jmax - 1 : -1]) if jmax else 0.0
        v[n] = (a[n] - s) * inv_q0
    return v


def pn_core(q: np.ndarray, n_max: int) -> tuple[np.ndarray, bool]:
    """Stability coefficients p_0..p_{n_max}; returns (p, overflowed).

    On overflow the remaining entries are set to +inf so that max|p_n| keeps
    signalling the blow-up instead of turning into NaN.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    nq = q.shape[0]
    p = np.empty(n_max + 1)
    p[0] = 1.0
    inv_q0 = -1.0 / q[0]
    for n in range(1, n_max + 1):
        jmax = min(n, nq - 1)
        s = np.dot(q[1 : jmax + 1], p[n - 1 : n - jmax - 1 : -1]) if jmax else 0.0
        pn = s * inv_q0
        if abs(pn) > _OVERFLOW_LIMIT:
            p[n:] = np.inf
            return p, True
        p[n] = pn
    return p, False


def batch_pair_bins(
    points: np.ndarray,
    weights: np.ndarray,
    idx_a: np.ndarray,
    idx_b: np.ndarray,
    jlo: np.ndarray,
    nbins: np.ndarray,
    out_off: np.ndarray,
    out: np.ndarray,
    inv_dt: float,
    degree: int,
) -> None:
    """Accumulate cardinal-translate quadrature bins for element pairs.

    For pair p the slots out[out_off[p] + k], k < nbins[p], receive

        S_g = sum_{a,b} W_a W_b b^degree(|x_a - y_b| * inv_dt - g) / |x_a - y_b|

    with g = jlo[p] + k.  Entries of ``out`` must be zero-initialised; slots of
    distinct pairs are disjoint, so chunked parallel calls are deterministic.
    """
    pieces = _CARDINAL_PIECES[degree]
    supp = degree + 1
    for p in range(idx_a.shape[0]):
        pa = points[idx_a[p]]
        pb = points[idx_b[p]]
        wa = weights[idx_a[p]]
        wb = weights[idx_b[p]]
        diff = pa[:, None, :] - pb[None, :, :]
        d = np.sqrt(np.einsum("abk,abk->ab", diff, diff)).ravel()
        w = np.multiply.outer(wa, wb).ravel() / d
        tau = d * inv_dt
        g_lo = int(jlo[p])
        g_hi = g_lo + int(nbins[p])
        base = int(out_off[p])
        for g in range(max(g_lo, int(np.floor(tau.min())) - supp), g_hi):
            if g < g_lo:
                continue
            u = tau - g
            mask = (u > 0.0) & (u < supp)
            if not mask.any():
                continue
            um = u[mask]
            val = np.zeros_like(um)
            for k, coeffs in enumerate(pieces):
                mk = (um >= k) & (um < k + 1)
                if not mk.any():
                    continue
                uk = um[mk]
                acc = np.full_like(uk, coeffs[-1])
                for c in coeffs[-2::-1]:
                    acc = acc * uk + c
                val[mk] = acc
            out[base + g - g_lo] += float(np.dot(w[mask], val))
