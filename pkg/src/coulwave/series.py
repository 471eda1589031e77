"""Power-series evaluation of the regular wave factor phi and derivatives.

phi(ell, eta; x) = sum_k a_k x^k with

    a_0 = 1,  a_1 = eta/(ell+1),
    k (k + 2*ell + 1) a_k = 2*eta a_{k-1} - a_{k-2}      (k >= 2).

Evaluation never forms a_k and x^k separately (x^k overflows long before
the products do); instead the term sequences

    t_k = a_k x^k,            (function)
    d_k = k a_k x^(k-1),      (first derivative)
    s_k = k (k-1) a_k x^(k-2) (second derivative)

are advanced jointly by recurrences derived from the coefficient
recurrence:

    t_k = (2 eta x t_{k-1} - x^2 t_{k-2}) / (k (k + 2 ell + 1)),
    d_k = (2 eta   t_{k-1} - x   t_{k-2}) / (k + 2 ell + 1),
    s_k = (2 eta d_{k-1} - (k-1) t_{k-2}) / (k + 2 ell + 1).

The series is violently cancellative for large |x| (the largest term is
~exp(|x|) while the sum stays O(1)), so plain double arithmetic loses all
accuracy well before |x| = 50.  Both the recurrences and the accumulation
therefore run in compensated double-double arithmetic built from
error-free transformations (two_sum / Dekker two_prod), which keeps the
absolute error near 1e-31 * sum|t_k| -- below 1e-11 over the whole
certified domain |x| <= 50.

Truncation control: terms are summed at least up to K >= 2|x| + 30, which
clears the hump in term magnitude, and then until the last two terms of
every tracked sequence drop below 1e-32 of the running maximum of the
corresponding partial sum (the double-double noise floor).  The reported
error bound combines that truncation tail with the rounding floor.

The scalar kernel and the vectorized kernel perform the same IEEE
operations in the same order, so shared points agree bit for bit; the
scalar kernel is JIT-compiled when numba is importable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import (
    CoulombParams,
    ConvergenceError,
    DomainError,
    certified_max_x,
)

_EPS = 2.220446049250313e-16
_EPS_DD = 4.93038065763132e-32  # 2^-104
_TAIL_REL = 1e-32
_K_HARD_CAP = 4000
_SPLITTER = 134217729.0  # 2^27 + 1, Dekker splitting constant

try:  # pragma: no cover - exercised implicitly
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    def _jit(fn):
        return fn

    _HAVE_NUMBA = False


@dataclass(frozen=True)
class SeriesExpansion:
    """Truncated coefficient vector a_0..a_K for one parameter pair."""

    params: CoulombParams
    coeffs: np.ndarray
    K: int
    radius_hint: float


@dataclass(frozen=True)
class EvalResult:
    """A function value with a certified absolute error bound."""

    value: float
    abs_err_bound: float
    terms_used: int
    scaled_surrogate: bool = False


def phi_series(params: CoulombParams, K: int) -> SeriesExpansion:
    """Coefficients a_0..a_K of the expansion of phi at (ell, eta).

    radius_hint is the largest |x| for which the ratio-test tail bound is
    in force at order K: beyond index K the term ratio stays below 1/2
    whenever x**2 + 2|eta| x <= (K+1)(K + 2*ell + 2) / 2.
    """
    params.require_regular("phi series")
    if K < 2:
        raise DomainError("K must be >= 2")
    ell, eta = params.ell, params.eta
    a = np.zeros(K + 1)
    a[0] = 1.0
    a[1] = eta / (ell + 1.0)
    for k in range(2, K + 1):
        a[k] = (2.0 * eta * a[k - 1] - a[k - 2]) / (k * (k + 2.0 * ell + 1.0))
    half = 0.5 * (K + 1.0) * (K + 2.0 * ell + 2.0)
    radius = -abs(eta) + math.sqrt(eta * eta + half)
    return SeriesExpansion(params=params, coeffs=a, K=K, radius_hint=radius)


def _phi_kernel_py(ell, eta, x):
    """Scalar double-double kernel.

    Returns (phi, dphi, ddphi, err_phi, err_dphi, err_ddphi, terms_used).
    Must stay operation-for-operation in lockstep with phi_sums_array.
    """
    b2 = 2.0 * ell + 1.0
    a1 = eta / (ell + 1.0)
    c1 = 2.0 * eta * x
    c2 = x * x
    two_eta = 2.0 * eta

    # dd state: t_{k-1}, t_{k-2}, d_{k-1}
    # t1 = a1 * x exactly (two_prod)
    p = a1 * x
    ah = _SPLITTER * a1
    ah = ah - (ah - a1)
    al = a1 - ah
    bh = _SPLITTER * x
    bh = bh - (bh - x)
    bl = x - bh
    t1h = p
    t1l = ((ah * bh - p) + ah * bl + al * bh) + al * bl

    t2h, t2l = 1.0, 0.0
    d1h, d1l = a1, 0.0

    # dd partial sums (phi starts at t_0 + t_1, dphi at d_1, ddphi at 0)
    sth = 1.0 + t1h
    z = sth - 1.0
    stl = ((1.0 - (sth - z)) + (t1h - z)) + t1l
    sdh, sdl = d1h, d1l
    ssh, ssl = 0.0, 0.0

    abs_t = 1.0 + abs(t1h)
    abs_d = abs(d1h)
    abs_s = 0.0
    max_t = abs(sth)
    if max_t < 1.0:
        max_t = 1.0
    max_d = abs(sdh)
    max_s = 0.0

    lt1, lt2 = abs(t1h), 1.0
    ld1, ld2 = abs(d1h), 0.0
    ls1, ls2 = 0.0, 0.0

    kmin = int(2.0 * abs(x)) + 30
    k = 1
    while True:
        k += 1
        if k > _K_HARD_CAP:
            # signalled by terms_used == -1; raising is left to the wrapper
            return (math.nan, math.nan, math.nan, math.inf, math.inf, math.inf, -1)
        kf = float(k)
        den2 = kf + b2
        den1 = kf * den2

        # ---- t = (c1*t1 - c2*t2) / den1 ------------------------------
        # dd_muld(t1, c1)
        p = t1h * c1
        ah = _SPLITTER * t1h
        ah = ah - (ah - t1h)
        al = t1h - ah
        bh = _SPLITTER * c1
        bh = bh - (bh - c1)
        bl = c1 - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + t1l * c1
        u1h = p + e
        u1l = e - (u1h - p)
        # dd_muld(t2, c2)
        p = t2h * c2
        ah = _SPLITTER * t2h
        ah = ah - (ah - t2h)
        al = t2h - ah
        bh = _SPLITTER * c2
        bh = bh - (bh - c2)
        bl = c2 - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + t2l * c2
        u2h = p + e
        u2l = e - (u2h - p)
        # dd_sub
        sh = u1h - u2h
        z = sh - u1h
        e = (u1h - (sh - z)) + ((-u2h) - z)
        e = e + (u1l - u2l)
        nh = sh + e
        nl = e - (nh - sh)
        # dd_divd by den1
        q1 = nh / den1
        p = q1 * den1
        ah = _SPLITTER * q1
        ah = ah - (ah - q1)
        al = q1 - ah
        bh = _SPLITTER * den1
        bh = bh - (bh - den1)
        bl = den1 - bh
        pe = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        q2 = ((nh - p) - pe + nl) / den1
        th = q1 + q2
        tl = q2 - (th - q1)

        # ---- d = (two_eta*t1 - x*t2) / den2 --------------------------
        p = t1h * two_eta
        ah = _SPLITTER * t1h
        ah = ah - (ah - t1h)
        al = t1h - ah
        bh = _SPLITTER * two_eta
        bh = bh - (bh - two_eta)
        bl = two_eta - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + t1l * two_eta
        u1h = p + e
        u1l = e - (u1h - p)
        p = t2h * x
        ah = _SPLITTER * t2h
        ah = ah - (ah - t2h)
        al = t2h - ah
        bh = _SPLITTER * x
        bh = bh - (bh - x)
        bl = x - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + t2l * x
        u2h = p + e
        u2l = e - (u2h - p)
        sh = u1h - u2h
        z = sh - u1h
        e = (u1h - (sh - z)) + ((-u2h) - z)
        e = e + (u1l - u2l)
        nh = sh + e
        nl = e - (nh - sh)
        q1 = nh / den2
        p = q1 * den2
        ah = _SPLITTER * q1
        ah = ah - (ah - q1)
        al = q1 - ah
        bh = _SPLITTER * den2
        bh = bh - (bh - den2)
        bl = den2 - bh
        pe = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        q2 = ((nh - p) - pe + nl) / den2
        dh = q1 + q2
        dl = q2 - (dh - q1)

        # ---- s = (two_eta*d1 - (k-1)*t2) / den2 ----------------------
        p = d1h * two_eta
        ah = _SPLITTER * d1h
        ah = ah - (ah - d1h)
        al = d1h - ah
        bh = _SPLITTER * two_eta
        bh = bh - (bh - two_eta)
        bl = two_eta - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + d1l * two_eta
        u1h = p + e
        u1l = e - (u1h - p)
        km1 = kf - 1.0
        p = t2h * km1
        ah = _SPLITTER * t2h
        ah = ah - (ah - t2h)
        al = t2h - ah
        bh = _SPLITTER * km1
        bh = bh - (bh - km1)
        bl = km1 - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        e = e + t2l * km1
        u2h = p + e
        u2l = e - (u2h - p)
        sh = u1h - u2h
        z = sh - u1h
        e = (u1h - (sh - z)) + ((-u2h) - z)
        e = e + (u1l - u2l)
        nh = sh + e
        nl = e - (nh - sh)
        q1 = nh / den2
        p = q1 * den2
        ah = _SPLITTER * q1
        ah = ah - (ah - q1)
        al = q1 - ah
        bh = _SPLITTER * den2
        bh = bh - (bh - den2)
        bl = den2 - bh
        pe = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        q2 = ((nh - p) - pe + nl) / den2
        s_h = q1 + q2
        s_l = q2 - (s_h - q1)

        # ---- accumulate (dd_add) -------------------------------------
        hh = sth + th
        z = hh - sth
        e = (sth - (hh - z)) + (th - z)
        e = e + (stl + tl)
        sth = hh + e
        stl = e - (sth - hh)

        hh = sdh + dh
        z = hh - sdh
        e = (sdh - (hh - z)) + (dh - z)
        e = e + (sdl + dl)
        sdh = hh + e
        sdl = e - (sdh - hh)

        hh = ssh + s_h
        z = hh - ssh
        e = (ssh - (hh - z)) + (s_h - z)
        e = e + (ssl + s_l)
        ssh = hh + e
        ssl = e - (ssh - hh)

        at = abs(th)
        ad = abs(dh)
        as_ = abs(s_h)
        abs_t += at
        abs_d += ad
        abs_s += as_
        if abs(sth) > max_t:
            max_t = abs(sth)
        if abs(sdh) > max_d:
            max_d = abs(sdh)
        if abs(ssh) > max_s:
            max_s = abs(ssh)

        lt2, lt1 = lt1, at
        ld2, ld1 = ld1, ad
        ls2, ls1 = ls1, as_

        t2h, t2l = t1h, t1l
        t1h, t1l = th, tl
        d1h, d1l = dh, dl

        if k >= kmin:
            if (
                lt1 + lt2 <= _TAIL_REL * max_t
                and ld1 + ld2 <= _TAIL_REL * max_d
                and ls1 + ls2 <= _TAIL_REL * max_s
            ):
                break

    err_t = 2.0 * (lt1 + lt2) + 8.0 * _EPS_DD * abs_t + _EPS * abs(sth)
    err_d = 2.0 * (ld1 + ld2) + 8.0 * _EPS_DD * abs_d + _EPS * abs(sdh)
    err_s = 2.0 * (ls1 + ls2) + 8.0 * _EPS_DD * abs_s + _EPS * abs(ssh)
    return (sth, sdh, ssh, err_t, err_d, err_s, k + 1)


_phi_kernel = _jit(_phi_kernel_py)


def _phi_kernel_batch_py(ells, etas, xs):
    n = xs.shape[0]
    out = np.empty((7, n))
    for i in range(n):
        r = _phi_kernel(ells[i], etas[i], xs[i])
        out[0, i] = r[0]
        out[1, i] = r[1]
        out[2, i] = r[2]
        out[3, i] = r[3]
        out[4, i] = r[4]
        out[5, i] = r[5]
        out[6, i] = r[6]
    return out


_phi_kernel_batch = _jit(_phi_kernel_batch_py)


def phi_sums(ell: float, eta: float, x: float):
    """phi, phi', phi'' at a scalar x, with error bounds.

    Returns (values, err_bounds, terms_used); values and err_bounds are
    3-tuples ordered (phi, dphi, ddphi).
    """
    out = _phi_kernel(float(ell), float(eta), float(x))
    if out[6] < 0:
        raise ConvergenceError("series failed to terminate (internal cap hit)")
    return (out[0], out[1], out[2]), (out[3], out[4], out[5]), int(out[6])


def phi_sums_array(ell, eta, x):
    """Vectorized phi, phi', phi'' with (ell, eta, x) broadcast together.

    Runs the scalar kernel per lane when the JIT backend is present (same
    bits by construction), otherwise a numpy elementwise translation with
    the identical operation order.
    """
    ell_b, eta_b, x_b = np.broadcast_arrays(
        np.asarray(ell, dtype=float), np.asarray(eta, dtype=float), np.asarray(x, dtype=float)
    )
    shape = x_b.shape
    if _HAVE_NUMBA:
        out = _phi_kernel_batch(
            np.ascontiguousarray(np.ravel(ell_b)),
            np.ascontiguousarray(np.ravel(eta_b)),
            np.ascontiguousarray(np.ravel(x_b)),
        )
        if np.any(out[6] < 0):
            raise ConvergenceError("series failed to terminate (internal cap hit)")
        terms = int(np.max(out[6])) if out.shape[1] else 0
        return (
            (out[0].reshape(shape), out[1].reshape(shape), out[2].reshape(shape)),
            (out[3].reshape(shape), out[4].reshape(shape), out[5].reshape(shape)),
            terms,
        )
    return _phi_sums_array_numpy(ell_b, eta_b, x_b)


def _phi_sums_array_numpy(ell, eta, x):
    """Numpy elementwise translation of the scalar kernel (fallback)."""
    shape = x.shape
    ell = np.ravel(ell).copy()
    eta = np.ravel(eta).copy()
    x = np.ravel(x).copy()

    def two_prod(a, b):
        p = a * b
        ah = _SPLITTER * a
        ah = ah - (ah - a)
        al = a - ah
        bh = _SPLITTER * b
        bh = bh - (bh - b)
        bl = b - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        return p, e

    def dd_muld(hh, ll, b):
        p, e = two_prod(hh, b)
        e = e + ll * b
        rh = p + e
        rl = e - (rh - p)
        return rh, rl

    def dd_sub(a_h, a_l, b_h, b_l):
        sh = a_h - b_h
        z = sh - a_h
        e = (a_h - (sh - z)) + ((-b_h) - z)
        e = e + (a_l - b_l)
        rh = sh + e
        rl = e - (rh - sh)
        return rh, rl

    def dd_divd(a_h, a_l, b):
        q1 = a_h / b
        p, pe = two_prod(q1, b)
        q2 = ((a_h - p) - pe + a_l) / b
        rh = q1 + q2
        rl = q2 - (rh - q1)
        return rh, rl

    def dd_add(a_h, a_l, b_h, b_l):
        hh = a_h + b_h
        z = hh - a_h
        e = (a_h - (hh - z)) + (b_h - z)
        e = e + (a_l + b_l)
        rh = hh + e
        rl = e - (rh - hh)
        return rh, rl

    b2 = 2.0 * ell + 1.0
    a1 = eta / (ell + 1.0)
    c1 = 2.0 * eta * x
    c2 = x * x
    two_eta = 2.0 * eta

    t1h, t1l = two_prod(a1, x)
    t2h, t2l = np.ones_like(x), np.zeros_like(x)
    d1h, d1l = a1.copy(), np.zeros_like(x)

    sth = 1.0 + t1h
    z = sth - 1.0
    stl = ((1.0 - (sth - z)) + (t1h - z)) + t1l
    sdh, sdl = d1h.copy(), d1l.copy()
    ssh, ssl = np.zeros_like(x), np.zeros_like(x)

    abs_t = 1.0 + np.abs(t1h)
    abs_d = np.abs(d1h)
    abs_s = np.zeros_like(x)
    max_t = np.maximum(np.abs(sth), 1.0)
    max_d = np.abs(sdh)
    max_s = np.zeros_like(x)

    lt1, lt2 = np.abs(t1h), np.ones_like(x)
    ld1, ld2 = np.abs(d1h), np.zeros_like(x)
    ls1, ls2 = np.zeros_like(x), np.zeros_like(x)

    kmin = int(2.0 * float(np.max(np.abs(x)))) + 30 if x.size else 30
    k = 1
    while True:
        k += 1
        if k > _K_HARD_CAP:
            raise ConvergenceError("series failed to terminate (internal cap hit)")
        kf = float(k)
        den2 = kf + b2
        den1 = kf * den2

        u1h, u1l = dd_muld(t1h, t1l, c1)
        u2h, u2l = dd_muld(t2h, t2l, c2)
        nh, nl = dd_sub(u1h, u1l, u2h, u2l)
        th, tl = dd_divd(nh, nl, den1)

        u1h, u1l = dd_muld(t1h, t1l, two_eta)
        u2h, u2l = dd_muld(t2h, t2l, x)
        nh, nl = dd_sub(u1h, u1l, u2h, u2l)
        dh, dl = dd_divd(nh, nl, den2)

        u1h, u1l = dd_muld(d1h, d1l, two_eta)
        u2h, u2l = dd_muld(t2h, t2l, kf - 1.0)
        nh, nl = dd_sub(u1h, u1l, u2h, u2l)
        s_h, s_l = dd_divd(nh, nl, den2)

        sth, stl = dd_add(sth, stl, th, tl)
        sdh, sdl = dd_add(sdh, sdl, dh, dl)
        ssh, ssl = dd_add(ssh, ssl, s_h, s_l)

        at = np.abs(th)
        ad = np.abs(dh)
        as_ = np.abs(s_h)
        abs_t += at
        abs_d += ad
        abs_s += as_
        np.maximum(max_t, np.abs(sth), out=max_t)
        np.maximum(max_d, np.abs(sdh), out=max_d)
        np.maximum(max_s, np.abs(ssh), out=max_s)

        lt2, lt1 = lt1, at
        ld2, ld1 = ld1, ad
        ls2, ls1 = ls1, as_

        t2h, t2l = t1h, t1l
        t1h, t1l = th, tl
        d1h, d1l = dh, dl

        if k >= kmin:
            done = (
                (lt1 + lt2 <= _TAIL_REL * max_t)
                & (ld1 + ld2 <= _TAIL_REL * max_d)
                & (ls1 + ls2 <= _TAIL_REL * max_s)
            )
            if bool(np.all(done)):
                break

    err_t = 2.0 * (lt1 + lt2) + 8.0 * _EPS_DD * abs_t + _EPS * np.abs(sth)
    err_d = 2.0 * (ld1 + ld2) + 8.0 * _EPS_DD * abs_d + _EPS * np.abs(sdh)
    err_s = 2.0 * (ls1 + ls2) + 8.0 * _EPS_DD * abs_s + _EPS * np.abs(ssh)
    return (
        (sth.reshape(shape), sdh.reshape(shape), ssh.reshape(shape)),
        (err_t.reshape(shape), err_d.reshape(shape), err_s.reshape(shape)),
        k + 1,
    )


def _check_domain(x, max_x: Optional[float]) -> float:
    limit = certified_max_x() if max_x is None else max_x
    if np.any(np.abs(x) > limit):
        raise DomainError(f"|x| exceeds the certified evaluation domain {limit}")
    return limit


def phi_eval(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """phi(ell, eta; x) by compensated series summation."""
    params.require_regular("phi evaluation")
    _check_domain(x, max_x)
    values, errs, used = phi_sums(params.ell, params.eta, float(x))
    return EvalResult(value=values[0], abs_err_bound=errs[0], terms_used=used)


def phi_derivative(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """d/dx phi(ell, eta; x) from the term-wise differentiated series."""
    params.require_regular("phi derivative")
    _check_domain(x, max_x)
    values, errs, used = phi_sums(params.ell, params.eta, float(x))
    return EvalResult(value=values[1], abs_err_bound=errs[1], terms_used=used)


def phi_second_derivative(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """d2/dx2 phi(ell, eta; x) from the twice-differentiated series."""
    params.require_regular("phi second derivative")
    _check_domain(x, max_x)
    values, errs, used = phi_sums(params.ell, params.eta, float(x))
    return EvalResult(value=values[2], abs_err_bound=errs[2], terms_used=used)
