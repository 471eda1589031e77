"""Wave-function assembly: F, varphi, the Laguerre expression, residuals.

Built on the phi series:

    F(ell, eta; x)      = C(ell, eta) x^(ell+1) phi(ell, eta; x),   x > 0,
    varphi(ell, eta; x) = phi(ell, eta; x) / Gamma(2 ell + 2),

where C is the normalizing constant

    C(ell, eta) = 2^ell e^(-pi eta / 2) |Gamma(ell+1+i eta)| / Gamma(2 ell + 2).

varphi extends continuously to the excluded orders ell = -(n+1)/2 through

    varphi(-(n+1)/2, eta; x) = kappa_n x^n varphi((n-1)/2, eta; x),

with kappa_n = (-1)^k prod_{m=1..k} (eta^2 + (m - 1/2)^2) for even n = 2k.
For odd n the true constant carries a factor i*eta; the real-scaled
surrogate x^n varphi((n-1)/2, eta; x) is returned instead with
``scaled_surrogate=True`` -- real zeros are unchanged by a constant
rescaling, which is all the zero machinery needs.
"""

from __future__ import annotations

import cmath
import math
from typing import Optional

import numpy as np

from .gammafn import log_gamma_complex, reciprocal_gamma_real
from .params import (
    CoulombParams,
    DomainError,
    Regime,
    RegimeError,
    classify,
)
from .series import EvalResult, _check_domain, phi_sums, phi_sums_array

_LN2 = math.log(2.0)


def gamow_constant(params: CoulombParams) -> float:
    """Normalizing constant C(ell, eta), positive for ell > -1.

    For ell in (-3/2, -1) the Gamma factor in the denominator is negative
    and so is C; downstream uses only need C or C**2 consistently.
    """
    params.require_regular("Gamow constant")
    ell, eta = params.ell, params.eta
    lg_num = log_gamma_complex(complex(ell + 1.0, eta))
    lg_den = log_gamma_complex(complex(2.0 * ell + 2.0, 0.0))
    sign = 1.0 if math.cos(lg_den.imag) > 0.0 else -1.0
    log_c = ell * _LN2 - 0.5 * math.pi * eta + lg_num.real - lg_den.real
    return sign * math.exp(log_c)


def F_eval(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """Regular wave function F = C x^(ell+1) phi for x > 0."""
    params.require_regular("F evaluation")
    if x <= 0.0:
        raise DomainError("F is evaluated for x > 0 only (x^(ell+1) real)")
    _check_domain(x, max_x)
    c = gamow_constant(params)
    vals, errs, used = phi_sums(params.ell, params.eta, float(x))
    pw = x ** (params.ell + 1.0)
    return EvalResult(value=c * pw * vals[0], abs_err_bound=abs(c) * pw * errs[0] * 1.01, terms_used=used)


def F_derivative(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """F'(x) = C x^ell ((ell+1) phi + x phi') for x > 0."""
    params.require_regular("F derivative")
    if x <= 0.0:
        raise DomainError("F' is evaluated for x > 0 only")
    _check_domain(x, max_x)
    c = gamow_constant(params)
    ell = params.ell
    vals, errs, used = phi_sums(ell, params.eta, float(x))
    pw = x ** ell
    value = c * pw * ((ell + 1.0) * vals[0] + x * vals[1])
    err = abs(c) * pw * (abs(ell + 1.0) * errs[0] + abs(x) * errs[1]) * 1.01
    return EvalResult(value=value, abs_err_bound=err, terms_used=used)


def half_integer_prefactor(ell: float, eta: float):
    """(n, reduced order m, limit constant, surrogate flag) at an excluded ell.

    n >= 1 indexes ell = -(n+1)/2; m = (n-1)/2 is the regular order the
    limit falls back to.  The constant comes from matching the residue of
    1/Gamma(2 ell + 2) against the small-divisor coefficient a_n of the
    series at the excluded order:

        kappa_n = (-1)^(n-1) ((n-1)!)^2 (2 eta a_{n-1} - a_{n-2}),

    equivalently 4^k prod_{m=1..k} (eta^2 + (m-1/2)^2) for n = 2k and
    2^(2k-1) eta prod_{m=1..k-1} (eta^2 + m^2) for n = 2k-1; verified
    against Richardson extrapolation in ell.  The odd-n constant is
    proportional to eta; when it vanishes (varphi tends to zero
    identically) the unscaled surrogate x^n varphi(m, eta; x) is used
    instead and flagged -- it carries the limiting zero positions.
    """
    n = round(-2.0 * ell - 1.0)
    m = (n - 1) / 2.0
    ellstar = -(n + 1) / 2.0
    ap2, ap1 = 0.0, 1.0  # a_{-1}, a_0
    if n >= 2:
        ap2, ap1 = 1.0, eta / (ellstar + 1.0)
        for k in range(2, n):
            ak = (2.0 * eta * ap1 - ap2) / (k * (k + 2.0 * ellstar + 1.0))
            ap2, ap1 = ap1, ak
    fac = float(math.factorial(n - 1))
    kappa = (2.0 * eta * ap1 - ap2) * fac * fac
    if (n - 1) % 2 == 1:
        kappa = -kappa
    if kappa == 0.0:
        return n, m, 1.0, True
    return n, m, kappa, False


def _varphi_core(ell: float, eta: float, x: float):
    """(value, derivative, err_value, err_derivative, terms, surrogate)."""
    if classify(ell) is Regime.REGULAR:
        g = reciprocal_gamma_real(2.0 * ell + 2.0)
        vals, errs, used = phi_sums(ell, eta, x)
        ag = abs(g)
        return vals[0] * g, vals[1] * g, errs[0] * ag, errs[1] * ag, used, False
    n, m, const, surrogate = half_integer_prefactor(ell, eta)
    g = reciprocal_gamma_real(2.0 * m + 2.0)
    vals, errs, used = phi_sums(m, eta, x)
    w = vals[0] * g
    dw = vals[1] * g
    ew = errs[0] * abs(g)
    edw = errs[1] * abs(g)
    xn = x**n
    xn1 = n * x ** (n - 1)
    value = const * xn * w
    dvalue = const * (xn1 * w + xn * dw)
    err_v = abs(const) * abs(xn) * ew * 1.01
    err_d = abs(const) * (abs(xn1) * ew + abs(xn) * edw) * 1.01
    return value, dvalue, err_v, err_d, used, surrogate


def varphi_eval(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """varphi(ell, eta; x), defined for every finite ell (limit at poles)."""
    _check_domain(x, max_x)
    v, _, ev, _, used, surrogate = _varphi_core(params.ell, params.eta, float(x))
    return EvalResult(value=v, abs_err_bound=ev, terms_used=used, scaled_surrogate=surrogate)


def varphi_derivative(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> EvalResult:
    """d/dx varphi(ell, eta; x)."""
    _check_domain(x, max_x)
    _, dv, _, ed, used, surrogate = _varphi_core(params.ell, params.eta, float(x))
    return EvalResult(value=dv, abs_err_bound=ed, terms_used=used, scaled_surrogate=surrogate)


def varphi_pair_array(ell: float, eta: float, x: np.ndarray):
    """(varphi, varphi') on an array of x, both regimes, vectorized."""
    x = np.asarray(x, dtype=float)
    if classify(ell) is Regime.REGULAR:
        g = reciprocal_gamma_real(2.0 * ell + 2.0)
        (v, dv, _), _, _ = phi_sums_array(ell, eta, x)
        return v * g, dv * g
    n, m, const, _ = half_integer_prefactor(ell, eta)
    g = reciprocal_gamma_real(2.0 * m + 2.0)
    (w, dw, _), _, _ = phi_sums_array(m, eta, x)
    w = w * g
    dw = dw * g
    xn = x**n
    return const * xn * w, const * (n * x ** (n - 1) * w + xn * dw)


def laguerre_expression(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> float:
    """(phi')^2 - phi phi'' rewritten through the defining equation.

    Substituting phi'' from the second-order equation gives the
    numerically friendlier form

        ((x^2 - 2 eta x - (ell+1)^2) / x^2) phi^2
            + (phi' + (ell+1) phi / x)^2,

    nonnegative whenever the zeros of phi are all real.
    """
    params.require_regular("Laguerre expression")
    if x == 0.0:
        raise DomainError("Laguerre expression undefined at x = 0")
    _check_domain(x, max_x)
    ell, eta = params.ell, params.eta
    (phi, dphi, _), _, _ = phi_sums(ell, eta, float(x))
    quad = (x * x - 2.0 * eta * x - (ell + 1.0) ** 2) / (x * x)
    lin = dphi + (ell + 1.0) * phi / x
    return quad * phi * phi + lin * lin


def laguerre_expression_array(ell: float, eta: float, x: np.ndarray):
    """Vectorized Laguerre expression plus the (phi, phi') pair behind it."""
    x = np.asarray(x, dtype=float)
    (phi, dphi, _), _, _ = phi_sums_array(ell, eta, x)
    quad = (x * x - 2.0 * eta * x - (ell + 1.0) ** 2) / (x * x)
    lin = dphi + (ell + 1.0) * phi / x
    return quad * phi * phi + lin * lin, phi, dphi


def ode_residual(params: CoulombParams, x: float, *, max_x: Optional[float] = None) -> float:
    """Residual of F'' + (1 - 2 eta/x - ell(ell+1)/x^2) F, relative.

    F'' comes from the twice-differentiated series through the product
    rule, so a small residual certifies the series, the derivative terms
    and the assembly against one another.  Reported relative to
    max(1, |F|).
    """
    params.require_regular("equation residual")
    if x <= 0.0:
        raise DomainError("residual is formed on x > 0 (F form)")
    _check_domain(x, max_x)
    ell, eta = params.ell, params.eta
    c = gamow_constant(params)
    (phi, dphi, ddphi), _, _ = phi_sums(ell, eta, float(x))
    f = c * x ** (ell + 1.0) * phi
    fpp = c * (
        ell * (ell + 1.0) * x ** (ell - 1.0) * phi
        + 2.0 * (ell + 1.0) * x**ell * dphi
        + x ** (ell + 1.0) * ddphi
    )
    resid = fpp + (1.0 - 2.0 * eta / x - ell * (ell + 1.0) / (x * x)) * f
    return abs(resid) / max(1.0, abs(f))


def recurrence_residuals(params: CoulombParams, x: float, *, max_x: Optional[float] = None):
    """Relative residuals of the three contiguous-order relations.

    Returns (r1_down, r1_up, r2):

      r1_down : ell F' + (ell^2/x + eta) F - sqrt(ell^2+eta^2) F_{ell-1}
      r1_up   : (ell+1) F' - ((ell+1)^2/x + eta) F + sqrt((ell+1)^2+eta^2) F_{ell+1}
      r2      : (ell+1) sqrt(ell^2+eta^2) F_{ell-1}
                  - (2 ell+1)(eta + ell(ell+1)/x) F
                  + ell sqrt((ell+1)^2+eta^2) F_{ell+1}

    each normalized by the largest participating term.  Requires
    ell > -1/2 with ell-1 off the excluded set (so ell = 0 is refused).
    """
    ell, eta = params.ell, params.eta
    if ell <= -0.5:
        raise RegimeError("recurrence residuals need ell > -1/2")
    down = params.shifted(dell=-1.0)
    if classify(down.ell) is not Regime.REGULAR:
        raise RegimeError("recurrence residuals need ell-1 away from the excluded orders")
    if x <= 0.0:
        raise DomainError("recurrence residuals are formed on x > 0")
    _check_domain(x, max_x)

    up = params.shifted(dell=+1.0)
    f = F_eval(params, x, max_x=max_x).value
    fp = F_derivative(params, x, max_x=max_x).value
    f_up = F_eval(up, x, max_x=max_x).value
    f_down = F_eval(down, x, max_x=max_x).value

    s_up = math.hypot(ell + 1.0, eta)
    s_down = math.hypot(ell, eta)

    terms = (ell * fp, (ell * ell / x + eta) * f, -s_down * f_down)
    r1_down = abs(sum(terms)) / max(max(abs(t) for t in terms), 1e-300)

    terms = ((ell + 1.0) * fp, -((ell + 1.0) ** 2 / x + eta) * f, s_up * f_up)
    r1_up = abs(sum(terms)) / max(max(abs(t) for t in terms), 1e-300)

    terms = (
        (ell + 1.0) * s_down * f_down,
        -(2.0 * ell + 1.0) * (eta + ell * (ell + 1.0) / x) * f,
        ell * s_up * f_up,
    )
    r2 = abs(sum(terms)) / max(max(abs(t) for t in terms), 1e-300)
    return r1_down, r1_up, r2
