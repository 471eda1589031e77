"""Monic orthogonal polynomials attached to the wave-function family.

The family R_n(ell, eta; x) follows the three-term recurrence

    y_{n+1} = (x - alpha_n) y_n - beta_n y_{n-1},   y_0 = 1, y_1 = x - alpha_0,

    alpha_n = -eta / (2 (ell+n+1)(ell+n+2)),
    beta_n  = ((ell+n+1)^2 + eta^2) / (2 (2 ell+2n+1)(2 ell+2n+2)(2 ell+2n+3)(ell+n+1)),

defined for ell > -3/2, ell != -1.  beta_n > 0 for n >= 1, so the zeros
are the eigenvalues of the symmetric Jacobi matrix and are real and
simple.  The scaled values (2x)^n R_n(1/(2x)) converge (slowly, with an
O(1/n) tail) to phi(ell, eta; x); the Dini combinations D_n(H; x) likewise
converge to x phi' + H phi.

A handy shift identity ties neighboring families together:
alpha_{k+1}(ell-1) = alpha_k(ell) and beta_{k+1}(ell-1) = beta_k(ell), so
R_{n+1}(ell-1) is the associated (numerator) polynomial of R_n(ell).  It
underlies the positive-sum form of their Wronskian used below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .params import (
    BracketError,
    ConditioningError,
    CoulombParams,
    DomainError,
    ParameterError,
    PoleProximityError,
)
from .series import phi_sums
from .zeros import VARPHI, _brent, negative_zeros, positive_zeros
from .tridiag import tridiag_eigenvalues

_MAX_DEGREE = 200
_MAX_EXPLICIT = 60


class Provenance(Enum):
    RECURRENCE = "recurrence"
    EXPLICIT = "explicit"
    DERIVED = "derived"


@dataclass(frozen=True)
class RecurrenceCoeffs:
    n: int
    alpha_n: float
    beta_n: float


@dataclass(frozen=True)
class MonicPolynomial:
    """Dense real polynomial, ascending coefficients.

    R-family members are monic (leading coefficient exactly 1); Dini
    combinations keep whatever leading coefficient the construction
    produces.
    """

    degree: int
    coeffs: np.ndarray
    provenance: Provenance

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)


def _require_family_regime(params: CoulombParams, what: str) -> None:
    if params.ell <= -1.5 or abs(params.ell + 1.0) < 1e-12:
        raise ParameterError(f"{what} needs ell > -3/2 with ell != -1, got ell={params.ell}")


def recurrence_coeffs(params: CoulombParams, n: int) -> RecurrenceCoeffs:
    """alpha_n and beta_n of the three-term recurrence.

    beta_0 never enters the recurrence (y_1 = x - alpha_0) and its formula
    has a removable pole at ell = -1/2; it is reported as 0.
    """
    _require_family_regime(params, "recurrence coefficients")
    if n < 0:
        raise ParameterError("n must be >= 0")
    ell, eta = params.ell, params.eta
    a = -eta / (2.0 * (ell + n + 1.0) * (ell + n + 2.0))
    if n == 0:
        return RecurrenceCoeffs(n=0, alpha_n=a, beta_n=0.0)
    t = 2.0 * ell + 2.0 * n + 1.0
    b = ((ell + n + 1.0) ** 2 + eta * eta) / (2.0 * t * (t + 1.0) * (t + 2.0) * (ell + n + 1.0))
    return RecurrenceCoeffs(n=n, alpha_n=a, beta_n=b)


def zeta(params: CoulombParams, n: int) -> float:
    """prod_{k=1..n} beta_k (the squared norm ratio of the family)."""
    out = 1.0
    for k in range(1, n + 1):
        out *= recurrence_coeffs(params, k).beta_n
    return out


def normalized_value(params: CoulombParams, n: int, x: float) -> float:
    """Orthonormal-scale value R_n(x/2) / sqrt(zeta_n) (convenience)."""
    return R_value(params, n, 0.5 * x) / math.sqrt(zeta(params, n))


def R_poly(params: CoulombParams, n: int) -> MonicPolynomial:
    """Coefficient vector of R_n by running the recurrence."""
    _require_family_regime(params, "R polynomial")
    if n < 0:
        raise ParameterError("n must be >= 0")
    if n > _MAX_DEGREE:
        raise DomainError(f"coefficient form limited to degree {_MAX_DEGREE}")
    y0 = np.array([1.0])
    if n == 0:
        return MonicPolynomial(0, y0, Provenance.RECURRENCE)
    y1 = np.array([-recurrence_coeffs(params, 0).alpha_n, 1.0])
    for k in range(1, n):
        rc = recurrence_coeffs(params, k)
        y2 = npoly.polysub(
            npoly.polymul(np.array([-rc.alpha_n, 1.0]), y1), rc.beta_n * y0
        )
        y0, y1 = y1, y2
    return MonicPolynomial(n, y1, Provenance.RECURRENCE)


def R_value(params: CoulombParams, n: int, x: float) -> float:
    """R_n(x) by the point recurrence (no coefficient expansion)."""
    _require_family_regime(params, "R evaluation")
    y0 = 1.0
    if n == 0:
        return y0
    y1 = x - recurrence_coeffs(params, 0).alpha_n
    for k in range(1, n):
        rc = recurrence_coeffs(params, k)
        y0, y1 = y1, (x - rc.alpha_n) * y1 - rc.beta_n * y0
    return y1


def R_scaled_value(params: CoulombParams, n: int, x: float) -> float:
    """(2x)^n R_n(1/(2x)), evaluated without dividing by x.

    For n <= 60 this is a Horner pass over the reversed coefficients;
    beyond that the scaled recurrence
        S_{k+1} = (1 - 2 alpha_k x) S_k - 4 beta_k x^2 S_{k-1}
    avoids expanding coefficients altogether.
    """
    if n <= _MAX_EXPLICIT:
        c = R_poly(params, n).coeffs
        u = 2.0 * x
        acc = c[0]
        for j in range(1, n + 1):
            acc = acc * u + c[j]
        return float(acc)
    s0 = 1.0
    if n == 0:
        return s0
    s1 = 1.0 - 2.0 * recurrence_coeffs(params, 0).alpha_n * x
    for k in range(1, n):
        rc = recurrence_coeffs(params, k)
        s0, s1 = s1, (1.0 - 2.0 * rc.alpha_n * x) * s1 - 4.0 * rc.beta_n * x * x * s0
    return s1


def _hyp3f2_terminating(k: int, a2: complex, a3: complex, b1: complex, b2: complex) -> complex:
    """3F2(-k, a2, a3; b1, b2; 1) summed left to right by term ratios."""
    term = 1.0 + 0.0j
    acc = 1.0 + 0.0j
    for m in range(k):
        term *= (-k + m) * (a2 + m) * (a3 + m) / ((b1 + m) * (b2 + m) * (m + 1.0))
        acc += term
    return acc


def R_explicit(params: CoulombParams, n: int) -> MonicPolynomial:
    """R_n from the closed double sum (complex Pochhammer products).

    The expansion writes the coefficient of x^(n-k) as

        (-ell - i eta - n - 1)_k i^k / (k! (-2 ell - 2n - 2)_k)
            * 3F2(-k, 2n+2 ell+3-k, i eta+ell+1; n+i eta+ell+2-k, 2 ell+2; 1)

    with all Pochhammer ratios accumulated incrementally.  Imaginary parts
    are round-off residue; they are checked against 1e-10 of the
    coefficient scale and discarded.
    """
    _require_family_regime(params, "explicit R construction")
    if n < 0:
        raise ParameterError("n must be >= 0")
    if n > _MAX_EXPLICIT:
        raise DomainError(f"explicit form limited to degree {_MAX_EXPLICIT}")
    ell, eta = params.ell, params.eta
    a0 = complex(-ell - n - 1.0, -eta)
    b0 = complex(-2.0 * ell - 2.0 * n - 2.0, 0.0)
    coeffs = np.zeros(n + 1, dtype=complex)
    pref = 1.0 + 0.0j
    for k in range(n + 1):
        if k > 0:
            pref *= (a0 + (k - 1.0)) * 1j / (k * (b0 + (k - 1.0)))
        f = _hyp3f2_terminating(
            k,
            complex(2.0 * n + 2.0 * ell + 3.0 - k, 0.0),
            complex(ell + 1.0, eta),
            complex(n + ell + 2.0 - k, eta),
            complex(2.0 * ell + 2.0, 0.0),
        )
        coeffs[n - k] = pref * f
    scale = float(np.max(np.abs(coeffs)))
    resid = float(np.max(np.abs(coeffs.imag)))
    if resid > 1e-10 * scale:
        raise ConditioningError(
            f"imaginary residue {resid:.2e} exceeds 1e-10 of coefficient scale {scale:.2e}"
        )
    return MonicPolynomial(n, coeffs.real.copy(), Provenance.EXPLICIT)


def _dini_constant(params: CoulombParams) -> float:
    ell, eta = params.ell, params.eta
    return (1.0 + eta * eta / (ell + 1.0) ** 2) / (4.0 * (2.0 * ell + 3.0))


def D_poly(params: CoulombParams, n: int, H: float) -> MonicPolynomial:
    """Dini combination (eta/(2(ell+1)) + H x) R_n - c R_{n-1}(ell+1 family).

    Degree n+1 with leading coefficient H when H != 0, degree <= n when
    H = 0.
    """
    _require_family_regime(params, "Dini polynomial")
    if n < 1:
        raise ParameterError("n must be >= 1")
    ell, eta = params.ell, params.eta
    rn = R_poly(params, n).coeffs
    rm = R_poly(params.shifted(dell=1.0), n - 1).coeffs
    out = np.zeros(n + 2)
    out[: n + 1] += (eta / (2.0 * (ell + 1.0))) * rn
    out[1 : n + 2] += H * rn
    out[:n] -= _dini_constant(params) * rm
    degree = n + 1 if H != 0.0 else int(max(np.nonzero(out)[0], default=0))
    return MonicPolynomial(degree, out, Provenance.DERIVED)


def D_value(params: CoulombParams, n: int, H: float, x: float) -> float:
    """D_n(H; x) via point recurrences of the two R factors."""
    ell, eta = params.ell, params.eta
    rn = R_value(params, n, x)
    rm = R_value(params.shifted(dell=1.0), n - 1, x)
    return (eta / (2.0 * (ell + 1.0)) + H * x) * rn - _dini_constant(params) * rm


def D_scaled_value(params: CoulombParams, n: int, H: float, x: float) -> float:
    """(2x)^(n+1) D_n(H; 1/(2x)) by reversed-coefficient Horner."""
    c = D_poly(params, n, H).coeffs
    u = 2.0 * x
    acc = c[0]
    for j in range(1, n + 2):
        acc = acc * u + c[j]
    return float(acc)


def poly_zeros_R(params: CoulombParams, n: int) -> np.ndarray:
    """Zeros of R_n as eigenvalues of the symmetric Jacobi matrix."""
    _require_family_regime(params, "R zeros")
    if n == 0:
        return np.empty(0)
    diag = np.array([recurrence_coeffs(params, k).alpha_n for k in range(n)])
    off = np.array([math.sqrt(recurrence_coeffs(params, k).beta_n) for k in range(1, n)])
    eig = tridiag_eigenvalues(diag, off)
    if np.any(np.diff(eig) <= 0.0):
        raise ConditioningError("Jacobi eigenvalues failed strict separation")
    return eig


def poly_zeros_D(params: CoulombParams, n: int, H: float) -> np.ndarray:
    """Real zeros of D_n(H; .) located between and outside the R_n zeros.

    For H > 0 there are n+1 zeros: one in each gap of the R_n zeros and
    one beyond each extreme; for H = 0 the degree drops to n and exactly
    one of the two outer zeros survives.  A missing bracket is reported
    as an error rather than silently repaired, since it would contradict
    the interlacing property this construction is certifying.
    """
    if H < 0.0:
        raise ParameterError("zero reality is only established for H >= 0")
    if n < 1:
        raise ParameterError("n must be >= 1")
    zr = poly_zeros_R(params, n)
    f = lambda x: D_value(params, n, H, x)
    vals = [f(z) for z in zr]
    if any(v == 0.0 for v in vals):
        raise ConditioningError("Dini combination vanished exactly at an R zero")

    zeros: List[float] = []
    for i in range(n - 1):
        if vals[i] * vals[i + 1] > 0.0:
            raise BracketError(
                "no sign change between consecutive R zeros; interlacing violated"
            )
        zeros.append(_brent(f, float(zr[i]), float(zr[i + 1]), vals[i], vals[i + 1], 1e-13))

    span = max(float(zr[-1] - zr[0]), abs(float(zr[0])), 0.1)

    def outward(anchor: float, direction: float, f_anchor: float) -> Optional[float]:
        step = 0.25 * span
        a, fa = anchor, f_anchor
        for _ in range(80):
            b = a + direction * step
            fb = f(b)
            if fa * fb < 0.0:
                lo, hi = (a, b) if a < b else (b, a)
                flo, fhi = (fa, fb) if a < b else (fb, fa)
                return _brent(f, lo, hi, flo, fhi, 1e-13)
            a, fa = b, fb
            step *= 2.0
        return None

    left = outward(float(zr[0]), -1.0, vals[0])
    right = outward(float(zr[-1]), +1.0, vals[-1])
    if H > 0.0:
        if left is None or right is None:
            raise BracketError("missing outer zero for H > 0; interlacing violated")
        zeros = [left] + zeros + [right]
    else:
        outer = [z for z in (left, right) if z is not None]
        if len(outer) != 1:
            raise BracketError(
                f"expected exactly one outer zero for H = 0, found {len(outer)}"
            )
        zeros = sorted(zeros + outer)
    out = np.array(sorted(zeros))
    if np.any(np.diff(out) <= 0.0):
        raise ConditioningError("Dini zeros failed strict separation")
    return out


def pade_limit_residual(params: CoulombParams, n: int, x: float) -> float:
    """|(2x)^n R_n(1/(2x)) - phi(x)|.

    Converges to zero as n grows, uniformly on compacts, but only at an
    algebraic O(1/n) rate: the x-coefficient of the scaled polynomial is
    eta (1/(ell+1) - 1/(ell+n+1)), short of the series coefficient
    eta/(ell+1) by an O(1/n) gap.  Thresholds asserted on this quantity
    are regression bounds measured on the frozen grid, not theory.
    """
    _require_family_regime(params, "scaled-polynomial residual")
    if abs(x) > 10.0:
        raise DomainError("residual is tracked on |x| <= 10")
    phi = phi_sums(params.ell, params.eta, float(x))[0][0]
    return abs(R_scaled_value(params, n, x) - phi)


def dini_limit_residual(params: CoulombParams, n: int, H: float, x: float) -> float:
    """|(2x)^(n+1) D_n(H; 1/(2x)) - (x phi'(x) + H phi(x))|; exact 0 at x=0."""
    _require_family_regime(params, "scaled Dini residual")
    if abs(x) > 10.0:
        raise DomainError("residual is tracked on |x| <= 10")
    vals, _, _ = phi_sums(params.ell, params.eta, float(x))
    target = x * vals[1] + H * vals[0]
    return abs(D_scaled_value(params, n, H, x) - target)


def wronskian_R_sum(params: CoulombParams, n: int, x: float) -> float:
    """Positive-sum form sum_k zeta_k(ell-1) R_{n-k}(ell+k; x)^2.

    Matches W[R_n(ell), R_{n+1}(ell-1)](x) identically; every weight
    zeta_k(ell-1) = prod_{j<=k} beta_j(ell-1) is positive in-regime, which
    is what forces the Wronskian positive.  (The shift identity
    beta_{j+1}(ell-1) = beta_j(ell) collapses the weights to these zetas;
    verified coefficientwise against the polynomial Wronskian.)
    """
    down = params.shifted(dell=-1.0)
    acc = 0.0
    w = 1.0
    for k in range(n + 1):
        if k > 0:
            w *= recurrence_coeffs(down, k).beta_n
        r = R_value(params.shifted(dell=float(k)), n - k, x)
        acc += w * r * r
    return acc


def wronskian_R_positivity(params: CoulombParams, n: int, x: float) -> float:
    """W[R_n(ell), R_{n+1}(ell-1)](x), cross-checked against the positive sum.

    Needs ell > -1/2 so the shifted family stays in-regime.  Raises if the
    direct polynomial Wronskian and the positive-sum form disagree beyond
    1e-9 relative, or if positivity fails.
    """
    if params.ell <= -0.5:
        raise ParameterError("Wronskian positivity needs ell > -1/2")
    u = R_poly(params, n).coeffs
    v = R_poly(params.shifted(dell=-1.0), n + 1).coeffs
    w_poly = npoly.polysub(npoly.polymul(u, npoly.polyder(v)), npoly.polymul(npoly.polyder(u), v))
    w = float(npoly.polyval(x, w_poly))
    s = wronskian_R_sum(params, n, x)
    if abs(w - s) > 1e-9 * max(abs(w), abs(s), 1e-30):
        raise ConditioningError(
            f"Wronskian {w!r} and positive-sum form {s!r} disagree beyond 1e-9"
        )
    if not w > 0.0:
        raise ConditioningError(f"Wronskian positivity violated: {w!r} at x={x}")
    return w


def mittag_leffler_residual(params: CoulombParams, x: float, n_terms: int):
    """Truncation residuals (r1, r2) of the two zero-sum expansions.

    r1 compares x varphi(ell+1)/varphi(ell) with its partial-fraction sum
    (ell+1)/(2((ell+1)^2+eta^2)) sum_k x/(x_k (x_k - x)); r2 compares
    phi'/phi with eta/(ell+1) + sum_k x/(x_k (x - x_k)).  The sums run
    over the first n_terms positive and n_terms negative zeros that exist
    inside the evaluation domain; once the domain is exhausted the
    residual saturates (more requested terms cannot change it).
    """
    _require_family_regime(params, "zero-sum residuals")
    if n_terms < 1:
        raise ParameterError("n_terms must be >= 1")
    ell, eta = params.ell, params.eta
    pos = positive_zeros(params, VARPHI, n_terms)
    neg = negative_zeros(params, VARPHI, n_terms)
    zs = list(pos.zeros) + list(neg.zeros)
    for z in zs:
        if abs(x - z) < 1e-6:
            raise PoleProximityError(f"x={x} within 1e-6 of the zero {z}")

    vals, _, _ = phi_sums(ell, eta, float(x))
    phi, dphi = vals[0], vals[1]
    up = params.shifted(dell=1.0)
    phi_up = phi_sums(up.ell, eta, float(x))[0][0]
    # varphi ratio via the Gamma-factor ratio: varphi_{l+1}/varphi_l =
    # phi_{l+1} / (phi_l (2l+2)(2l+3))
    ratio = x * phi_up / (phi * (2.0 * ell + 2.0) * (2.0 * ell + 3.0))

    s1 = sum(x / (z * (z - x)) for z in zs)
    r1 = abs(ratio - (ell + 1.0) / (2.0 * ((ell + 1.0) ** 2 + eta * eta)) * s1)

    s2 = sum(x / (z * (x - z)) for z in zs)
    r2 = abs(dphi / phi - eta / (ell + 1.0) - s2)
    return r1, r2
