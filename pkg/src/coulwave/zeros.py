"""Real-zero machinery: bracketing scans, Brent refinement, zero sweeps.

All targets are expressed through varphi so that every parameter regime
(including the excluded half-integer orders) is coverable:

    VARPHI        varphi(x)
    VARPHI_PRIME  varphi'(x)
    F_PRIME       (ell+1) varphi(x) + x varphi'(x)   (zeros of F' on x > 0)
    DINI(h)       x varphi'(x) + h varphi(x)

Positive zeros are bracketed by an adaptive sign scan (baseline step pi/8,
halved until the bracket count stabilizes between two successive
resolutions) and refined by Brent iteration polished to near machine
precision.  Negative zeros come from the exact sign flip
varphi(ell, -eta; x) = varphi(ell, eta; -x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .params import (
    BracketError,
    ConvergenceError,
    CoulombParams,
    DomainError,
    LossOfZeroError,
    ParameterError,
    Regime,
    classify,
    certified_max_x,
)
from .report import CheckReport, make_report
from .series import phi_sums_array
from .wavefunc import varphi_eval, varphi_derivative, varphi_pair_array, _varphi_core

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class Target:
    """Which combination of varphi and varphi' to find zeros of."""

    kind: str  # "varphi" | "varphi_prime" | "f_prime" | "dini"
    h: float = math.nan

    def label(self) -> str:
        if self.kind == "dini":
            return f"dini({self.h:g})"
        return self.kind


VARPHI = Target("varphi")
VARPHI_PRIME = Target("varphi_prime")
F_PRIME = Target("f_prime")


def dini(h: float) -> Target:
    return Target("dini", float(h))


class InterlacePattern(Enum):
    A_FIRST = "a_first"
    B_FIRST = "b_first"


class Axis(Enum):
    ELL = "ell"
    ETA = "eta"


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo_sign: int
    f_hi_sign: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError("bracket endpoints must satisfy lo < hi")
        if self.f_lo_sign * self.f_hi_sign != -1:
            raise BracketError("bracket endpoints must have opposite signs")


@dataclass(frozen=True)
class ZeroSet:
    params: CoulombParams
    target: Target
    zeros: Tuple[float, ...]
    tol: float
    truncated: bool = False

    def __post_init__(self):
        zs = self.zeros
        if any(zs[i] >= zs[i + 1] for i in range(len(zs) - 1)):
            raise ParameterError("zeros must be strictly increasing")


@dataclass(frozen=True)
class Trajectory:
    axis: Axis
    grid: Tuple[float, ...]
    zero_index: int
    values: Tuple[float, ...]
    continuity_ok: bool
    step_ok: Tuple[bool, ...]
    monotone: bool


def _combine(target: Target, x, v, dv):
    if target.kind == "varphi":
        return v
    if target.kind == "varphi_prime":
        return dv
    if target.kind == "f_prime":
        raise AssertionError  # replaced below per-call (needs ell)
    if target.kind == "dini":
        return x * dv + target.h * v
    raise ParameterError(f"unknown target {target.kind!r}")


def target_value(params: CoulombParams, target: Target, x: float) -> float:
    """Scalar target evaluation."""
    v, dv, _, _, _, _ = _varphi_core(params.ell, params.eta, float(x))
    if target.kind == "f_prime":
        return (params.ell + 1.0) * v + x * dv
    return _combine(target, x, v, dv)


def target_values(params: CoulombParams, target: Target, x: np.ndarray) -> np.ndarray:
    """Vectorized target evaluation."""
    v, dv = varphi_pair_array(params.ell, params.eta, np.asarray(x, dtype=float))
    if target.kind == "f_prime":
        return (params.ell + 1.0) * v + np.asarray(x, dtype=float) * dv
    return _combine(target, np.asarray(x, dtype=float), v, dv)


def zero_lower_bound(params: CoulombParams) -> float:
    """eta + sqrt(eta^2 + (ell+1)^2): no positive zero sits below this
    when ell > -1."""
    return params.eta + math.hypot(params.eta, params.ell + 1.0)


_SCAN_STEP0 = math.pi / 8.0
_SCAN_MIN_STEP = math.pi / 1024.0


def _sign_scan(params: CoulombParams, target: Target, start: float, x_max: float, step: float) -> List[Bracket]:
    n = max(2, int(math.ceil((x_max - start) / step)) + 1)
    xs = np.linspace(start, x_max, n)
    fs = target_values(params, target, xs)
    # nudge exact zeros off the grid so every zero yields a sign change
    hit = fs == 0.0
    if np.any(hit):
        xs = xs.copy()
        xs[hit] += step * 1e-6
        fs = target_values(params, target, xs)
    out = []
    sgn = np.sign(fs)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    for i in idx:
        out.append(Bracket(float(xs[i]), float(xs[i + 1]), int(sgn[i]), int(sgn[i + 1])))
    return out


def scan_brackets(
    params: CoulombParams,
    target: Target,
    x_max: float,
    max_count: int,
    *,
    max_x: Optional[float] = None,
) -> List[Bracket]:
    """Sign-change brackets of the target on (0, x_max].

    Scans from the proven lower bound when the target is VARPHI with
    ell > -1, from just above the origin otherwise.  The step is halved
    until two successive resolutions agree on the bracket count (the
    asymptotic zero spacing is pi, so pi/8 already oversamples; the
    refinement guards the pre-asymptotic region).
    """
    limit = certified_max_x() if max_x is None else max_x
    if x_max > limit:
        raise DomainError(f"x_max exceeds the evaluation domain {limit}")
    start = 1e-6
    if target.kind == "varphi" and params.ell > -1.0:
        start = max(start, zero_lower_bound(params))
    if start >= x_max:
        return []
    step = _SCAN_STEP0
    prev = None
    while True:
        found = _sign_scan(params, target, start, x_max, step)
        if prev is not None and len(found) == len(prev):
            break
        if step <= _SCAN_MIN_STEP:
            break
        prev = found
        step *= 0.5
    return found[:max_count]


def _brent(f: Callable[[float], float], a: float, b: float, fa: float, fb: float, xtol: float) -> float:
    """Brent's method (bisection / secant / inverse quadratic).

    The effective tolerance includes a 2*eps*|b| term, so passing a tiny
    xtol polishes to machine precision.
    """
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError("root not bracketed")
    c, fc = a, fa
    e = d = b - a
    for _ in range(200):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * _EPS * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(tol * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > tol:
            b += d
        elif m > 0.0:
            b += tol
        else:
            b -= tol
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            e = d = b - a
    raise ConvergenceError("Brent iteration exceeded 200 steps")


def refine(params: CoulombParams, target: Target, bracket: Bracket, tol: float = 1e-11) -> float:
    """Refine one bracket to a zero within tol (polished further when the
    evaluation noise allows).

    A simple-zero consistency check compares the local derivative sign
    against the bracket's sign change and rejects flat crossings.
    """
    f = lambda x: target_value(params, target, x)
    fa = f(bracket.lo)
    fb = f(bracket.hi)
    root = _brent(f, bracket.lo, bracket.hi, fa, fb, min(tol, 1e-13))
    h = 1e-7 * max(1.0, abs(root))
    slope = (f(root + h) - f(root - h)) / (2.0 * h)
    if slope * (bracket.f_hi_sign - bracket.f_lo_sign) <= 0.0:
        raise ConvergenceError("simple-zero check failed: derivative sign inconsistent with bracket")
    return root


def _refine_batch(params: CoulombParams, target: Target, brackets: Sequence[Bracket], tol: float) -> List[float]:
    """Brent-refine a list of brackets (polished to near machine width)."""
    f = lambda x: target_value(params, target, x)
    out = []
    for b in brackets:
        out.append(_brent(f, b.lo, b.hi, f(b.lo), f(b.hi), min(tol, 1e-13)))
    return out


def _interlace_ok(inner: Sequence[float], outer: Sequence[float]) -> bool:
    """True when each consecutive pair of ``outer`` brackets one ``inner``."""
    merged = sorted([(z, 0) for z in inner] + [(z, 1) for z in outer])
    labels = [t for _, t in merged]
    return all(labels[i] != labels[i + 1] for i in range(len(labels) - 1))


def positive_zeros(
    params: CoulombParams,
    target: Target,
    count: int,
    tol: float = 1e-11,
    *,
    max_x: Optional[float] = None,
    cross_check: bool = True,
) -> ZeroSet:
    """First ``count`` positive zeros, ascending.

    When fewer than ``count`` zeros exist inside the evaluation domain the
    set is returned truncated (flagged).  For VARPHI in a regime with a
    well-defined neighbor family the scan is cross-checked against the
    interlacing with the (ell+1)-family and re-run finer on disagreement.
    """
    if count < 1:
        raise ParameterError("count must be >= 1")
    limit = certified_max_x() if max_x is None else max_x

    # grow the scan window until enough brackets are found (zero spacing
    # tends to pi, so the first guess is usually enough)
    start = 1e-6
    if target.kind == "varphi" and params.ell > -1.0:
        start = max(start, zero_lower_bound(params))
    x_hi = min(limit, start + (count + 2) * math.pi * 1.25)
    while True:
        brackets = scan_brackets(params, target, x_hi, count, max_x=limit)
        if len(brackets) >= count or x_hi >= limit:
            break
        x_hi = min(limit, x_hi + (count + 2) * math.pi)

    if (
        cross_check
        and target.kind == "varphi"
        and classify(params.ell) is Regime.REGULAR
        and classify(params.ell + 1.0) is Regime.REGULAR
        and brackets
    ):
        step = _SCAN_STEP0 / 8.0
        for _ in range(3):
            neighbor = scan_brackets(params.shifted(dell=1.0), VARPHI, x_hi, count + 2, max_x=limit)
            own_mid = [0.5 * (b.lo + b.hi) for b in brackets]
            nbr_mid = [0.5 * (b.lo + b.hi) for b in neighbor]
            if not nbr_mid:
                break
            # compare on the overlap where both lists are complete
            hi = min(own_mid[-1], nbr_mid[-1])
            own_w = [m for m in own_mid if m <= hi + 1e-12]
            nbr_w = [m for m in nbr_mid if m <= hi + 1e-12]
            if abs(len(own_w) - len(nbr_w)) <= 1 and _interlace_ok(own_w, nbr_w):
                break
            brackets = _sign_scan(params, target, start, x_hi, step)[:count]
            step *= 0.5

    zeros = _refine_batch(params, target, brackets, tol)
    truncated = len(zeros) < count
    zeros = zeros[:count]

    if target.kind == "varphi" and params.ell > -1.0:
        bound = zero_lower_bound(params)
        for z in zeros:
            if z <= bound:
                raise ConvergenceError(
                    f"refined zero {z} at or below the proven lower bound {bound}"
                )
    return ZeroSet(params=params, target=target, zeros=tuple(zeros), tol=tol, truncated=truncated)


def negative_zeros(
    params: CoulombParams,
    target: Target,
    count: int,
    tol: float = 1e-11,
    *,
    max_x: Optional[float] = None,
) -> ZeroSet:
    """First ``count`` negative zeros, ascending (most negative first).

    Uses the exact reflection: negative zeros at (ell, eta) are the
    negated positive zeros at (ell, -eta) for every supported target.
    """
    mirror = positive_zeros(
        CoulombParams(params.ell, -params.eta), target, count, tol, max_x=max_x
    )
    zs = tuple(sorted(-z for z in mirror.zeros))
    return ZeroSet(params=params, target=target, zeros=zs, tol=tol, truncated=mirror.truncated)


def interlace_check(
    a: ZeroSet,
    b: ZeroSet,
    pattern: InterlacePattern,
    claim_id: str = "interlacing",
) -> CheckReport:
    """Verify strict alternation of two zero sets on one half-line.

    A_FIRST requires the zero of ``a`` nearest the origin to come first.
    Sets living on the negative half-line are reflected through the
    origin so the pattern is always read outward from zero.  The margin
    is the smallest gap in the merged sequence; a violated pattern
    reports the negated gap at the first violation.
    """
    za, zb = list(a.zeros), list(b.zeros)
    if abs(len(za) - len(zb)) > 1:
        raise ParameterError("zero sets differ in length by more than one")
    if not za or not zb:
        raise ParameterError("empty zero set")
    neg_a = all(z < 0 for z in za)
    neg_b = all(z < 0 for z in zb)
    if neg_a != neg_b:
        raise ParameterError("zero sets must lie on the same half-line")
    if neg_a:
        za = sorted(-z for z in za)
        zb = sorted(-z for z in zb)

    merged = sorted([(z, "a") for z in za] + [(z, "b") for z in zb])
    want = "a" if pattern is InterlacePattern.A_FIRST else "b"
    margin = math.inf
    worst = {"x": merged[0][0]}
    ok = merged[0][1] == want
    if not ok:
        margin = -abs(merged[1][0] - merged[0][0])
        worst = {"x": merged[0][0]}
    else:
        for i in range(len(merged) - 1):
            gap = merged[i + 1][0] - merged[i][0]
            same = merged[i + 1][1] == merged[i][1]
            signed = -gap if same else gap
            if signed < margin:
                margin = signed
                worst = {"x": merged[i][0]}
    worst.update({"ell": a.params.ell, "eta": a.params.eta})
    return make_report(
        claim_id=claim_id,
        grid_spec=f"{a.target.label()} vs {b.target.label()}, {len(za)}+{len(zb)} zeros",
        worst_margin=margin,
        worst_point=worst,
        tolerance=-1e-13 * max(1.0, abs(merged[-1][0])),
    )


def trace_zero(
    params0: CoulombParams,
    axis: Axis,
    sweep: Tuple[float, float],
    steps: int,
    k: int,
    tol: float = 1e-11,
    *,
    max_x: Optional[float] = None,
) -> Trajectory:
    """Track the k-th positive zero of varphi along an ell- or eta-sweep.

    Warm start: each grid point brackets around a linear prediction from
    the previous zero; a full rescan is the fallback (marking the step
    discontinuous).  The continuity bound per step is
    5 * |grid step| * (|local slope| + 1).
    """
    if steps < 2:
        raise ParameterError("steps must be >= 2")
    if k < 1:
        raise ParameterError("k must be >= 1")
    limit = certified_max_x() if max_x is None else max_x
    grid = np.linspace(sweep[0], sweep[1], steps)

    def at(v: float) -> CoulombParams:
        if axis is Axis.ELL:
            return CoulombParams(v, params0.eta)
        return CoulombParams(params0.ell, v)

    def kth_cold(p: CoulombParams) -> float:
        zs = positive_zeros(p, VARPHI, k, tol, max_x=limit, cross_check=False)
        if len(zs.zeros) < k:
            raise LossOfZeroError(
                f"zero index {k} left the domain (0, {limit}] at {axis.value}={p.ell if axis is Axis.ELL else p.eta}"
            )
        return zs.zeros[k - 1]

    values = [kth_cold(at(float(grid[0])))]
    flags: List[bool] = []
    slope = 0.0
    for i in range(1, steps):
        p = at(float(grid[i]))
        dpar = float(grid[i] - grid[i - 1])
        pred = values[-1] + slope * dpar
        bound = 5.0 * abs(dpar) * (abs(slope) + 1.0)
        z = None
        w = max(0.05, bound)
        for _ in range(3):
            lo = max(1e-6, pred - w)
            hi = min(limit, pred + w)
            if lo < hi:
                found = _sign_scan(p, VARPHI, lo, hi, max((hi - lo) / 24.0, 1e-9))
                if found:
                    best = min(found, key=lambda b: abs(0.5 * (b.lo + b.hi) - pred))
                    z = _refine_batch(p, VARPHI, [best], tol)[0]
                    break
            w *= 3.0
        ok = True
        if z is None:
            z = kth_cold(p)
            ok = False
        if not (0.0 < z <= limit):
            raise LossOfZeroError(f"tracked zero exited (0, {limit}]")
        if abs(z - values[-1]) > bound:
            ok = False
        flags.append(ok)
        slope = (z - values[-1]) / dpar
        values.append(z)

    diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    return Trajectory(
        axis=axis,
        grid=tuple(float(g) for g in grid),
        zero_index=k,
        values=tuple(values),
        continuity_ok=all(flags),
        step_ok=tuple(flags),
        monotone=all(d > 0 for d in diffs),
    )


def common_zero_candidate(params: CoulombParams) -> float:
    """The only point where the families two orders apart can share a zero:
    -(ell+1)(ell+2)/eta."""
    if params.eta == 0.0:
        raise ParameterError("candidate common zero needs eta != 0")
    return -(params.ell + 1.0) * (params.ell + 2.0) / params.eta


def find_ell_star(
    eta: float,
    search: Tuple[float, float] = (-0.5, -0.01),
    tol: float = 1e-10,
) -> float:
    """Order ell* at which varphi(ell, eta; rho*(ell)) vanishes.

    rho*(ell) = -(ell+1)(ell+2)/eta is the unique candidate common zero of
    the families at ell and ell+2; a sign change of
    g(ell) = varphi(ell, eta; rho*(ell)) over the search window is
    bisected to width tol.  Raises when the window shows no sign change.
    """
    if eta == 0.0:
        raise ParameterError("ell* search needs eta != 0")
    lo, hi = float(search[0]), float(search[1])
    if not lo < hi:
        raise ParameterError("search window must satisfy lo < hi")

    def g(ell: float) -> float:
        rho = -(ell + 1.0) * (ell + 2.0) / eta
        return varphi_eval(CoulombParams(ell, eta), rho).value

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0.0:
        raise BracketError(f"no sign change of varphi(ell, rho*(ell)) on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        gm = g(mid)
        if gm == 0.0:
            return mid
        if glo * gm < 0.0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    raise ConvergenceError("bisection for ell* exceeded 200 steps")
