"""Parameter handling for the (ell, eta) plane.

The pair (ell, eta) selects one member of the wave-function family.  Most
operations are only defined when the normalizing factor 1/Gamma(2*ell + 2)
is finite and nonzero, i.e. when 2*ell + 2 is not a non-positive integer.
The excluded values ell = -1, -3/2, -2, -5/2, ... are handled separately
through a limiting formula, so every parameter pair is classified into one
of two regimes before evaluation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum

#: tolerance used when deciding whether ell sits on one of the excluded
#: points -(n+1)/2, n = 1, 2, 3, ...
HALF_INTEGER_TOL = 1e-9

#: default certified evaluation domain |x| <= DEFAULT_MAX_X for the power
#: series in double precision (cancellation stays below ~1e12 there)
DEFAULT_MAX_X = 50.0

#: environment variable that overrides the certified domain, at the
#: caller's own risk
MAX_X_ENV = "COULOMB_MAX_X"


class CoulombError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CoulombError):
    """Argument outside the certified evaluation domain."""


class RegimeError(CoulombError):
    """Operation undefined for the parameter regime of (ell, eta)."""


class ParameterError(CoulombError):
    """Invalid or out-of-range parameter value."""


class GammaPoleError(CoulombError):
    """Gamma function evaluated at (or too close to) a non-positive integer."""


class ConvergenceError(CoulombError):
    """Iteration failed to converge within its budget."""


class BracketError(CoulombError):
    """A requested sign-change bracket could not be established."""


class LossOfZeroError(CoulombError):
    """A tracked zero left the computable domain during a parameter sweep."""


class ConditioningError(CoulombError):
    """Result rejected because round-off contamination exceeded its threshold."""


class PoleProximityError(CoulombError):
    """Evaluation point too close to a pole of the expression."""


class Regime(Enum):
    REGULAR = "regular"
    HALF_INTEGER = "half_integer"


def classify(ell: float) -> Regime:
    """Classify ell: HALF_INTEGER iff ell = -(n+1)/2 for some integer n >= 1.

    Equivalently, HALF_INTEGER marks the poles of Gamma(2*ell + 2).  The
    comparison uses the fixed tolerance ``HALF_INTEGER_TOL`` so the
    classification is a deterministic pure function of ell.
    """
    n = round(-2.0 * ell - 1.0)
    if n >= 1 and abs(ell + (n + 1) / 2.0) <= HALF_INTEGER_TOL:
        return Regime.HALF_INTEGER
    return Regime.REGULAR


@dataclass(frozen=True)
class CoulombParams:
    """Validated (ell, eta) pair.

    ell is the (real) angular-momentum-like order, eta the charge-strength
    parameter multiplying the 2*eta/x term of the defining equation.
    """

    ell: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.ell) and math.isfinite(self.eta)):
            raise ParameterError("ell and eta must be finite")

    @property
    def regime(self) -> Regime:
        return classify(self.ell)

    def shifted(self, dell: float = 0.0, deta: float = 0.0) -> "CoulombParams":
        """New parameter pair with ell and/or eta offset."""
        return CoulombParams(self.ell + dell, self.eta + deta)

    def require_regular(self, what: str = "operation") -> None:
        if self.regime is not Regime.REGULAR:
            raise RegimeError(
                f"{what} undefined at ell={self.ell}: 2*ell+2 is a "
                "non-positive integer (normalizing Gamma factor has a pole)"
            )


def certified_max_x() -> float:
    """Current evaluation-domain bound |x| <= max_x.

    Reads the ``COULOMB_MAX_X`` environment variable; values above the
    built-in default weaken the accuracy guarantees and trigger a warning
    diagnostic in the command-line front end.
    """
    raw = os.environ.get(MAX_X_ENV)
    if raw is None:
        return DEFAULT_MAX_X
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"{MAX_X_ENV} must be a number, got {raw!r}")
    if value <= 0.0:
        raise ParameterError(f"{MAX_X_ENV} must be positive")
    return value
