"""Scalar switching functions and closed-form stability bounds.

Everything here is a pure function of its arguments. The central objects are
the boundary-layer delta function

    delta_surface(s, phi) = s - 2*s*phi/(|s| + phi) = s*(|s| - phi)/(|s| + phi)

and its derivative in s, the adaptation shape function

    adaptation_shape(s, phi) = 1 - 2*phi**2/(|s| + phi)**2,

which is -1 at s = 0, crosses zero at |s| = eta = (sqrt(2) - 1)*phi and
approaches 1 from below as |s| grows. The gain-adaptation law scales this
shape by 1/rho, so the band |s| = eta is where the adaptive gain neither
grows nor shrinks.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, ParameterError, PreconditionError

# (sqrt(2) - 1): ratio between the ultimate band eta and the layer width phi.
BAND_RATIO = math.sqrt(2.0) - 1.0


def _require_positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value)) or value <= 0.0:
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")


def sgn(s: float) -> int:
    """Three-valued signum: 1 for s > 0, -1 for s < 0, 0 for s = 0."""
    if not math.isfinite(s):
        raise DomainError(f"sgn requires a finite input, got {s!r}")
    if s > 0.0:
        return 1
    if s < 0.0:
        return -1
    return 0


def sat(s: float, phi: float) -> float:
    """Linear saturation of s/phi, clamped to [-1, 1]."""
    _require_positive("phi", phi)
    r = s / phi
    if r > 1.0:
        return 1.0
    if r < -1.0:
        return -1.0
    return r


def delta_surface(s: float, phi: float) -> float:
    """Signed distance-like measure of s relative to the boundary layer.

    Vanishes at s = 0 and |s| = phi, tends to s - 2*phi*sgn(s) far outside
    the layer, and is odd in s. Written as s*(|s| - phi)/(|s| + phi) so the
    zeros at |s| = phi are exact in floating point.
    """
    _require_positive("phi", phi)
    a = abs(s)
    return s * (a - phi) / (a + phi)


def adaptation_shape(s: float, phi: float) -> float:
    """Derivative of delta_surface in s; the gain-adaptation rate shape.

    Even in s, equals -1 at s = 0, crosses zero at |s| = (sqrt(2)-1)*phi and
    stays within [-1, 1] for every finite s (the upper bound is approached,
    never exceeded).
    """
    _require_positive("phi", phi)
    t = abs(s) + phi
    return 1.0 - 2.0 * phi * phi / (t * t)


def ultimate_band(phi: float) -> float:
    """Half-width eta = (sqrt(2) - 1)*phi of the band the state settles around."""
    _require_positive("phi", phi)
    return BAND_RATIO * phi


def reach_time_bound(v0, k, rho, mu, b) -> float:
    """Time after which |s| + gain/k is guaranteed below b.

    Evaluates T = (1/k)*ln((v0 - sigma/k)/(b - sigma/k)) with
    sigma = mu + 1/(k*rho). Requires sigma/k < b <= v0; T = 0 at b = v0 and
    grows without bound as b approaches sigma/k from above.
    """
    _require_positive("k", k)
    _require_positive("rho", rho)
    if mu < 0.0 or not math.isfinite(mu):
        raise ParameterError(f"mu must be finite and >= 0, got {mu!r}")
    sigma = mu + 1.0 / (k * rho)
    floor = sigma / k
    if v0 <= floor:
        raise PreconditionError(
            f"initial level v0 = {v0!r} must exceed sigma/k = {floor!r}"
        )
    if not (floor < b <= v0):
        raise PreconditionError(
            f"bound b = {b!r} must lie in (sigma/k, v0] = ({floor!r}, {v0!r}]"
        )
    return math.log((v0 - floor) / (b - floor)) / k


class OvershootBound(NamedTuple):
    """Feasible oscillator stiffness and the excursion bound it certifies."""

    m: float
    delta: float
    feasible: bool


def overshoot_bound(mu, rho, phi, tol: float = 1e-10) -> OvershootBound:
    """Largest feasible stiffness m and the excursion bound delta it yields.

    m must satisfy m < sqrt(2)/(rho*phi) and
    mu*sqrt(m) <= (1/rho)*adaptation_shape(eta + mu/sqrt(m)); the bound is
    delta = sqrt((2*eta)**2 + mu**2/m) - eta, which tightens as m grows, so
    the largest m is found by bisection (absolute tolerance ``tol``).
    Returns feasible=False instead of raising when no m survives (large
    mu*rho/phi pushes the feasible set below the tolerance).
    """
    if mu < 0.0 or not math.isfinite(mu):
        raise ParameterError(f"mu must be finite and >= 0, got {mu!r}")
    _require_positive("rho", rho)
    _require_positive("phi", phi)
    eta = ultimate_band(phi)
    m_sup = math.sqrt(2.0) / (rho * phi)

    def ok(m):
        if m <= 0.0:
            return False
        root = math.sqrt(m)
        return mu * root <= adaptation_shape(eta + mu / root, phi) / rho

    lo, hi = 0.0, m_sup
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo <= 0.0:
        return OvershootBound(math.nan, math.nan, False)
    delta = math.sqrt((2.0 * eta) ** 2 + mu * mu / lo) - eta
    return OvershootBound(lo, delta, True)


def worst_case_response(t, s0, mu, mu_hat0, m, eta) -> float:
    """Closed-form worst-case trajectory of s under the affine gain law.

    s(t) = (s0 + eta)*cos(sqrt(m)*t) + ((mu - mu_hat0)/sqrt(m))*sin(sqrt(m)*t) - eta.
    Its signed maximum over one period is sqrt((s0+eta)**2 + (mu-mu_hat0)**2/m) - eta.
    """
    _require_positive("m", m)
    root = math.sqrt(m)
    return (s0 + eta) * math.cos(root * t) + (mu - mu_hat0) / root * math.sin(root * t) - eta


@dataclass(frozen=True)
class BoundaryLayer:
    """Boundary layer of width phi; eta is always derived, never stored."""

    phi: float

    def __post_init__(self):
        _require_positive("phi", self.phi)

    @property
    def eta(self) -> float:
        return BAND_RATIO * self.phi


@dataclass(frozen=True)
class CertificateBounds:
    """Bundle of the closed-form quantities used by the stability-bound verifiers."""

    sigma: float
    T: float
    b: float
    m: float
    delta_overshoot: float
