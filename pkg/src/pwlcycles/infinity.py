"""Plane inversion, the induced angular system, and stability of the
periodic orbit at infinity.

Inverting the plane through (u, v) = (x, y)/(x^2+y^2) conjugates a
neighborhood of infinity to a neighborhood of the origin; in polar
coordinates u = r cos(theta), v = r sin(theta) the system becomes

    dr/dt     = -r^2 (f cos(theta) + g sin(theta)),
    dtheta/dt =  r   (g cos(theta) - f sin(theta)),

with (f, g) the planar field evaluated at (cos(theta)/r, sin(theta)/r)
and the zone selected by sign(cos(theta)) (x and u share sign).  For the
two-zone center the angular speed extends to r = 0 and is positive, so
r = 0 is a periodic orbit: the image of infinity.  Its first-order radial
displacement per revolution is

    -(pi/2) * eps * r * ((b11m + b22m) + (b11p + b22p)/xi),

so infinity attracts exactly when xi*(b11m+b22m) + b11p + b22p > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PwlSystem
from .errors import OriginUndefined, ThetaDotVanishes
from .melnikov import MelnikovParams, Stability, infinity_sign_expression

SIGN_TOL = 1e-12


def bendixson_map(x: float, y: float) -> tuple[float, float]:
    """Plane inversion (x, y) -> (x, y)/(x^2 + y^2); an involution."""
    r2 = x * x + y * y
    if r2 == 0.0:
        raise OriginUndefined("inversion undefined at the origin")
    return (x / r2, y / r2)


@dataclass(frozen=True)
class InfinityReport:
    coefficient: float
    stability: Stability

    def to_dict(self) -> dict:
        return {"coefficient": self.coefficient, "stability": self.stability.value}


def infinity_stability(p: MelnikovParams) -> InfinityReport:
    """First-order radial-displacement coefficient at r = 0 and the verdict.

    coefficient = -(pi/2) ((b11m+b22m) + (b11p+b22p)/xi); the periodic
    orbit at infinity is stable (attracting) when
    xi*(b11m+b22m) + b11p+b22p > 0.
    """
    coef = -(math.pi / 2.0) * (p.trace_minus + p.trace_plus / p.xi)
    expr = infinity_sign_expression(p)
    scale = max(1.0, abs(p.xi) * (abs(p.b11m) + abs(p.b22m)),
                abs(p.b11p) + abs(p.b22p))
    if expr > SIGN_TOL * scale:
        stab = Stability.STABLE
    elif expr < -SIGN_TOL * scale:
        stab = Stability.UNSTABLE
    else:
        stab = Stability.UNDETERMINED
    return InfinityReport(coefficient=coef, stability=stab)


def polar_bendixson_rhs(sys: PwlSystem, r: float, theta: float,
                        side: str | None = None):
    """(dr/dt, dtheta/dt) of the inverted system at (r, theta), r > 0.

    The zone follows sign(cos theta) (x and u share sign); ``side`` forces
    it, which integrators use at the half boundaries where cos theta
    rounds ambiguously.
    """
    if r <= 0:
        raise ValueError("polar radius must be positive")
    c, s = math.cos(theta), math.sin(theta)
    if side is None:
        side = "plus" if c >= 0 else "minus"
    x, y = c / r, s / r
    f, g = sys.field((x, y), side)
    dr = -r * r * (f * c + g * s)
    dth = r * (g * c - f * s)
    if abs(dth) < 1e-14 * max(1.0, abs(f) + abs(g)) * r:
        raise ThetaDotVanishes(f"angular speed vanished at r={r}, theta={theta}")
    return float(dr), float(dth)


def _drdtheta(sys: PwlSystem, r: float, theta: float, side: str | None = None) -> float:
    dr, dth = polar_bendixson_rhs(sys, r, theta, side)
    return dr / dth


def poincare_displacement(sys: PwlSystem, r0: float, n_steps: int = 8192) -> float:
    """Radial displacement of the angular return map starting at r0.

    Integrates dr/dtheta over one revolution from theta = -pi/2, split at
    the zone boundaries theta = +-pi/2 so each RK4 half sees a smooth
    right-hand side (the zone is pinned per half; a boundary stage must
    not round into the wrong one).  At the unperturbed system the
    displacement vanishes identically (every planar orbit is closed).
    """
    r = float(r0)
    for t0, t1, side in ((-math.pi / 2, math.pi / 2, "plus"),
                         (math.pi / 2, 3 * math.pi / 2, "minus")):
        h = (t1 - t0) / n_steps
        th = t0
        for _ in range(n_steps):
            k1 = _drdtheta(sys, r, th, side)
            k2 = _drdtheta(sys, r + 0.5 * h * k1, th + 0.5 * h, side)
            k3 = _drdtheta(sys, r + 0.5 * h * k2, th + 0.5 * h, side)
            k4 = _drdtheta(sys, r + h * k3, th + h, side)
            r += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            th += h
    return r - r0


# ---------------------------------------------------------------------------
# first-order radial corrections near r = 0 (variational system)
# ---------------------------------------------------------------------------

def _zone_pq(M, c: float, s: float) -> tuple[float, float]:
    """P = (row2.(c,s)) c - (row1.(c,s)) s and Q = (row1.(c,s)) c + (row2.(c,s)) s."""
    f = M[0, 0] * c + M[0, 1] * s
    g = M[1, 0] * c + M[1, 1] * s
    return g * c - f * s, f * c + g * s


def radial_variational_rhs(sys: PwlSystem, theta: float) -> tuple[float, float]:
    """(h, k) with drho0/dtheta = h*rho0 and drho1/dtheta = h*rho1 + k*rho0.

    These are the r -> 0 limits of the angular system expanded to first
    order in the perturbation size: with P0, Q0 from the order-0 zone
    matrix and P1, Q1 from the order-1 matrix,
    h = -Q0/P0 and k = -(Q1*P0 - Q0*P1)/P0^2.
    """
    c, s = math.cos(theta), math.sin(theta)
    side = "plus" if c >= 0 else "minus"
    (a0, _), (b1, _), _ = sys.orders(side)
    P0, Q0 = _zone_pq(a0.array, c, s)
    P1, Q1 = _zone_pq(b1.array, c, s)
    if abs(P0) < 1e-14:
        raise ThetaDotVanishes(f"angular speed degenerate at theta={theta}")
    return -Q0 / P0, -(Q1 * P0 - Q0 * P1) / (P0 * P0)


def integrate_radial_correction(sys: PwlSystem, theta0: float, theta1: float,
                                rho0: float, n_steps: int = 20000) -> tuple[float, float]:
    """(rho0(theta1), rho1(theta1)) of the variational pair started at
    (rho0, 0) at theta0; RK4 with fixed step."""
    y = np.array([rho0, 0.0])
    h = (theta1 - theta0) / n_steps
    th = theta0

    def rhs(th_, y_):
        hh, kk = radial_variational_rhs(sys, th_)
        return np.array([hh * y_[0], hh * y_[1] + kk * y_[0]])

    for _ in range(n_steps):
        k1 = rhs(th, y)
        k2 = rhs(th + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(th + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(th + h, y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        th += h
    return float(y[0]), float(y[1])


def right_radial_correction(sys: PwlSystem, rho0: float, theta) -> np.ndarray:
    """Reference closed form of the right-zone first-order radial correction
    (theta in (-pi/2, pi/2), vanishing at -pi/2).

    Kept verbatim as a fixture: as written it is the NEGATIVE of the
    forward variational correction (``integrate_radial_correction``
    confirms; the endpoint value of the true correction at pi/2 is
    -(pi/2)*(b11p+b22p)/xi * rho0, which the final displacement
    coefficient and the nonlinear angular return map both corroborate).
    """
    (a0, _) = sys.order0_plus
    (b1, _) = sys.order1_plus
    a, b, c = a0.m11, a0.m12, a0.m21
    xi = math.sqrt(-(a * a + b * c))
    sp = b1.m11 + b1.m22
    c2, d1 = b1.m12, b1.m21
    th = np.asarray(theta, dtype=float)
    s2, co2 = np.sin(2 * th), np.cos(2 * th)
    root = np.sqrt(-2.0 * a * s2 + (b + c) * co2 - b + c)
    pref = -rho0 / (4.0 * b * xi * math.sqrt(-2.0 * b) * root)
    atan_term = np.arctan(a / xi + b * np.tan(th) / xi)
    val = (2.0 * b * sp * atan_term * (-2.0 * a * s2 + (b + c) * co2 - b + c)
           + 2.0 * s2 * (math.pi * a * b * sp + 2.0 * a * c2 * xi + b * xi * (b1.m22 - b1.m11))
           - co2 * (math.pi * b * (b + c) * sp + 2.0 * xi * (c * c2 - b * d1))
           + math.pi * b * (b - c) * sp + 2.0 * b * d1 * xi - 2.0 * c * c2 * xi)
    return pref * val


def left_radial_correction(sys: PwlSystem, rho0: float, theta) -> np.ndarray:
    """Closed form of the left-zone first-order radial correction started
    with value 0 at theta = pi/2 (where the left solution begins):

    rho1(theta) = (rho0/4) (-2 b11 theta - b11 sin 2theta + pi b11
                  + (b12 + b21)(cos 2theta + 1) - 2 b22 theta
                  + b22 sin 2theta + pi b22).
    """
    (b1, _) = sys.order1_minus
    b11, b12, b21, b22 = b1.m11, b1.m12, b1.m21, b1.m22
    th = np.asarray(theta, dtype=float)
    return (rho0 / 4.0) * (
        -2.0 * b11 * th - b11 * np.sin(2 * th) + math.pi * b11
        + (b12 + b21) * (np.cos(2 * th) + 1.0)
        - 2.0 * b22 * th + b22 * np.sin(2 * th) + math.pi * b22
    )
