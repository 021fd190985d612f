"""Domain types for two-zone piecewise-linear systems and the reduction
to normal coordinates.

The plane is split by the switching line ``x = 0``; the "+" piece governs
``x >= 0`` and the "-" piece ``x <= 0``.  A system carries three
perturbation orders, so the zone field is

    Z(X) = (A + eps*B + eps^2*C) X + (u + eps*v + eps^2*w).

``canonicalize`` reduces the order-0 part of a system whose two pieces are
linear centers (a real one on the left, a virtual one for the right piece)
to the normal form

    left:  [[0, -1], [1, 0]] X + (0, e),
    right: [[a,  b], [c, -a]] X + (0, d),

with b < 0, c > 0, d > 0, e > 0 and a^2 + b*c = -xi^2 < 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryCase,
    DegenerateLinearPart,
    HypothesisViolation,
    NonCenterMinus,
    NotTraceFree,
    SwitchingLineNotPreserved,
)

SIGN_MARGIN = 1e-10  # strict inequalities are tested with this margin


@dataclass(frozen=True)
class Mat2:
    """2x2 real matrix with named entries."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Mat2.{name} must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=float)

    @staticmethod
    def from_array(a) -> "Mat2":
        a = np.asarray(a, dtype=float)
        return Mat2(a[0, 0], a[0, 1], a[1, 0], a[1, 1])

    @staticmethod
    def zero() -> "Mat2":
        return Mat2(0.0, 0.0, 0.0, 0.0)

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21


@dataclass(frozen=True)
class Vec2:
    """Point or offset in the plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("Vec2 entries must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @staticmethod
    def from_array(a) -> "Vec2":
        a = np.asarray(a, dtype=float)
        return Vec2(float(a[0]), float(a[1]))

    @staticmethod
    def zero() -> "Vec2":
        return Vec2(0.0, 0.0)


ZonePair = tuple[Mat2, Vec2]


@dataclass(frozen=True)
class PwlSystem:
    """Two-zone piecewise-linear system expanded to second order.

    Each ``order*_plus/minus`` pair is (matrix, offset).  ``epsilon`` is the
    perturbation size at which the concrete vector field is evaluated.
    """

    order0_plus: ZonePair
    order0_minus: ZonePair
    order1_plus: ZonePair = (Mat2.zero(), Vec2.zero())
    order1_minus: ZonePair = (Mat2.zero(), Vec2.zero())
    order2_plus: ZonePair = (Mat2.zero(), Vec2.zero())
    order2_minus: ZonePair = (Mat2.zero(), Vec2.zero())
    epsilon: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError("epsilon must be finite and >= 0")

    def orders(self, side: str) -> tuple[ZonePair, ZonePair, ZonePair]:
        if side == "plus":
            return (self.order0_plus, self.order1_plus, self.order2_plus)
        if side == "minus":
            return (self.order0_minus, self.order1_minus, self.order2_minus)
        raise ValueError("side must be 'plus' or 'minus'")

    def zone_matrix(self, side: str, epsilon: float | None = None) -> np.ndarray:
        """A + eps*B + eps^2*C for the requested side."""
        eps = self.epsilon if epsilon is None else epsilon
        (a, _), (b, _), (c, _) = self.orders(side)
        return a.array + eps * b.array + eps * eps * c.array

    def zone_offset(self, side: str, epsilon: float | None = None) -> np.ndarray:
        eps = self.epsilon if epsilon is None else epsilon
        (_, u), (_, v), (_, w) = self.orders(side)
        return u.array + eps * v.array + eps * eps * w.array

    def field(self, point, side: str | None = None) -> np.ndarray:
        """Vector field at ``point``; zone chosen by sign(x) unless forced."""
        p = np.asarray(point, dtype=float)
        if side is None:
            side = "plus" if p[0] >= 0.0 else "minus"
        return self.zone_matrix(side) @ p + self.zone_offset(side)

    def with_epsilon(self, eps: float) -> "PwlSystem":
        return PwlSystem(
            self.order0_plus, self.order0_minus,
            self.order1_plus, self.order1_minus,
            self.order2_plus, self.order2_minus,
            epsilon=eps,
        )

    # -- JSON wire format ------------------------------------------------
    # {"order0": {"plus": {"matrix": [...4], "offset": [...2]}, "minus": ...},
    #  "order1": ..., "order2": ..., "epsilon": s}
    # order1/order2 may be omitted and default to zero.

    def to_dict(self) -> dict:
        def pair(p: ZonePair) -> dict:
            m, u = p
            return {"matrix": [m.m11, m.m12, m.m21, m.m22], "offset": [u.x, u.y]}

        return {
            "order0": {"plus": pair(self.order0_plus), "minus": pair(self.order0_minus)},
            "order1": {"plus": pair(self.order1_plus), "minus": pair(self.order1_minus)},
            "order2": {"plus": pair(self.order2_plus), "minus": pair(self.order2_minus)},
            "epsilon": self.epsilon,
        }

    @staticmethod
    def from_dict(data: dict) -> "PwlSystem":
        def pair(order: str, side: str) -> ZonePair:
            block = data.get(order)
            if block is None:
                if order == "order0":
                    raise ValueError("missing required key 'order0'")
                return (Mat2.zero(), Vec2.zero())
            if side not in block:
                raise ValueError(f"missing key '{order}.{side}'")
            entry = block[side]
            mat = entry.get("matrix")
            off = entry.get("offset")
            if not isinstance(mat, (list, tuple)) or len(mat) != 4:
                raise ValueError(f"'{order}.{side}.matrix' must be a 4-element row-major array")
            if not isinstance(off, (list, tuple)) or len(off) != 2:
                raise ValueError(f"'{order}.{side}.offset' must be a 2-element array")
            try:
                m = Mat2(*(float(x) for x in mat))
                u = Vec2(*(float(x) for x in off))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"non-numeric entry in '{order}.{side}': {exc}") from exc
            return (m, u)

        if not isinstance(data, dict):
            raise ValueError("top-level JSON value must be an object")
        eps = data.get("epsilon", 0.0)
        if not isinstance(eps, (int, float)):
            raise ValueError("'epsilon' must be a number")
        return PwlSystem(
            order0_plus=pair("order0", "plus"),
            order0_minus=pair("order0", "minus"),
            order1_plus=pair("order1", "plus"),
            order1_minus=pair("order1", "minus"),
            order2_plus=pair("order2", "plus"),
            order2_minus=pair("order2", "minus"),
            epsilon=float(eps),
        )

    @staticmethod
    def from_json(text: str) -> "PwlSystem":
        return PwlSystem.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def canonical_system(a: float, b: float, c: float, d: float, e: float,
                     B_minus=None, v_minus=None, B_plus=None, v_plus=None,
                     C_minus=None, w_minus=None, C_plus=None, w_plus=None,
                     epsilon: float = 0.0) -> PwlSystem:
    """Build a system whose order-0 part is already in normal coordinates."""
    def mat(x):
        return Mat2.zero() if x is None else Mat2.from_array(np.asarray(x, dtype=float))

    def vec(x):
        return Vec2.zero() if x is None else Vec2.from_array(np.asarray(x, dtype=float))

    return PwlSystem(
        order0_plus=(Mat2(a, b, c, -a), Vec2(0.0, d)),
        order0_minus=(Mat2(0.0, -1.0, 1.0, 0.0), Vec2(0.0, e)),
        order1_plus=(mat(B_plus), vec(v_plus)),
        order1_minus=(mat(B_minus), vec(v_minus)),
        order2_plus=(mat(C_plus), vec(w_plus)),
        order2_minus=(mat(C_minus), vec(w_minus)),
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class CanonicalParams:
    """The five scalars of the normal form plus xi = sqrt(-(a^2 + b*c))."""

    a: float
    b: float
    c: float
    d: float
    e: float
    xi: float

    def validate(self) -> None:
        if not (self.b < 0 and self.c > 0 and self.d > 0 and self.e > 0):
            raise ValueError("sign constraints b<0, c>0, d>0, e>0 violated")
        disc = self.a * self.a + self.b * self.c
        if disc >= 0:
            raise ValueError("a^2 + b*c must be negative")
        if not math.isclose(self.xi * self.xi, -disc, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError("xi^2 != -(a^2 + b*c)")


@dataclass(frozen=True)
class ChangeOfVariables:
    """Affine change ``Y = linear @ X + offset`` with time rescaling
    ``t_new = time_scale * t_old``.  Maps original coordinates to normal
    coordinates; ``invert`` goes back."""

    linear: tuple[tuple[float, float], tuple[float, float]]
    offset: tuple[float, float]
    time_scale: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.linear, dtype=float)

    def apply(self, point) -> np.ndarray:
        return self.matrix @ np.asarray(point, dtype=float) + np.array(self.offset)

    def invert(self, point) -> np.ndarray:
        return np.linalg.solve(self.matrix, np.asarray(point, dtype=float) - np.array(self.offset))

    def map_time(self, t: float) -> float:
        return self.time_scale * t

    @property
    def is_identity(self) -> bool:
        return (np.allclose(self.matrix, np.eye(2), rtol=0, atol=1e-12)
                and np.allclose(self.offset, 0.0, rtol=0, atol=1e-12)
                and abs(self.time_scale - 1.0) < 1e-12)

    def push_system(self, sys: PwlSystem) -> PwlSystem:
        """Transform every perturbation order into the new coordinates.

        For Y = Q X + q, tau = rho t the pair (M, u) becomes
        (Q M Q^-1 / rho, Q (u - M Q^-1 q) / rho).
        """
        q = np.array(self.offset)
        qm = self.matrix
        qinv = np.linalg.inv(qm)
        rho = self.time_scale

        def push(pairs):
            out = []
            for m, u in pairs:
                mm = qm @ m.array @ qinv / rho
                uu = qm @ (u.array - m.array @ (qinv @ q)) / rho
                out.append((Mat2.from_array(mm), Vec2.from_array(uu)))
            return out

        plus = push(sys.orders("plus"))
        minus = push(sys.orders("minus"))
        return PwlSystem(plus[0], minus[0], plus[1], minus[1], plus[2], minus[2],
                         epsilon=sys.epsilon)


@dataclass(frozen=True)
class HypothesisReport:
    """Structural conditions for the center reduction.

    h1: the left piece is a linear center with a real singular point;
    h2: the right piece is a linear center with a virtual singular point;
    h3: the sign constraints of the normal form all hold.
    Singular points are reported in normal coordinates when the reduction
    exists, otherwise in the original ones.
    """

    h1_real_center: bool
    h2_virtual_center: bool
    h3_global_center: bool
    singular_minus: Vec2
    singular_plus: Vec2


def _margin(*values: float) -> float:
    return SIGN_MARGIN * max(1.0, *(abs(v) for v in values))


def _center_data(m: Mat2) -> tuple[bool, float]:
    """(is_center, m11 of the trace-free representative).

    A linear piece is a center iff its trace vanishes and the trace-free
    representative has m11^2 + m12*m21 < 0.  Tiny traces are symmetrized
    away; larger ones structurally rule out a center.
    """
    scale = max(1.0, abs(m.m11), abs(m.m12), abs(m.m21), abs(m.m22))
    if abs(m.trace) > 1e-9 * scale:
        return (False, 0.5 * (m.m11 - m.m22))
    m11 = 0.5 * (m.m11 - m.m22)
    disc = m11 * m11 + m.m12 * m.m21
    return (disc < -_margin(m11 * m11, m.m12 * m.m21), m11)


def _singular_point(m: Mat2, u: Vec2) -> np.ndarray:
    det = m.det
    if abs(det) < _margin(m.m11 * m.m22, m.m12 * m.m21):
        raise DegenerateLinearPart("zone matrix is singular; no isolated singular point")
    return np.linalg.solve(m.array, -u.array)


def _tangency_shift(sys: PwlSystem) -> float:
    """Common y-translation removing the first offset components.

    The reduction needs u1 = 0 on both sides; that is possible exactly when
    -u1^-/m12^- = -u1^+/m12^+ (the one-sided tangency points coincide, which
    is forced by the global-center hypothesis).
    """
    (mm, um) = sys.order0_minus
    (mp, up) = sys.order0_plus
    if abs(mm.m12) < _margin(mm.m11, mm.m21, mm.m22):
        raise SwitchingLineNotPreserved("left-zone m12 vanishes")
    km = um.x / mm.m12
    if abs(up.x) < 1e-14 and abs(um.x) < 1e-14:
        return 0.0
    if abs(mp.m12) < _margin(mp.m11, mp.m21, mp.m22):
        raise SwitchingLineNotPreserved("right-zone m12 vanishes with nonzero u1")
    kp = up.x / mp.m12
    if abs(km - kp) > 1e-9 * max(1.0, abs(km), abs(kp)):
        raise HypothesisViolation(
            "one-sided tangency points differ; no global center is possible")
    return km


def _raw_change(sys: PwlSystem) -> ChangeOfVariables:
    (mm, _) = sys.order0_minus
    if abs(mm.m12) < _margin(mm.m11, mm.m21, mm.m22):
        raise SwitchingLineNotPreserved("left-zone m12 vanishes")
    scale = max(1.0, abs(mm.m11), abs(mm.m12), abs(mm.m21), abs(mm.m22))
    if abs(mm.trace) > 1e-9 * scale:
        raise NotTraceFree("left zone matrix has nonzero trace; cannot be a center")
    _, m11 = _center_data(mm)
    disc = m11 * m11 + mm.m12 * mm.m21
    if disc >= -_margin(m11 * m11, mm.m12 * mm.m21):
        if abs(disc) <= _margin(m11 * m11, mm.m12 * mm.m21):
            raise BoundaryCase("left-zone discriminant is numerically zero")
        raise NonCenterMinus("left zone has no center")
    rho = math.sqrt(-disc)
    kappa = _tangency_shift(sys)
    # Compose y -> y + kappa, then (x, y) -> (x, -m11*x - m12*y), then
    # (x, y, t) -> (rho*x, y, rho*t) into a single affine map.
    q = np.array([[rho, 0.0], [-m11, -mm.m12]])
    offset = q @ np.array([0.0, kappa])
    return ChangeOfVariables(
        linear=((q[0, 0], q[0, 1]), (q[1, 0], q[1, 1])),
        offset=(float(offset[0]), float(offset[1])),
        time_scale=rho,
    )


def check_hypotheses(sys: PwlSystem) -> HypothesisReport:
    """Check the structural center hypotheses on the order-0 system.

    h1 holds when the left piece is a center whose singular point has
    x <= 0; h2 when the right piece is a center whose singular point has
    x <= 0 (virtual or on the boundary); h3 when the reduced parameters
    satisfy b < 0, c > 0, d > 0, e > 0 and a^2 + b*c < 0.
    """
    (mm, um) = sys.order0_minus
    (mp, up) = sys.order0_plus

    minus_center, _ = _center_data(mm)
    plus_center, _ = _center_data(mp)

    p_minus = _singular_point(mm, um)
    p_plus = _singular_point(mp, up)

    h1 = bool(minus_center and p_minus[0] <= _margin(p_minus[0]))
    h2 = bool(plus_center and p_plus[0] <= _margin(p_plus[0]))

    h3 = False
    reported_minus, reported_plus = p_minus, p_plus
    if minus_center:
        try:
            _, change = canonicalize(sys)
        except (SwitchingLineNotPreserved, NonCenterMinus, BoundaryCase,
                HypothesisViolation, NotTraceFree):
            h3 = False
            try:
                change = _raw_change(sys)
            except (SwitchingLineNotPreserved, NotTraceFree, NonCenterMinus,
                    BoundaryCase, HypothesisViolation):
                change = None
        else:
            h3 = True
        if change is not None:
            # normal-coordinate singular points: (-e, 0) and d/(a^2+bc)*(-b, a)
            reported_minus = change.apply(p_minus)
            reported_plus = change.apply(p_plus)
    if h3 and not (h1 and h2):
        h3 = False
    return HypothesisReport(
        h1_real_center=h1,
        h2_virtual_center=h2,
        h3_global_center=h3,
        singular_minus=Vec2.from_array(reported_minus),
        singular_plus=Vec2.from_array(reported_plus),
    )


def canonicalize(sys: PwlSystem) -> tuple[CanonicalParams, ChangeOfVariables]:
    """Reduce the order-0 part to normal coordinates.

    Returns the parameter tuple (a, b, c, d, e, xi) together with the
    composite affine change of variables and time rescaling.  Raises when a
    structural prerequisite fails, and ``BoundaryCase`` when one of the
    strict sign constraints falls inside the numerical margin.
    """
    change = _raw_change(sys)
    reduced = change.push_system(sys)
    (ap_m, ap_u) = reduced.order0_plus
    (_, am_u) = reduced.order0_minus

    scale_p = max(1.0, abs(ap_m.m11), abs(ap_m.m12), abs(ap_m.m21), abs(ap_m.m22))
    if abs(ap_m.trace) > 1e-9 * scale_p:
        raise NotTraceFree("right zone matrix has nonzero trace; cannot be a center")

    # left side must now be the unit rotation with offset (0, e)
    a = 0.5 * (ap_m.m11 - ap_m.m22)
    b = ap_m.m12
    c = ap_m.m21
    d = ap_u.y
    e = am_u.y

    checks = {"b < 0": -b, "c > 0": c, "d > 0": d, "e > 0": e,
              "a^2 + b*c < 0": -(a * a + b * c)}
    for label, val in checks.items():
        if val <= _margin(a, b, c, d, e):
            if abs(val) <= _margin(a, b, c, d, e):
                raise BoundaryCase(f"constraint {label} is inside the sign margin")
            raise HypothesisViolation(f"constraint {label} fails after reduction")
    xi = math.sqrt(-(a * a + b * c))
    params = CanonicalParams(a=a, b=b, c=c, d=d, e=e, xi=xi)
    params.validate()
    return params, change
