"""Closed-form zone flows, half-return maps, and the event-driven simulator.

Each zone of a two-zone piecewise-linear system is an affine ODE
X' = M X + u whose flow is known in closed form through the 2x2 matrix
exponential (trace/trace-free splitting).  Events on the switching line
x = 0 -- and on any horizontal section -- are located by bracketing a
closed-form coordinate function and bisecting to machine precision, so no
generic stepping error enters the simulation.  Motion inside
sliding/escaping segments of the switching line follows the Filippov
convex combination, integrated with a fixed-step RK4 whose step is a small
fraction of the segment length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PwlSystem
from .errors import (
    DegenerateLinearPart,
    EventStall,
    MaxSegmentsExceeded,
    NonCenterPlus,
    NonPositiveAmplitude,
    NoReturn,
)
from .sigma import (
    RegionKind,
    Visibility,
    classify_point,
    find_folds,
    sliding_vector,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# canonical-frame closed forms
# ---------------------------------------------------------------------------

def flow_minus(e: float, y0: float, t):
    """Unperturbed left-zone flow from (0, y0): circles around (-e, 0).

    x(t) = e(cos t - 1) - y0 sin t,  y(t) = y0 cos t + e sin t.

    The first component is evaluated in the equivalent product form
    -2 sin(t/2) (e sin(t/2) + y0 cos(t/2)), which avoids cancellation when
    the orbit returns to the switching line.
    """
    t = np.asarray(t, dtype=float)
    half = 0.5 * t
    sh, ch = np.sin(half), np.cos(half)
    x = -2.0 * sh * (e * sh + y0 * ch)
    y = y0 * np.cos(t) + e * np.sin(t)
    return x, y


def flow_plus(a: float, b: float, c: float, d: float, y1: float, s):
    """Unperturbed right-zone flow from (0, y1); requires a^2 + b*c < 0.

    Solves x'' + xi^2 x = b d with x(0) = 0, x'(0) = b y1 and recovers
    y = (x' - a x)/b:

        x(s) = b (d - d cos(s xi) + y1 xi sin(s xi)) / xi^2,
        y(s) = (-a d + (a d + y1 xi^2) cos(s xi)
                + xi (d - a y1) sin(s xi)) / xi^2.

    The first component is evaluated in the equivalent product form
    (2b/xi^2) sin(s xi/2) (d sin(s xi/2) + y1 xi cos(s xi/2)) to avoid
    cancellation at returns to the switching line.
    """
    disc = a * a + b * c
    if disc >= 0:
        raise NonCenterPlus("right zone is not a center (a^2 + b*c >= 0)")
    xi = math.sqrt(-disc)
    s = np.asarray(s, dtype=float)
    cs, sn = np.cos(s * xi), np.sin(s * xi)
    sh, ch = np.sin(0.5 * s * xi), np.cos(0.5 * s * xi)
    x = (2.0 * b / (xi * xi)) * sh * (d * sh + y1 * xi * ch)
    y = (-a * d + (a * d + y1 * xi * xi) * cs + xi * (d - a * y1) * sn) / (xi * xi)
    return x, y


def half_return_time_minus(e: float, y0: float) -> float:
    """First return time to x = 0 of the left flow started at (0, y0), y0 > 0.

    t = 2 pi - arccos(2 e^2 / (e^2 + y0^2) - 1), in (pi, 2 pi); the landing
    point is (0, -y0).
    """
    if y0 <= 0:
        raise NonPositiveAmplitude("left half-return needs y0 > 0")
    t = TWO_PI - math.acos(2.0 * e * e / (e * e + y0 * y0) - 1.0)
    # two Newton polish steps remove the arccos rounding (x' = -y there)
    for _ in range(2):
        x, y = flow_minus(e, y0, t)
        if y != 0.0:
            t -= float(x) / (-float(y))
    return t


def half_return_time_plus(a: float, b: float, c: float, d: float, y1: float) -> float:
    """Signed (negative) time for the right flow to reach x = 0 again.

    t = -(1/xi) arccos(2 d^2 / (d^2 + xi^2 y1^2) - 1), in (-pi/xi, 0].
    The formula is even in y1; x(t) vanishes for the orbit flowed backward
    from the exit point (0, |y1|), which lands at (0, -|y1|).
    """
    disc = a * a + b * c
    if disc >= 0:
        raise NonCenterPlus("right zone is not a center (a^2 + b*c >= 0)")
    xi = math.sqrt(-disc)
    t = -math.acos(2.0 * d * d / (d * d + xi * xi * y1 * y1) - 1.0) / xi
    y_ref = abs(y1)
    for _ in range(2):
        x, y = flow_plus(a, b, c, d, y_ref, t)
        slope = a * float(x) + b * float(y)
        if slope != 0.0:
            t -= float(x) / slope
    return t


# ---------------------------------------------------------------------------
# exact affine zone flow (any perturbation order folded in)
# ---------------------------------------------------------------------------

class AffineFlow:
    """Closed-form flow of X' = M X + u for a fixed 2x2 M and offset u."""

    def __init__(self, M, u):
        self.M = np.asarray(M, dtype=float)
        self.u = np.asarray(u, dtype=float)
        det = float(np.linalg.det(self.M))
        scale = max(1.0, float(np.abs(self.M).max()) ** 2)
        if abs(det) < 1e-14 * scale:
            raise DegenerateLinearPart("zone matrix is numerically singular")
        self.equilibrium = np.linalg.solve(self.M, -self.u)
        self.mu = 0.5 * (self.M[0, 0] + self.M[1, 1])
        self.N = self.M - self.mu * np.eye(2)
        self.w2 = -float(np.linalg.det(self.N))  # N^2 = w2 * I
        self.omega = math.sqrt(abs(self.w2)) if abs(self.w2) > 0 else 0.0

    def _cs(self, t):
        """Scalar pair (c, s) with e^{Nt} = c I + s N."""
        t = np.asarray(t, dtype=float)
        w2 = self.w2
        if w2 < -1e-14:
            om = self.omega
            return np.cos(om * t), np.sin(om * t) / om
        if w2 > 1e-14:
            om = self.omega
            return np.cosh(om * t), np.sinh(om * t) / om
        z = w2 * t * t
        return 1.0 + z / 2.0 + z * z / 24.0, t * (1.0 + z / 6.0 + z * z / 120.0)

    def state(self, X0, t):
        """Flow of X0 after time t (t scalar or array; result (2,) or (n, 2))."""
        X0 = np.asarray(X0, dtype=float)
        d0 = X0 - self.equilibrium
        c, s = self._cs(t)
        ex = np.exp(self.mu * np.asarray(t, dtype=float))
        comp0 = ex * (c * d0[0] + s * (self.N[0, 0] * d0[0] + self.N[0, 1] * d0[1]))
        comp1 = ex * (c * d0[1] + s * (self.N[1, 0] * d0[0] + self.N[1, 1] * d0[1]))
        out = np.stack([comp0 + self.equilibrium[0], comp1 + self.equilibrium[1]], axis=-1)
        return out

    def velocity(self, X) -> np.ndarray:
        return self.M @ np.asarray(X, dtype=float) + self.u

    def rotation_period(self) -> float:
        """2 pi / omega for oscillatory zones, else a fallback time scale."""
        if self.w2 < -1e-14:
            return TWO_PI / self.omega
        rate = max(abs(self.mu), self.omega, 1e-2)
        return TWO_PI / rate


# ---------------------------------------------------------------------------
# event location on a closed-form coordinate
# ---------------------------------------------------------------------------

def _refine_crossing(g, t_lo, t_hi, tol):
    """Bisection of a bracketed sign change of g down to |t_hi-t_lo| < tol."""
    g_lo = g(t_lo)
    for _ in range(200):
        if t_hi - t_lo < tol:
            break
        t_mid = 0.5 * (t_lo + t_hi)
        g_mid = g(t_mid)
        if g_mid == 0.0:
            return t_mid
        if (g_mid > 0) == (g_lo > 0):
            t_lo, g_lo = t_mid, g_mid
        else:
            t_hi = t_mid
    return 0.5 * (t_lo + t_hi)


def first_component_zero(zone: AffineFlow, X0, direction: float, t_budget: float,
                         component: int = 0, target: float = 0.0,
                         t_min: float = 0.0, event_tol: float = 1e-12,
                         graze_tol: float | None = None):
    """First |t| in (t_min, t_budget] with state(X0, direction*t)[component] = target.

    Returns (t_signed, kind) with kind "cross" for a transversal crossing,
    "graze" when |g| dips below graze_tol at an interior extremum (tangency),
    or (None, "none").  Sampling is geometric near t_min (events arbitrarily
    close to the start are possible when starting on the section) and then
    linear with many samples per rotation, so an oscillatory coordinate
    cannot skip a sign change unnoticed.
    """
    X0 = np.asarray(X0, dtype=float)

    def g(t_abs):
        return zone.state(X0, direction * t_abs)[..., component] - target

    scale = max(1.0, float(np.abs(X0).max()), float(np.abs(zone.equilibrium).max()))
    if graze_tol is None:
        graze_tol = 1e-11 * scale
    # closed-form values below this are rounding noise with arbitrary sign
    # (a tangent start leaves the section quadratically, so early samples
    # sit far below machine precision)
    noise = 64.0 * np.finfo(float).eps * scale

    period = zone.rotation_period()
    lin_step = period / 256.0
    t_start = max(t_min, 1e-13)
    # geometric ramp from t_start up to one linear step
    ts = [t_start]
    while ts[-1] < lin_step:
        ts.append(ts[-1] * 1.35)
    t = ts[-1]
    while t < t_budget:
        t += lin_step
        ts.append(t)
    ts = np.array([t for t in ts if t <= t_budget] + [t_budget])
    if len(ts) < 2:
        return None, "none"
    vals = g(ts)

    solid = np.abs(vals) > noise
    prev = None  # index of the last solid sample
    for i in range(len(ts)):
        if not solid[i]:
            continue
        if prev is not None and vals[prev] * vals[i] < 0:
            tol = event_tol * max(1.0, ts[i])
            t_ev = _refine_crossing(g, ts[prev], ts[i], tol)
            return direction * t_ev, "cross"
        if prev is not None:
            # same-sign stretch: check for a grazing extremum via the velocity
            v_i = zone.velocity(zone.state(X0, direction * ts[prev]))[component] * direction
            v_j = zone.velocity(zone.state(X0, direction * ts[i]))[component] * direction
            if v_i * v_j < 0 and min(abs(vals[prev]), abs(vals[i])) < 1e6 * graze_tol:
                def dg(t_abs):
                    st = zone.state(X0, direction * t_abs)
                    return zone.velocity(st)[component] * direction
                t_ext = _refine_crossing(dg, ts[prev], ts[i], event_tol * max(1.0, ts[i]))
                if abs(g(t_ext)) < graze_tol:
                    return direction * t_ext, "graze"
        prev = i
    return None, "none"


# ---------------------------------------------------------------------------
# trajectories and the simulator
# ---------------------------------------------------------------------------

ZONE_PLUS = "ZonePlus"
ZONE_MINUS = "ZoneMinus"
SLIDING = "Sliding"


@dataclass(frozen=True)
class SimOptions:
    max_segments: int = 10_000
    event_tol: float = 1e-12
    sample_stride: int = 32          # recorded samples per zone arc
    sliding_step_frac: float = 1e-4  # RK4 step as a fraction of segment length


@dataclass(frozen=True)
class SegmentInfo:
    kind: str
    t_start: float
    t_end: float


@dataclass(frozen=True)
class Crossing:
    t: float
    y: float
    into: str  # zone entered ("plus" | "minus")


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)    # (t, x, y) triples
    segments: list = field(default_factory=list)   # SegmentInfo
    crossings: list = field(default_factory=list)  # Crossing events on x = 0
    stopped: str = "t_max"                         # why the run ended

    def as_array(self) -> np.ndarray:
        return np.array(self.samples, dtype=float)

    def segment_kinds(self) -> list:
        return [s.kind for s in self.segments]

    def to_csv(self) -> str:
        lines = ["t,x,y,segment_kind"]
        seg_iter = iter(self.segments)
        seg = next(seg_iter, None)
        for (t, x, y) in self.samples:
            while seg is not None and t > seg.t_end + 1e-12:
                seg = next(seg_iter, None)
            kind = seg.kind if seg is not None else ""
            lines.append(f"{t:.17g},{x:.17g},{y:.17g},{kind}")
        return "\n".join(lines) + "\n"


def _zone_name(side: str) -> str:
    return ZONE_PLUS if side == "plus" else ZONE_MINUS


def _entry_side(sys: PwlSystem, y: float, direction: float) -> str | None:
    """Zone entered from (0, y) moving with time direction +-1."""
    zp = sys.zone_matrix("plus")[0, 1] * y + sys.zone_offset("plus")[0]
    zm = sys.zone_matrix("minus")[0, 1] * y + sys.zone_offset("minus")[0]
    if direction > 0:
        if zp > 0 and zm > 0:
            return "plus"
        if zp < 0 and zm < 0:
            return "minus"
    else:
        if zp > 0 and zm > 0:
            return "minus"
        if zp < 0 and zm < 0:
            return "plus"
    return None


def _fold_map(sys: PwlSystem) -> dict:
    try:
        return {f.side: f for f in find_folds(sys)}
    except Exception:
        return {}


def simulate(sys: PwlSystem, start, t_max: float, opts: SimOptions | None = None,
             backward: bool = False) -> Trajectory:
    """Event-driven trajectory of the Filippov system from ``start``.

    Zone arcs use the exact affine flow; crossings of x = 0 are bisected on
    the closed form down to ``opts.event_tol``.  On the switching line the
    point is classified: crossing points pass straight through, sliding and
    escaping points follow the Filippov field until a fold endpoint, and a
    double tangency stops the run.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    opts = opts or SimOptions()
    direction = -1.0 if backward else 1.0

    zones = {side: AffineFlow(sys.zone_matrix(side), sys.zone_offset(side))
             for side in ("plus", "minus")}
    folds = _fold_map(sys)

    traj = Trajectory()
    X = np.asarray(start, dtype=float).copy()
    t_abs = 0.0  # unsigned elapsed time
    traj.samples.append((0.0, float(X[0]), float(X[1])))

    snap = opts.event_tol * max(1.0, float(np.abs(X).max()))
    mode: str
    if abs(X[0]) <= snap:
        X[0] = 0.0
        mode = "sigma"
    else:
        mode = "plus" if X[0] > 0 else "minus"

    n_segments = 0
    while t_abs < t_max and n_segments < opts.max_segments:
        if mode == "sigma":
            kind = classify_point(sys, X[1])
            if kind is RegionKind.DOUBLE_TANGENCY:
                traj.stopped = "double_tangency"
                break
            if kind in (RegionKind.SLIDING, RegionKind.ESCAPING):
                mode = "sliding"
                continue
            if kind in (RegionKind.TANGENCY_PLUS, RegionKind.TANGENCY_MINUS):
                # landing at a fold: prefer the sliding branch when the
                # adjacent sliding segment attracts, else follow the
                # visible tangent orbit back into its zone
                side = "plus" if kind is RegionKind.TANGENCY_PLUS else "minus"
                f = folds.get(side)
                if f is not None and f.visibility is Visibility.VISIBLE:
                    mode = side
                else:
                    mode = "sliding"
                continue
            side = _entry_side(sys, X[1], direction)
            if side is None:
                traj.stopped = "inconsistent_crossing"
                break
            traj.crossings.append(Crossing(t=direction * t_abs, y=float(X[1]), into=side))
            mode = side
            continue

        if mode == "sliding":
            t_used, X, reason = _slide(sys, X, direction, t_max - t_abs, opts, traj, t_abs)
            t_abs += t_used
            n_segments += 1
            if reason == "t_max":
                traj.stopped = "t_max"
                break
            if reason == "stall":
                traj.stopped = "sliding_stall"
                break
            # reached a fold endpoint: leave through the visible side
            f1 = folds.get("minus")
            f2 = folds.get("plus")
            out = None
            for f in (f1, f2):
                if f is not None and abs(X[1] - f.y) <= 1e-9 * max(1.0, abs(f.y)):
                    out = f
            if out is None or out.visibility is not Visibility.VISIBLE:
                traj.stopped = "sliding_endpoint"
                break
            mode = out.side
            continue

        # zone arc
        side = mode
        zone = zones[side]
        t_ev, ev_kind = first_component_zero(
            zone, X, direction, t_max - t_abs,
            component=0, target=0.0, t_min=0.0, event_tol=opts.event_tol)
        n_segments += 1
        if t_ev is None:
            _record_arc(traj, zone, X, direction, t_max - t_abs, t_abs, side, opts)
            X = zone.state(X, direction * (t_max - t_abs))
            t_abs = t_max
            traj.stopped = "t_max"
            break
        dt = abs(t_ev)
        if dt < 1e-14 and ev_kind == "cross":
            raise EventStall("event located at vanishing time offset")
        _record_arc(traj, zone, X, direction, dt, t_abs, side, opts)
        X = zone.state(X, direction * dt)
        X[0] = 0.0
        t_abs += dt
        mode = "sigma"

    else:
        if n_segments >= opts.max_segments:
            raise MaxSegmentsExceeded(f"exceeded {opts.max_segments} segments")
    return traj


def _record_arc(traj, zone, X, direction, dt, t_abs, side, opts):
    n = max(2, opts.sample_stride)
    ts = np.linspace(0.0, dt, n)
    states = zone.state(X, direction * ts)
    for k in range(1, n):
        traj.samples.append((direction * (t_abs + ts[k]),
                             float(states[k, 0]), float(states[k, 1])))
    traj.segments.append(SegmentInfo(kind=_zone_name(side),
                                     t_start=direction * t_abs,
                                     t_end=direction * (t_abs + dt)))


def _slide(sys, X, direction, t_budget, opts, traj, t_abs):
    """Follow the Filippov field along x = 0 until a fold endpoint or t_budget.

    Fixed-step RK4 on dy/dt; the step is opts.sliding_step_frac of the
    segment length.  Returns (elapsed, new_state, reason).
    """
    folds = find_folds(sys)
    if len(folds) != 2:
        return 0.0, X, "stall"
    lo, hi = sorted(f.y for f in folds)
    seg_len = hi - lo
    if seg_len <= 0:
        return 0.0, X, "stall"
    h_y = seg_len * opts.sliding_step_frac

    def f(y):
        return direction * float(sliding_vector(sys, y)[1])

    y = float(X[1])
    t_used = 0.0
    t0_signed = direction * t_abs
    samples = [(t0_signed, 0.0, y)]
    guard = int(4.0 / opts.sliding_step_frac)  # generous step budget
    keep_every = max(1, guard // (8 * max(2, opts.sample_stride)))
    reason = "t_max"
    for step in range(guard):
        if t_used >= t_budget:
            reason = "t_max"
            break
        v = f(y)
        if abs(v) < 1e-15 * max(1.0, seg_len):
            reason = "stall"
            break
        dt = h_y / abs(v)
        dt = min(dt, t_budget - t_used)
        k1 = v
        k2 = f(_clamp(y + 0.5 * dt * k1, lo, hi))
        k3 = f(_clamp(y + 0.5 * dt * k2, lo, hi))
        k4 = f(_clamp(y + dt * k3, lo, hi))
        y_new = y + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if y_new >= hi or y_new <= lo:
            target = hi if y_new >= hi else lo
            # shrink the last step to land exactly on the fold
            frac = (target - y) / (y_new - y)
            t_used += dt * frac
            y = target
            samples.append((t0_signed + direction * t_used, 0.0, y))
            reason = "fold"
            break
        y = y_new
        t_used += dt
        if step % keep_every == 0:
            samples.append((t0_signed + direction * t_used, 0.0, y))
    else:
        reason = "stall"

    traj.samples.extend(samples[1:])
    traj.segments.append(SegmentInfo(kind=SLIDING, t_start=t0_signed,
                                     t_end=t0_signed + direction * t_used))
    return t_used, np.array([0.0, y]), reason


def _clamp(v, lo, hi):
    return min(max(v, lo), hi)


# ---------------------------------------------------------------------------
# first-return displacement (simulation oracle for the displacement map)
# ---------------------------------------------------------------------------

def displacement(sys: PwlSystem, y0: float, opts: SimOptions | None = None) -> float:
    """y_return - y0 for the first return to {x = 0, y > 0} from (0, y0).

    The first-order coefficient of this displacement in the perturbation
    size equals minus the first-order Melnikov function.
    """
    if y0 <= 0:
        raise NonPositiveAmplitude("displacement needs y0 > 0")
    xi_guess = _xi_of(sys)
    t_max = 3.0 * (TWO_PI + math.pi / xi_guess)
    try:
        traj = simulate(sys, (0.0, y0), t_max, opts or SimOptions(max_segments=64))
    except MaxSegmentsExceeded as exc:
        raise NoReturn(f"segment budget exhausted before the return: {exc}") from exc
    for ev in traj.crossings[1:] if _starts_on_sigma(traj) else traj.crossings:
        if ev.y > 0:
            return float(ev.y - y0)
    raise NoReturn(f"no return to x=0, y>0 within t={t_max}")


def melnikov_oracle(sys: PwlSystem, y0: float, eps: float) -> float:
    """Finite-difference estimate of the first-order Melnikov function.

    The return map satisfies P(y0) = y0 - eps*M1(y0) + O(eps^2), so
    -displacement/eps -> M1 as eps -> 0.
    """
    return -displacement(sys.with_epsilon(eps), y0) / eps


def _starts_on_sigma(traj: Trajectory) -> bool:
    t0, x0, _ = traj.samples[0]
    return abs(x0) < 1e-12


def _xi_of(sys: PwlSystem) -> float:
    m = sys.zone_matrix("plus", 0.0)
    disc = 0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]
    return math.sqrt(-disc) if disc < 0 else 1.0


@dataclass(frozen=True)
class HalfReturn:
    """One half-turn through a zone: y_in on the section, y_out at return,
    and the signed flight time (positive left-zone, negative right-zone)."""

    y_in: float
    y_out: float
    time: float


def half_return_minus(e: float, y0: float) -> HalfReturn:
    """Left-zone half turn from (0, y0), y0 > 0; lands at (0, -y0)."""
    t = half_return_time_minus(e, y0)
    _, y_out = flow_minus(e, y0, t)
    return HalfReturn(y_in=y0, y_out=float(y_out), time=t)


def half_return_plus(a: float, b: float, c: float, d: float, y1: float) -> HalfReturn:
    """Right-zone half turn from (0, |y1|) flowed backward; lands at
    (0, -|y1|) with negative flight time."""
    t = half_return_time_plus(a, b, c, d, y1)
    _, y_out = flow_plus(a, b, c, d, abs(y1), t)
    return HalfReturn(y_in=abs(y1), y_out=float(y_out), time=t)
