"""First-order Melnikov function of the perturbed two-zone center, its
reduced forms, root isolation, and stability classification.

With the unperturbed part in normal coordinates, the first return map on
{x = 0, y > 0} expands as P(y0) = y0 - eps*M1(y0) + O(eps^2).  Simple
zeros of M1 are amplitudes of crossing limit cycles; signs of M1 around a
zero give its stability (M1 > 0 below and M1 < 0 above an isolated zero
means the cycle repels).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import PwlSystem
from .errors import ConstraintViolated, MelnikovDomainError

ARCCOS_CLAMP = 1e-14
SIGN_TOL = 1e-12


class Stability(Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    UNDETERMINED = "Undetermined"


class RootFlag(Enum):
    SIMPLE = "Simple"
    SUSPECT = "Suspect"


@dataclass(frozen=True)
class MelnikovParams:
    """Normal-form scalars plus the first-order entries entering M1."""

    b: float
    d: float
    e: float
    xi: float
    b11m: float
    b22m: float
    v1m: float
    b11p: float
    b22p: float
    v1p: float

    def __post_init__(self):
        if not (self.b < 0 and self.d > 0 and self.e > 0 and self.xi > 0):
            raise ValueError("need b < 0, d > 0, e > 0, xi > 0")

    @property
    def trace_minus(self) -> float:
        return self.b11m + self.b22m

    @property
    def trace_plus(self) -> float:
        return self.b11p + self.b22p

    @property
    def constrained(self) -> bool:
        """Whether the first-order left trace vanishes (b11m = -b22m)."""
        scale = max(1.0, abs(self.b11m), abs(self.b22m))
        return abs(self.trace_minus) <= SIGN_TOL * scale

    @staticmethod
    def from_system(sys: PwlSystem) -> "MelnikovParams":
        """Read parameters off a system already in normal coordinates."""
        (a0p, u0p) = sys.order0_plus
        (a0m, u0m) = sys.order0_minus
        if not (abs(a0m.m11) < 1e-12 and abs(a0m.m22) < 1e-12
                and abs(a0m.m12 + 1.0) < 1e-12 and abs(a0m.m21 - 1.0) < 1e-12
                and abs(u0m.x) < 1e-12 and abs(u0p.x) < 1e-12):
            raise ValueError("system is not in normal coordinates; canonicalize first")
        a = 0.5 * (a0p.m11 - a0p.m22)
        disc = a * a + a0p.m12 * a0p.m21
        if disc >= 0:
            raise ValueError("right zone is not a center")
        (b1p, v1p) = sys.order1_plus
        (b1m, v1m) = sys.order1_minus
        return MelnikovParams(
            b=a0p.m12, d=u0p.y, e=u0m.y, xi=math.sqrt(-disc),
            b11m=b1m.m11, b22m=b1m.m22, v1m=v1m.x,
            b11p=b1p.m11, b22p=b1p.m22, v1p=v1p.x,
        )


def _acos(arg):
    """arccos with clamping restricted to a 1e-14 neighborhood of +-1."""
    arg = np.asarray(arg, dtype=float)
    over = (arg > 1.0 + ARCCOS_CLAMP) | (arg < -1.0 - ARCCOS_CLAMP)
    if np.any(over):
        raise MelnikovDomainError("arccos argument outside [-1, 1] beyond tolerance")
    return np.arccos(np.clip(arg, -1.0, 1.0))


def m1(p: MelnikovParams, y0):
    """First-order Melnikov function at amplitude y0 > 0."""
    y0 = np.asarray(y0, dtype=float)
    if np.any(y0 <= 0):
        raise ValueError("m1 needs y0 > 0")
    e, d, b, xi = p.e, p.d, p.b, p.xi
    sm, sp = p.trace_minus, p.trace_plus
    left_arg = 2.0 * e * e / (e * e + y0 * y0) - 1.0
    right_arg = 2.0 * d * d / (d * d + xi * xi * y0 * y0) - 1.0
    acl = _acos(left_arg)
    acr = _acos(right_arg)
    inner = (-2.0 * b * d * y0 * xi * sp - 4.0 * p.v1p * y0 * xi ** 3
             + b * sp * (d * d + y0 * y0 * xi * xi) * acr)
    val = (4.0 * p.v1m * y0
           - 2.0 * sm * (math.pi * (e * e + y0 * y0) + e * y0)
           + sm * (e * e + y0 * y0) * acl
           - inner / (b * xi ** 3)) / (2.0 * y0)
    return val if val.shape else float(val)


def m1_constrained(p: MelnikovParams, y0):
    """M1 specialized to b11m = -b22m (vanishing first-order left trace).

    M1(y0) = 2 v1m + 2 v1p / b + d (b11p + b22p) / xi^2
             - (b11p + b22p) (d^2 + xi^2 y0^2) arccos(2 d^2/(d^2+xi^2 y0^2) - 1)
               / (2 y0 xi^3).
    """
    scale = max(1.0, abs(p.b11m), abs(p.b22m))
    if abs(p.trace_minus) > SIGN_TOL * scale:
        raise ConstraintViolated("m1_constrained needs b11m = -b22m")
    y0 = np.asarray(y0, dtype=float)
    if np.any(y0 <= 0):
        raise ValueError("m1_constrained needs y0 > 0")
    d, b, xi, sp = p.d, p.b, p.xi, p.trace_plus
    acr = _acos(2.0 * d * d / (d * d + xi * xi * y0 * y0) - 1.0)
    val = (2.0 * p.v1m + 2.0 * p.v1p / b + d * sp / (xi * xi)
           - sp * (d * d + xi * xi * y0 * y0) * acr / (2.0 * y0 * xi ** 3))
    return val if val.shape else float(val)


@dataclass(frozen=True)
class ReducedParams:
    """Data of the rescaled Melnikov combination.

    alpha = e*xi and beta = d/alpha; the amplitude substitution is
    y0 = d*s0/xi = alpha*beta*s0/xi, under which

        mtilde1(s0) = 2*b*beta*xi^2*s0 * M1(d*s0/xi)
                    = K0*s0
                      + K1*(beta^2 s0^2 + 1)*(arccos(2/(beta^2 s0^2+1) - 1) - 2 pi)
                      + K2*(s0^2 + 1)*arccos(2/(s0^2+1) - 1).

    k0, k1 are the analogous constants of the constrained case, where
    s0 * M1(d*s0/xi) = k0*s0 + k1*(s0^2+1)*arccos(2/(s0^2+1) - 1).
    """

    alpha: float
    beta: float
    K0: float
    K1: float
    K2: float
    k0: float
    k1: float

    @staticmethod
    def from_params(p: MelnikovParams) -> "ReducedParams":
        alpha = p.e * p.xi
        beta = p.d / alpha
        sm, sp = p.trace_minus, p.trace_plus
        b, xi = p.b, p.xi
        K0 = 2.0 * beta * (2.0 * xi * xi * (p.v1m * b + p.v1p)
                           - alpha * b * xi * sm + alpha * b * beta * sp)
        K1 = alpha * b * xi * sm
        K2 = -b * alpha * beta * beta * sp
        k0 = 2.0 * p.v1m + 2.0 * p.v1p / b + p.d * sp / (xi * xi)
        k1 = -p.d * sp / (2.0 * xi * xi)
        return ReducedParams(alpha=alpha, beta=beta, K0=K0, K1=K1, K2=K2, k0=k0, k1=k1)


def m1_reduced(red: ReducedParams, s0):
    """The rescaled combination mtilde1(s0); zeros coincide with M1's."""
    s0 = np.asarray(s0, dtype=float)
    if np.any(s0 <= 0):
        raise ValueError("m1_reduced needs s0 > 0")
    ub = red.beta * red.beta * s0 * s0 + 1.0
    u = s0 * s0 + 1.0
    val = (red.K0 * s0
           + red.K1 * ub * (_acos(2.0 / ub - 1.0) - 2.0 * math.pi)
           + red.K2 * u * _acos(2.0 / u - 1.0))
    return val if val.shape else float(val)


def reduced_limit_at_zero(red: ReducedParams) -> float:
    """lim_{s0 -> 0} mtilde1(s0) = -2 pi K1."""
    return -2.0 * math.pi * red.K1


# ---------------------------------------------------------------------------
# root isolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootFindOptions:
    grid: int = 4096
    refine_tol: float = 1e-12
    suspect_rel: float = 1e-6
    dedupe_rel: float = 1e-9


def _feval(f, x: float) -> float:
    return float(np.ravel(f(x))[0])


def find_roots(f, domain, opts: RootFindOptions | None = None):
    """Sign-change bracketing on a log-spaced grid, refined by bisection.

    ``f`` must accept numpy arrays.  Returns a list of (root, RootFlag);
    roots whose central-difference slope is below ``suspect_rel`` times the
    grid scale are flagged SUSPECT (possible multiplicity).
    """
    lo, hi = domain
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    opts = opts or RootFindOptions()
    ys = np.geomspace(lo, hi, opts.grid)
    vals = np.asarray(f(ys), dtype=float)
    scale = float(np.nanmax(np.abs(vals))) / (hi - lo)
    roots = []
    sign = np.sign(vals)
    idx = np.where(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        a, b_ = ys[i], ys[i + 1]
        fa = float(vals[i])
        for _ in range(200):
            if b_ - a < opts.refine_tol * max(1.0, b_):
                break
            mid = 0.5 * (a + b_)
            fm = _feval(f, mid)
            if fm == 0.0:
                a = b_ = mid
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b_ = mid
        root = 0.5 * (a + b_)
        h = 1e-6 * max(1.0, root)
        slope = (_feval(f, root + h) - _feval(f, root - h)) / (2.0 * h)
        flag = RootFlag.SUSPECT if abs(slope) < opts.suspect_rel * max(scale, 1e-300) \
            else RootFlag.SIMPLE
        roots.append((float(root), flag))
    # exact zeros sitting on grid nodes
    for i in np.where(sign == 0)[0]:
        roots.append((float(ys[i]), RootFlag.SUSPECT))
    roots.sort(key=lambda r: r[0])
    deduped = []
    for r, fl in roots:
        if deduped and abs(r - deduped[-1][0]) < opts.dedupe_rel * max(1.0, abs(r)):
            continue
        deduped.append((r, fl))
    return deduped


# ---------------------------------------------------------------------------
# stability classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootInfo:
    y0: float
    flag: RootFlag
    stability: Stability


@dataclass(frozen=True)
class MelnikovReport:
    roots: tuple
    infinity_stability: Stability
    root_count_bound: int

    def to_dict(self) -> dict:
        return {
            "roots": [{"y0": r.y0, "flag": r.flag.value, "stability": r.stability.value}
                      for r in self.roots],
            "infinity_stability": self.infinity_stability.value,
            "root_count_bound": self.root_count_bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def infinity_sign_expression(p: MelnikovParams) -> float:
    """xi*(b11m + b22m) + b11p + b22p, the large-amplitude sign quantity."""
    return p.xi * p.trace_minus + p.trace_plus


def classify_stability(p: MelnikovParams, roots) -> MelnikovReport:
    """Stability labels for the found roots plus the periodic orbit at infinity.

    The highest-amplitude cycle is stable iff the large-amplitude sign
    expression is negative, and infinity has the opposite stability.  The
    lowest-amplitude cycle follows the sign of M1 near zero amplitude:
    sign(M1(0+)) = -sign(b11m + b22m), with the tie broken by
    sign(b*v1m + v1p) when the left trace vanishes; M1 > 0 below a cycle
    makes it unstable.  Interior roots alternate.
    """
    sgn_inf = infinity_sign_expression(p)
    scale = max(1.0, abs(p.xi) * (abs(p.b11m) + abs(p.b22m)), abs(p.b11p) + abs(p.b22p))
    if sgn_inf > SIGN_TOL * scale:
        highest, inf_stab = Stability.UNSTABLE, Stability.STABLE
    elif sgn_inf < -SIGN_TOL * scale:
        highest, inf_stab = Stability.STABLE, Stability.UNSTABLE
    else:
        highest = inf_stab = Stability.UNDETERMINED

    sm = p.trace_minus
    sm_scale = max(1.0, abs(p.b11m), abs(p.b22m))
    tie = p.b * p.v1m + p.v1p
    if sm < -SIGN_TOL * sm_scale:
        lowest = Stability.UNSTABLE       # M1 > 0 near 0+
    elif sm > SIGN_TOL * sm_scale:
        lowest = Stability.STABLE
    elif tie > SIGN_TOL * max(1.0, abs(p.b * p.v1m), abs(p.v1p)):
        lowest = Stability.STABLE
    elif tie < -SIGN_TOL * max(1.0, abs(p.b * p.v1m), abs(p.v1p)):
        lowest = Stability.UNSTABLE
    else:
        lowest = Stability.UNDETERMINED

    ordered = sorted(roots, key=lambda r: r[0])
    n = len(ordered)
    labels = [Stability.UNDETERMINED] * n
    if n:
        if highest is not Stability.UNDETERMINED:
            labels[-1] = highest
            for k in range(n - 2, -1, -1):
                labels[k] = _flip(labels[k + 1])
        elif lowest is not Stability.UNDETERMINED:
            labels[0] = lowest
            for k in range(1, n):
                labels[k] = _flip(labels[k - 1])

    bound = 1 if p.constrained else 3
    infos = tuple(RootInfo(y0=r, flag=fl, stability=lab)
                  for (r, fl), lab in zip(ordered, labels))
    return MelnikovReport(roots=infos, infinity_stability=inf_stab,
                          root_count_bound=bound)


def _flip(s: Stability) -> Stability:
    if s is Stability.STABLE:
        return Stability.UNSTABLE
    if s is Stability.UNSTABLE:
        return Stability.STABLE
    return s


def analyze(p: MelnikovParams, domain=(1e-3, 1e3),
            opts: RootFindOptions | None = None) -> MelnikovReport:
    """Roots of the matching M1 variant plus stability labels."""
    f = (lambda y: m1_constrained(p, y)) if p.constrained else (lambda y: m1(p, y))
    roots = find_roots(f, domain, opts)
    return classify_stability(p, roots)


def m1_csv(p: MelnikovParams, domain=(1e-2, 1e2), n: int = 1024) -> str:
    """CSV sampling of (y0, M1(y0)) for plotting."""
    ys = np.geomspace(domain[0], domain[1], n)
    vals = np.asarray(m1(p, ys))
    lines = ["y0,m1"]
    lines += [f"{y:.17g},{v:.17g}" for y, v in zip(ys, vals)]
    return "\n".join(lines) + "\n"
