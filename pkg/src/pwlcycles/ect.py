"""Wronskians and numeric extended-Chebyshev checks for the function
families behind the root-count bounds.

A family (g0, ..., gk) on an interval is an extended complete Chebyshev
system when every leading Wronskian W(g0..gs) is nonvanishing there; any
nontrivial combination then has at most k zeros counting multiplicity.
The checks here are numeric evidence on a grid, never proofs, and the
verdicts say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DerivativeUnavailable

# 4th-order central stencils, offsets -3..3, divided by h^order
_STENCILS = {
    1: ([-2, -1, 1, 2], [1 / 12, -8 / 12, 8 / 12, -1 / 12]),
    2: ([-2, -1, 0, 1, 2], [-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12]),
    3: ([-3, -2, -1, 1, 2, 3], [1 / 8, -1, 13 / 8, -13 / 8, 1, -1 / 8]),
    4: ([-3, -2, -1, 0, 1, 2, 3], [-1 / 6, 2, -13 / 2, 28 / 3, -13 / 2, 2, -1 / 6]),
}

# noise-optimal steps for a 4th-order stencil of the k-th derivative,
# eps_machine^(1/(4+k)); a fixed small step would drown high orders in
# rounding noise (error ~ eps/h^k)
_FD_STEP = {k: float(np.finfo(float).eps ** (1.0 / (4 + k))) for k in _STENCILS}


@dataclass(frozen=True)
class FunctionFamily:
    """Ordered scalar functions on an open interval.

    ``derivatives[i][k-1]`` is the k-th derivative of member i when
    analytic derivatives are supplied; otherwise central differences with
    step 1e-5 * max(1, |s0|) are used.  ``punctures`` are isolated points
    excluded from scan grids (removable factors of closed forms).
    """

    members: tuple
    interval: tuple
    derivatives: tuple | None = None
    derivative_order_available: int = 3
    punctures: tuple = ()

    def deriv(self, i: int, k: int, s0: float) -> float:
        if k == 0:
            return float(self.members[i](s0))
        if self.derivatives is not None and k <= len(self.derivatives[i]):
            return float(self.derivatives[i][k - 1](s0))
        if k not in _STENCILS:
            raise DerivativeUnavailable(f"no stencil for derivative order {k}")
        h = _FD_STEP[k] * max(1.0, abs(s0))
        offs, coefs = _STENCILS[k]
        acc = 0.0
        for o, c in zip(offs, coefs):
            acc += c * float(self.members[i](s0 + o * h))
        return acc / h ** k


def wronskian(fam: FunctionFamily, order: int, s0: float) -> float:
    """Determinant of the (order+1)x(order+1) derivative matrix at s0."""
    if order >= len(fam.members):
        raise ValueError("order must be < number of members")
    lo, hi = fam.interval
    if not (lo < s0 < hi):
        raise ValueError(f"s0={s0} outside the family interval {fam.interval}")
    n = order + 1
    mat = np.empty((n, n))
    for k in range(n):
        for i in range(n):
            mat[k, i] = fam.deriv(i, k, s0)
    return float(np.linalg.det(mat))


class EctVerdict(Enum):
    ECT = "ECT"
    ET_WITH_ACCURACY = "ET_withAccuracy"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class WronskianProfile:
    grid: np.ndarray
    values: np.ndarray        # shape (orders, len(grid))
    sign_changes: list = field(default_factory=list)
    zero_candidates: list = field(default_factory=list)

    def to_csv(self) -> str:
        orders = self.values.shape[0]
        header = "s0," + ",".join(f"W{k}" for k in range(orders))
        lines = [header]
        for j, s0 in enumerate(self.grid):
            row = ",".join(f"{self.values[k, j]:.17g}" for k in range(orders))
            lines.append(f"{s0:.17g},{row}")
        return "\n".join(lines) + "\n"


def check_ect(fam: FunctionFamily, interval=None, grid_size: int = 1024,
              puncture_radius: float = 1e-6):
    """Scan all leading Wronskians on a grid and classify the family.

    ECT: every order is bounded away from zero (min |Wk| > 1e-8 * scale).
    ET_withAccuracy: only the last order changes sign, exactly once, at a
    simple zero.  Anything else is Inconclusive.  Numeric evidence only.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    lo, hi = interval if interval is not None else fam.interval
    # keep the scan strictly inside the open interval
    pad = (hi - lo) * 1e-9
    if lo <= 0:
        grid = np.linspace(lo + pad, hi - pad, grid_size)
    else:
        grid = np.geomspace(lo * (1 + 1e-12), hi * (1 - 1e-12), grid_size)
    for p in fam.punctures:
        grid = grid[np.abs(grid - p) > puncture_radius]
    orders = len(fam.members)
    values = np.empty((orders, len(grid)))
    for k in range(orders):
        for j, s0 in enumerate(grid):
            values[k, j] = wronskian(fam, k, float(s0))

    profile = WronskianProfile(grid=grid, values=values)
    bounded = []
    for k in range(orders):
        v = values[k]
        scale = max(float(np.abs(v).max()), 1e-300)
        negligible = np.abs(v) <= 1e-10 * scale
        sgn = np.sign(v)
        sgn[negligible] = 0.0
        nz = sgn[sgn != 0.0]
        changes = int(np.sum(nz[:-1] * nz[1:] < 0)) if len(nz) > 1 else 0
        profile.sign_changes.append(changes)
        cand = []
        raw_sign = np.sign(v)
        for j in np.where(raw_sign[:-1] * raw_sign[1:] < 0)[0]:
            a, b = float(grid[j]), float(grid[j + 1])
            fa = v[j]
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = wronskian(fam, k, mid)
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            cand.append(0.5 * (a + b))
        profile.zero_candidates.append(cand)
        bounded.append(float(np.abs(v).min()) > 1e-8 * scale and changes == 0
                       and not cand)

    if all(bounded):
        return profile, EctVerdict.ECT
    if all(bounded[:-1]) and profile.sign_changes[-1] == 1 \
            and len(profile.zero_candidates[-1]) == 1:
        z = profile.zero_candidates[-1][0]
        h = 1e-6 * max(1.0, abs(z))
        slope = (wronskian(fam, orders - 1, z + h)
                 - wronskian(fam, orders - 1, z - h)) / (2 * h)
        vscale = max(float(np.abs(values[-1]).max()), 1e-300)
        if abs(slope) > 1e-8 * vscale:
            return profile, EctVerdict.ET_WITH_ACCURACY
    return profile, EctVerdict.INCONCLUSIVE


# ---------------------------------------------------------------------------
# the two concrete families behind the cycle counts
# ---------------------------------------------------------------------------

def _acos_u(u):
    return math.acos(2.0 / u - 1.0)


def amplitude_family(beta: float, interval=(1e-2, 1e2)) -> FunctionFamily:
    """(s0, 1 + beta^2 s0^2, u*arccos(2/u - 1), ub*arccos(2/ub - 1)) with
    u = s0^2+1, ub = beta^2 s0^2 + 1.

    Spans the rescaled Melnikov combination of the unconstrained case;
    analytic derivatives through third order are supplied.  The points
    s0 = 1 and s0 = 1/beta are punctured from scan grids (removable
    factors of the closed-form Wronskians).
    """
    b2 = beta * beta

    f0 = lambda s: s
    f1 = lambda s: 1.0 + b2 * s * s
    f2 = lambda s: (s * s + 1.0) * _acos_u(s * s + 1.0)
    f3 = lambda s: (b2 * s * s + 1.0) * _acos_u(b2 * s * s + 1.0)

    d_f0 = (lambda s: 1.0, lambda s: 0.0, lambda s: 0.0)
    d_f1 = (lambda s: 2.0 * b2 * s, lambda s: 2.0 * b2, lambda s: 0.0)
    d_f2 = (
        lambda s: 2.0 * s * _acos_u(s * s + 1.0) + 2.0,
        lambda s: 2.0 * _acos_u(s * s + 1.0) + 4.0 * s / (s * s + 1.0),
        lambda s: 8.0 / (s * s + 1.0) ** 2,
    )
    d_f3 = (
        lambda s: 2.0 * b2 * s * _acos_u(b2 * s * s + 1.0) + 2.0 * beta,
        lambda s: 2.0 * b2 * _acos_u(b2 * s * s + 1.0)
        + 4.0 * beta ** 3 * s / (b2 * s * s + 1.0),
        lambda s: 8.0 * beta ** 3 / (b2 * s * s + 1.0) ** 2,
    )
    return FunctionFamily(
        members=(f0, f1, f2, f3),
        interval=interval,
        derivatives=(d_f0, d_f1, d_f2, d_f3),
        derivative_order_available=3,
        punctures=(1.0, 1.0 / beta),
    )


def constrained_family(interval=(1e-2, 1e2)) -> FunctionFamily:
    """(s0, (s0^2+1)*arccos(1 - 2/(s0^2+1))): spans the constrained-case
    rescaled Melnikov combination up to an affine substitution."""
    def a_(u):
        return math.acos(1.0 - 2.0 / u)

    f0 = lambda s: s
    f1 = lambda s: (s * s + 1.0) * a_(s * s + 1.0)
    d_f0 = (lambda s: 1.0, lambda s: 0.0, lambda s: 0.0)
    d_f1 = (
        lambda s: 2.0 * s * a_(s * s + 1.0) - 2.0,
        lambda s: 2.0 * a_(s * s + 1.0) - 4.0 * s / (s * s + 1.0),
        lambda s: -8.0 / (s * s + 1.0) ** 2,
    )
    return FunctionFamily(
        members=(f0, f1),
        interval=interval,
        derivatives=(d_f0, d_f1),
        derivative_order_available=3,
        punctures=(1.0,),
    )


# closed forms of the leading Wronskians of ``amplitude_family`` ------------

def amplitude_w0(beta: float, s0):
    return np.asarray(s0, dtype=float) + 0.0


def amplitude_w1(beta: float, s0):
    s0 = np.asarray(s0, dtype=float)
    return beta * beta * s0 * s0 - 1.0


def amplitude_w2(beta: float, s0):
    s0 = np.asarray(s0, dtype=float)
    u = s0 * s0 + 1.0
    return (2.0 * (beta * beta - 1.0) * np.arccos(2.0 / u - 1.0)
            - 4.0 * (beta * beta + 1.0) * s0 / u)


def amplitude_w3(beta: float, s0):
    s0 = np.asarray(s0, dtype=float)
    u = s0 * s0 + 1.0
    ub = beta * beta * s0 * s0 + 1.0
    num = 16.0 * beta ** 3 * (beta * beta - 1.0) * (
        2.0 * s0 * (s0 * s0 - 1.0) + u * u * np.arccos(2.0 / u - 1.0))
    return num / (u * u * ub * ub)


def amplitude_w3_tilde_slope(beta: float, s0):
    """d/ds0 of W3*(beta^2 s0^2+1)^2: 256 beta^3 (beta^2-1) s0^2/(s0^2+1)^3;
    its sign is the sign of beta^3 (beta^2 - 1) for all s0 != 0."""
    s0 = np.asarray(s0, dtype=float)
    return 256.0 * beta ** 3 * (beta * beta - 1.0) * s0 * s0 / (s0 * s0 + 1.0) ** 3


def constrained_w1(s0):
    s0 = np.asarray(s0, dtype=float)
    u = s0 * s0 + 1.0
    return -2.0 * s0 + (s0 * s0 - 1.0) * np.arccos(1.0 - 2.0 / u)


def constrained_w1_tilde_slope(s0):
    """d/ds0 of W1/(s0^2-1): 8 s0^2 / ((s0^2-1)^2 (s0^2+1)), positive."""
    s0 = np.asarray(s0, dtype=float)
    return 8.0 * s0 * s0 / ((s0 * s0 - 1.0) ** 2 * (s0 * s0 + 1.0))
