"""Built-in demonstration systems used by the golden tests and the CLI.

Example 1 is a first-order perturbation of the two-zone center producing
three crossing limit cycles; Example 2 is a second-order perturbation with
a vanishing first-order left trace exhibiting a sliding cycle together
with one crossing cycle.

The constants below record oracle-confirmed values.  Example 1's nominal
description rounds its cycle amplitudes to 1 and 2 and quotes a third zero
at 3.82781; the displacement function generated by the actual coefficients
vanishes at the EXAMPLE1_M1_ROOTS values instead (confirmed independently
by the finite-difference simulation oracle).  Example 2 ships with a
legacy closed-form displacement expression that does not match its own
parameters (it corresponds to xi = 0.5 and a right first-order trace of
0.1 rather than the system's xi = 1 and 1.1); both are kept, the system's
own root under EXAMPLE2_SYSTEM_ROOT and the legacy expression under
``example_two_nominal_m1`` with its root EXAMPLE2_NOMINAL_ROOT.
"""

from __future__ import annotations

import numpy as np

from .core import PwlSystem, canonical_system
from .melnikov import MelnikovParams
from .sliding import SlidingParams

EXAMPLE1_M1_ROOTS = (1.01060799386648, 1.99176809163252, 3.72203555397127)
EXAMPLE1_NOMINAL_ROOTS = (1.0, 2.0, 3.82781)   # quoted, rounded values
EXAMPLE2_SYSTEM_ROOT = 2.12882852534382
EXAMPLE2_NOMINAL_ROOT = 7.94621657317126       # root of the legacy expression


def example_one(epsilon: float = 0.0) -> PwlSystem:
    """Three crossing limit cycles from a first-order perturbation."""
    return canonical_system(
        a=1.0, b=-1.0, c=1.01, d=0.1, e=0.55,
        B_minus=[[-1.0, 0.0], [0.0, -1.0]], v_minus=[-2.65, 0.0],
        B_plus=[[0.21, 0.0], [0.0, 0.0]], v_plus=[0.0, 0.0],
        epsilon=epsilon,
    )


def example_one_params() -> MelnikovParams:
    return MelnikovParams.from_system(example_one())


def example_two(epsilon: float = 0.0) -> PwlSystem:
    """One sliding cycle plus one crossing cycle (second-order data)."""
    return canonical_system(
        a=-1.0, b=-1.0, c=2.0, d=2.0, e=1.0,
        B_minus=[[1.0, 0.0], [0.0, -1.0]], v_minus=[0.2, 0.0],
        B_plus=[[1.5, 0.0], [0.0, -0.4]], v_plus=[-0.5, 0.0],
        C_minus=[[0.03, 0.0], [0.0, 0.02]], w_minus=[0.0, 0.0],
        epsilon=epsilon,
    )


def example_two_params() -> MelnikovParams:
    return MelnikovParams.from_system(example_two())


def example_two_sliding_params(epsilon: float = 1e-2) -> SlidingParams:
    return SlidingParams(
        a=-1.0, b=-1.0, d=2.0, e=1.0, xi=1.0,
        b11m=1.0, b22m=-1.0, b21m=0.0, v1m=0.2, v2m=0.0, v1p=-0.5,
        c11m=0.03, c22m=0.02, c21m=0.0, w2m=0.0,
        epsilon=epsilon, b11p=1.5, b22p=-0.4,
    )


def example_two_nominal_m1(y0):
    """Example 2's legacy closed-form displacement expression.

    Kept verbatim as a labeled fixture; it does not match the bundled
    system (see module docstring), whose own first-order displacement is
    ``m1_constrained(example_two_params(), y0)``.
    """
    y0 = np.asarray(y0, dtype=float)
    return 2.2 - (0.1 * y0 + 1.6 / y0) * np.arccos(8.0 / (0.25 * y0 * y0 + 4.0) - 1.0)


def type_one_sliding_params(epsilon: float = 1e-2) -> SlidingParams:
    """A constructed parameter set strictly inside the Type-I window,
    with all sign conditions (including 0 < a < d + b*e) satisfied."""
    return SlidingParams(
        a=0.3, b=-1.0, d=1.5, e=1.0, xi=1.0,
        b11m=-0.13, b22m=0.13, b21m=0.11, v1m=0.2, v2m=-0.07, v1p=-0.5,
        c11m=0.03, c22m=0.02, c21m=-0.06, w2m=0.04,
        epsilon=epsilon,
    )
