import numpy as np
import pytest
from numpy.testing import assert_allclose

from pwlcycles.ect import (
    EctVerdict,
    FunctionFamily,
    amplitude_family,
    amplitude_w0,
    amplitude_w1,
    amplitude_w2,
    amplitude_w3,
    amplitude_w3_tilde_slope,
    check_ect,
    constrained_family,
    constrained_w1,
    constrained_w1_tilde_slope,
    wronskian,
)
from pwlcycles.melnikov import ReducedParams, m1_reduced
from pwlcycles.examples import example_one_params


class TestWronskian:
    def test_first_order_closed_form(self):
        fam = amplitude_family(2.0)
        assert wronskian(fam, 0, 1.0) == pytest.approx(1.0)
        assert wronskian(fam, 1, 1.0) == pytest.approx(3.0)  # beta^2 s^2 - 1

    def test_constant_family(self):
        fam = FunctionFamily(members=(lambda s: 1.0,), interval=(0.0, 10.0))
        assert wronskian(fam, 0, 3.0) == pytest.approx(1.0)

    def test_third_order_against_closed_form(self):
        fam = amplitude_family(2.0)
        num = wronskian(fam, 3, 2.0)
        ref = float(amplitude_w3(2.0, 2.0))
        assert_allclose(num, ref, rtol=1e-8)

    def test_all_orders_against_closed_forms(self):
        rng = np.random.default_rng(12)
        for beta in (0.5, 2.0):
            fam = amplitude_family(beta)
            closed = (amplitude_w0, amplitude_w1, amplitude_w2, amplitude_w3)
            for _ in range(25):
                s0 = float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))
                if min(abs(s0 - 1), abs(s0 - 1 / beta)) < 1e-3:
                    continue
                for k in range(4):
                    assert_allclose(wronskian(fam, k, s0), float(closed[k](beta, s0)),
                                    rtol=1e-8, atol=1e-12)

    def test_numeric_derivatives_agree_with_analytic(self):
        # strip the analytic derivatives and recompute with stencils
        for beta in (0.5, 2.0):
            fam = amplitude_family(beta)
            bare = FunctionFamily(members=fam.members, interval=fam.interval,
                                  punctures=fam.punctures)
            rng = np.random.default_rng(4)
            for _ in range(50):
                s0 = float(rng.uniform(0.2, 5.0))
                if min(abs(s0 - 1), abs(s0 - 1 / beta)) < 1e-2:
                    continue
                for k in range(4):
                    a = wronskian(fam, k, s0)
                    n = wronskian(bare, k, s0)
                    assert_allclose(n, a, rtol=1e-6, atol=1e-9)

    def test_constrained_family_closed_form(self):
        fam = constrained_family()
        for s0 in (0.3, 0.7, 2.0, 5.0):
            assert_allclose(wronskian(fam, 1, s0), float(constrained_w1(s0)),
                            rtol=1e-9)

    def test_constrained_slope_is_positive(self):
        ss = np.geomspace(0.05, 50, 200)
        ss = ss[np.abs(ss - 1.0) > 1e-3]
        assert np.all(constrained_w1_tilde_slope(ss) > 0)
        # and W1 itself stays negative: no zeros on the positive axis
        assert np.all(constrained_w1(ss) < 0)

    def test_slope_law_of_reduced_third_wronskian(self):
        ss = np.geomspace(0.05, 50, 100)
        for beta in (0.5, 2.0):
            sign = np.sign(amplitude_w3_tilde_slope(beta, ss))
            assert np.all(sign == np.sign(beta ** 3 * (beta ** 2 - 1)))


class TestCheckEct:
    def test_amplitude_family_verdicts(self):
        # W1 = beta^2 s0^2 - 1 vanishes at 1/beta and W2 crosses near
        # s0 ~ 1.08, so the full family is honestly inconclusive on an
        # interval containing those points; beyond them every leading
        # Wronskian is bounded away from zero
        fam = amplitude_family(2.0, interval=(0.01, 100.0))
        profile, verdict = check_ect(fam, grid_size=512)
        assert verdict is EctVerdict.INCONCLUSIVE
        assert profile.sign_changes == [0, 1, 1, 0]
        fam_hi = amplitude_family(2.0, interval=(1.2, 100.0))
        _, verdict_hi = check_ect(fam_hi, grid_size=512)
        assert verdict_hi is EctVerdict.ECT
        # the last Wronskian alone never vanishes on the positive axis
        ss = np.geomspace(0.01, 100.0, 2000)
        assert np.all(amplitude_w3(2.0, ss) > 0)
        assert np.all(amplitude_w3(0.5, ss) < 0)

    def test_polynomials_are_ect(self):
        fam = FunctionFamily(members=(lambda s: 1.0, lambda s: s, lambda s: s * s),
                             interval=(0.1, 10.0))
        _, verdict = check_ect(fam, grid_size=256)
        assert verdict is EctVerdict.ECT

    def test_constrained_family_verdict(self):
        fam = constrained_family(interval=(0.05, 50.0))
        profile, verdict = check_ect(fam, grid_size=512)
        # the last Wronskian has no zeros off the puncture, so the family
        # is (numerically) a complete Chebyshev system: at most one zero
        assert verdict is EctVerdict.ECT
        assert profile.sign_changes[-1] == 0

    def test_single_last_order_zero_gives_accuracy_verdict(self):
        fam = FunctionFamily(members=(lambda s: 1.0, lambda s: s, lambda s: s ** 3),
                             interval=(-1.0, 1.0))
        _, verdict = check_ect(fam, grid_size=512)
        assert verdict is EctVerdict.ET_WITH_ACCURACY

    def test_grid_size_validated(self):
        with pytest.raises(ValueError):
            check_ect(amplitude_family(2.0), grid_size=100)

    def test_profile_csv(self):
        fam = amplitude_family(2.0, interval=(0.1, 10.0))
        profile, _ = check_ect(fam, grid_size=256)
        csv = profile.to_csv()
        assert csv.splitlines()[0] == "s0,W0,W1,W2,W3"


class TestBoundRealization:
    def test_three_root_combination_exists(self):
        red = ReducedParams.from_params(example_one_params())
        ss = np.geomspace(1e-2, 1e2, 4096)
        vals = m1_reduced(red, ss)
        changes = int(np.sum(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
        assert changes == 3

    def test_no_four_root_combination_found(self):
        # 10^4 random coefficient draws: the combination never exceeds
        # three sign changes (statistical evidence for the zero bound)
        rng = np.random.default_rng(99)
        ss = np.geomspace(1e-3, 1e3, 4096)
        beta = 2.0
        ub = beta * beta * ss * ss + 1.0
        u = ss * ss + 1.0
        f0 = ss
        f1 = ub * (np.arccos(2.0 / ub - 1.0) - 2.0 * np.pi)
        f2 = u * np.arccos(2.0 / u - 1.0)
        worst = 0
        for _ in range(10_000):
            k = rng.standard_normal(3)
            vals = k[0] * f0 + k[1] * f1 + k[2] * f2
            sgn = np.sign(vals)
            sgn = sgn[sgn != 0]
            worst = max(worst, int(np.sum(sgn[:-1] * sgn[1:] < 0)))
        assert worst <= 3
