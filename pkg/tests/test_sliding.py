import math
from dataclasses import replace

import pytest
from numpy.testing import assert_allclose

from pwlcycles.errors import ConstraintViolated
from pwlcycles.examples import (
    EXAMPLE2_SYSTEM_ROOT,
    example_two_sliding_params,
    type_one_sliding_params,
)
from pwlcycles.melnikov import Stability
from pwlcycles.sliding import (
    CycleKind,
    detect_sliding_cycle,
    fold_positions,
    s_maps,
    s_maps_general_order1,
    s_maps_simulated,
    simulate_sliding_cycle,
    simultaneity_report,
    thresholds,
)


class TestThresholds:
    def test_threshold_formula(self):
        p = example_two_sliding_params()
        # (v1m*b + v1p)^2 = 0.49 with b = -1, e = 1
        assert_allclose(thresholds(p), 0.49 / (2 * math.pi), rtol=1e-12)

    def test_degenerate_drift(self):
        p = replace(example_two_sliding_params(), v1m=0.5, v1p=0.5)  # b*v1m + v1p = 0
        assert thresholds(p) == 0.0

    def test_quadratic_scaling_in_e(self):
        p = example_two_sliding_params()
        p2 = replace(p, e=2.0 * p.e)
        assert_allclose(thresholds(p2), thresholds(p) / 4.0, rtol=1e-12)


class TestSMapSeries:
    def test_common_leading_term(self):
        p = type_one_sliding_params()
        sm = s_maps(p, 0.0)
        assert all(v == pytest.approx(-2.0 * p.e, abs=1e-15) for v in sm.values)

    def test_common_first_order_coefficient(self):
        p = type_one_sliding_params()
        sm = s_maps(p)
        c1 = 2.0 * p.b21m * p.e - 2.0 * p.v2m
        for series in sm.series():
            assert series.c1 == pytest.approx(c1, rel=1e-12)

    def test_requires_trace_constraint(self):
        p = replace(type_one_sliding_params(), b22m=0.5)
        with pytest.raises(ConstraintViolated):
            s_maps(p)

    def test_second_order_splits(self):
        p = type_one_sliding_params()
        sm = s_maps(p)
        tau = p.c11m + p.c22m
        pe = (p.v1m * p.b + p.v1p) ** 2 / (p.b ** 2 * p.e)
        assert sm.s0.c2 - sm.s1.c2 == pytest.approx(math.pi * p.e * tau, rel=1e-12)
        assert sm.s0.c2 - sm.s2.c2 == pytest.approx(pe / 2.0, rel=1e-12)
        assert sm.s0.c2 - sm.s3.c2 == pytest.approx(2.0 * pe, rel=1e-12)

    def test_series_match_simulation_to_third_order(self):
        p = example_two_sliding_params()
        series = s_maps(p).series()
        sims = {eps: s_maps_simulated(p, eps) for eps in (1e-2, 5e-3, 2.5e-3)}
        for i in range(4):
            errs = [abs(series[i](eps) - sims[eps][i]) for eps in (1e-2, 5e-3, 2.5e-3)]
            assert 6.0 <= errs[0] / errs[1] <= 10.0
            assert 6.0 <= errs[1] / errs[2] <= 10.0

    def test_general_first_order_split(self):
        # without the trace constraint the forward mark separates from the
        # three backward ones at first order already
        p = replace(type_one_sliding_params(), b11m=0.3, b22m=0.2)
        c1 = s_maps_general_order1(p)
        assert c1[0] == c1[2] == c1[3]
        assert c1[0] - c1[1] == pytest.approx(math.pi * p.e * 0.5, rel=1e-12)
        for eps in (1e-4,):
            sims = s_maps_simulated(p, eps)
            for i in (0, 2, 3):
                assert sims[i] + 2.0 * p.e - c1[i] * eps == pytest.approx(0.0, abs=5e-7)
            assert sims[1] + 2.0 * p.e - c1[1] * eps == pytest.approx(0.0, abs=5e-7)


class TestFoldPositions:
    def test_example_two_values(self):
        p = example_two_sliding_params()
        y1, y2, y3 = fold_positions(p, 1e-2)
        assert y1 == pytest.approx(0.002, rel=1e-12)
        assert y2 == pytest.approx(-0.005, rel=1e-12)
        # y3 = -(v1m + 2 v1p / b) eps + O(eps^2) = -(0.2 + 1.0)*eps ... with
        # b = -1: -(0.2 - 2*0.5*(-1)...); first-order value is -0.012
        assert y3 == pytest.approx(-0.012, abs=2e-4)
        assert y3 < y2 < y1

    def test_y3_first_order_coefficient(self):
        p = example_two_sliding_params()
        vals = []
        for eps in (1e-3, 5e-4):
            _, _, y3 = fold_positions(p, eps)
            vals.append(y3 / eps)
        extrap = 2.0 * vals[1] - vals[0]
        assert extrap == pytest.approx(-(p.v1m + 2.0 * p.v1p / p.b), rel=1e-5)


class TestDetect:
    def test_example_two_type_one(self):
        report = detect_sliding_cycle(example_two_sliding_params())
        assert report.cycle is CycleKind.SLIDING_TYPE_I
        assert report.ordering == "S3 < S2 < S1 < S0"
        assert report.ordering_consistent
        assert report.extra_crossing_bound == 1
        assert report.threshold_lo == 0.0
        assert_allclose(report.threshold_hi, 0.49 / (2 * math.pi), rtol=1e-12)

    def test_type_two_window(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, c11m=3.0 * T - base.c22m)
        report = detect_sliding_cycle(p)
        assert report.cycle is CycleKind.SLIDING_TYPE_II
        assert report.ordering == "S3 < S1 < S2 < S0"
        assert report.ordering_consistent

    def test_above_both_windows_no_cycle(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, c11m=5.0 * T - base.c22m)
        report = detect_sliding_cycle(p)
        assert report.cycle is CycleKind.NONE

    def test_nonzero_trace_gives_none(self):
        p = replace(type_one_sliding_params(), b11m=0.4, b22m=0.1)
        report = detect_sliding_cycle(p)
        assert report.cycle is CycleKind.NONE
        assert "S1" in report.reason

    def test_escaping_mirror(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, a=-base.a, v1m=-base.v1m, v1p=-base.v1p,
                    c11m=-0.5 * T - base.c22m * -1.0, c22m=-base.c22m)
        # drift flips sign; tau = -0.5*T sits in the escaping Type-I window
        assert p.drift > 0
        assert -thresholds(p) < p.tau < 0
        report = detect_sliding_cycle(p)
        assert report.cycle is CycleKind.ESCAPING_TYPE_I
        assert report.ordering_consistent

    def test_escaping_type_two(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, a=-base.a, v1m=-base.v1m, v1p=-base.v1p,
                    c11m=-2.0 * T + base.c22m, c22m=-base.c22m)
        assert p.drift > 0 and -4.0 * thresholds(p) < p.tau < -thresholds(p)
        report = detect_sliding_cycle(p)
        assert report.cycle is CycleKind.ESCAPING_TYPE_II
        assert report.ordering_consistent

    def test_ordering_dichotomy_across_threshold(self):
        # sweeping the second-order trace across T swaps only the S1/S2
        # adjacency; S0 and S3 stay extremal
        base = type_one_sliding_params()
        T = thresholds(base)
        for frac, expect in ((0.5, "S3 < S2 < S1 < S0"), (1.5, "S3 < S1 < S2 < S0"),
                             (2.5, "S3 < S1 < S2 < S0")):
            p = replace(base, c11m=frac * T - base.c22m)
            sims = s_maps_simulated(p, 5e-3)
            order = sorted(range(4), key=lambda i: sims[i])
            names = " < ".join(f"S{i}" for i in order)
            assert names == expect


class TestSimulatedCycles:
    def test_type_one_loop(self):
        p = type_one_sliding_params()
        traj, closure, kinds = simulate_sliding_cycle(p, 1e-2)
        assert closure < 1e-6 * p.e
        assert kinds[:2] == ["ZoneMinus", "Sliding"]
        assert "ZonePlus" not in kinds

    def test_type_two_loop_uses_both_zones(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, c11m=3.0 * T - base.c22m)
        traj, closure, kinds = simulate_sliding_cycle(p, 1e-2)
        assert closure < 1e-6 * p.e
        assert "ZonePlus" in kinds and "Sliding" in kinds

    def test_escaping_loop_via_mirror(self):
        base = type_one_sliding_params()
        T = thresholds(base)
        p = replace(base, a=-base.a, v1m=-base.v1m, v1p=-base.v1p,
                    c11m=-0.5 * T - base.c22m, c22m=base.c22m)
        traj, closure, kinds = simulate_sliding_cycle(p, 1e-2)
        assert closure < 1e-6 * p.e
        assert "Sliding" in kinds


class TestSimultaneity:
    def test_example_two_simultaneous(self):
        rep = simultaneity_report(example_two_sliding_params())
        assert rep.verdict == "simultaneous"
        assert len(rep.crossing_roots) == 1
        assert rep.crossing_roots[0] == pytest.approx(EXAMPLE2_SYSTEM_ROOT, abs=1e-6)
        assert rep.crossing_stability is Stability.UNSTABLE
        assert rep.sliding.extra_crossing_bound == 1

    def test_sliding_only_when_no_crossing_root(self):
        # a nonpositive right first-order trace makes the constrained
        # displacement function monotone up from a positive limit: no root
        p = replace(example_two_sliding_params(), b11p=-0.5, b22p=0.0)
        rep = simultaneity_report(p)
        assert rep.verdict == "sliding only"
        assert rep.crossing_roots == ()

    def test_crossing_stability_follows_drift_sign(self):
        # v1m + v1p/b = 0.7 > 0 for the bundled constrained system
        p = example_two_sliding_params()
        assert p.v1m + p.v1p / p.b > 0
        rep = simultaneity_report(p)
        assert rep.crossing_stability is Stability.UNSTABLE

    def test_requires_trace_constraint(self):
        p = replace(example_two_sliding_params(), b22m=0.0)
        with pytest.raises(ConstraintViolated):
            simultaneity_report(p)

    def test_report_serializes(self):
        rep = simultaneity_report(example_two_sliding_params())
        data = rep.to_dict()
        assert data["verdict"] == "simultaneous"
        assert isinstance(rep.to_json(), str)
