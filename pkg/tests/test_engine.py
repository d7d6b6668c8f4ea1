from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netload.engine import (
    BurstFeature,
    DurationFeature,
    FramesFeature,
    LoadFraction,
    elapsed,
    extra_gap,
    frames_for_duration,
    make_plan,
    occupancy,
    parse_duration_ns,
    period,
    time_deficit,
    total_gap,
)
from netload.errors import EmptyPlanError, OvershootError, ValidationError
from netload.frames import LineRate
from tests.conftest import mk_frame, mk_spec

R100 = LineRate.MBPS_100
R1000 = LineRate.GBPS_1


def pct(value) -> LoadFraction:
    return LoadFraction.from_percent(value)


class TestExtraGap:
    def test_long_frame_quarter_load(self):
        assert extra_gap(1538, pct(25)) == 4614

    def test_short_frame_quarter_load(self):
        assert extra_gap(84, pct(25)) == 252

    def test_full_load_needs_no_gap(self):
        for s in (84, 1538, 1542):
            assert extra_gap(s, pct(100)) == 0

    def test_fractional_gap_rounds_up(self):
        # independent oracle: smallest integer gap keeping the load at or
        # below 30% of the line
        oracle = next(g for g in range(1001) if Fraction(84, 84 + g) <= Fraction(30, 100))
        assert oracle == 196
        assert extra_gap(84, pct(30)) == 196

    def test_rejects_undersized_slot(self):
        with pytest.raises(ValidationError):
            extra_gap(83, pct(50))


class TestTotalGap:
    @pytest.mark.parametrize("extra,total", [(4614, 4626), (252, 264), (0, 12)])
    def test_adds_minimum_gap(self, extra, total):
        assert total_gap(extra) == total

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            total_gap(-1)


class TestOccupancyAndPeriod:
    def test_long_slot_fast_ethernet(self):
        assert occupancy(1538, R100) == 123_040

    def test_short_slot_fast_ethernet(self):
        assert occupancy(84, R100) == 6_720

    def test_gigabit_is_ten_times_faster(self):
        assert occupancy(84, R1000) == 672

    def test_period_long(self):
        assert period(1538, 4614, R100) == 492_160

    def test_period_short(self):
        assert period(84, 252, R100) == 26_880

    def test_zero_gap_period_equals_occupancy(self):
        assert period(84, 0, R100) == occupancy(84, R100)


class TestFramesForDuration:
    def test_short_frames_20ms(self):
        assert frames_for_duration(R100, 84, pct(25), 20_000_000) == 744

    def test_vlan_burst_interval(self):
        assert frames_for_duration(R100, 1048, pct(50), 10**9) == 5963

    def test_zero_duration(self):
        assert frames_for_duration(R100, 84, pct(25), 0) == 0


class TestElapsedAndDeficit:
    def test_744_short_frames(self):
        assert elapsed(744, 26_880) == 19_998_720

    def test_zero_frames(self):
        assert elapsed(0, 26_880) == 0

    def test_40_long_frames(self):
        assert elapsed(40, 492_160) == 19_686_400

    def test_deficit_for_20ms_window(self):
        assert time_deficit(20_000_000, 19_998_720, 26_880) == 1_280

    def test_zero_deficit(self):
        assert time_deficit(19_998_720, 19_998_720, 26_880) == 0

    def test_deficit_smaller_than_period(self):
        td = time_deficit(20_000_000, 19_998_720, 26_880)
        assert td < 26_880

    def test_rejects_undercomputed_frame_count(self):
        # 743 frames leave room for one more full period
        with pytest.raises(OvershootError):
            time_deficit(20_000_000, 743 * 26_880, 26_880)

    def test_rejects_overshoot(self):
        with pytest.raises(OvershootError):
            time_deficit(19_000_000, 19_998_720, 26_880)


class TestMakePlan:
    def test_case1_composition(self, case1_spec):
        plan = make_plan(case1_spec)
        assert plan.slot.slot_bytes == 1538
        assert plan.extra_gap_bytes == 4614
        assert plan.total_gap_bytes == 4626
        assert plan.frames_total == 40
        assert plan.period_ns == 492_160
        assert plan.elapsed_ns == 19_686_400
        assert plan.time_deficit_ns is None
        assert plan.achieved_load == Fraction(1, 4)
        assert len(plan.bursts) == 1

    def test_case2_composition(self, case2_spec):
        plan = make_plan(case2_spec)
        assert plan.frames_total == 744
        assert plan.elapsed_ns == 19_998_720
        assert plan.time_deficit_ns == 1_280

    def test_case3_composition(self, case3_spec):
        plan = make_plan(case3_spec)
        assert plan.slot.slot_bytes == 1048
        assert [b.frames_in_burst for b in plan.bursts] == [5963] * 20
        assert plan.frames_total == 119_260
        assert [b.start_offset_ns for b in plan.bursts] == [k * 2 * 10**9 for k in range(20)]
        assert plan.structure_span_ns == 39 * 10**9
        assert plan.elapsed_ns <= 39 * 10**9

    def test_full_load_plan(self):
        plan = make_plan(mk_spec(mk_frame(p=60), 100, FramesFeature(3)))
        assert plan.extra_gap_bytes == 0
        assert plan.total_gap_bytes == 12
        assert plan.period_ns == plan.occupancy_ns

    def test_empty_duration_plan_is_reported(self):
        with pytest.raises(EmptyPlanError):
            make_plan(mk_spec(mk_frame(p=60), 25, DurationFeature(1_000)))

    def test_empty_burst_plan_is_reported(self):
        with pytest.raises(EmptyPlanError):
            make_plan(
                mk_spec(
                    mk_frame(p=60),
                    25,
                    BurstFeature(burst_count=2, burst_interval_ns=100, sleep_interval_ns=10**9),
                )
            )

    def test_determinism(self, case3_spec):
        assert make_plan(case3_spec) == make_plan(case3_spec)

    def test_burst_additivity(self, case3_spec):
        plan = make_plan(case3_spec)
        assert plan.frames_total == sum(b.frames_in_burst for b in plan.bursts)


class TestFeatureValidation:
    def test_frames_must_be_positive(self):
        with pytest.raises(ValidationError):
            FramesFeature(0)

    def test_duration_must_be_nonnegative(self):
        with pytest.raises(ValidationError):
            DurationFeature(-1)

    def test_burst_count_must_be_positive(self):
        with pytest.raises(ValidationError):
            BurstFeature(burst_count=0, burst_interval_ns=1, sleep_interval_ns=1)


class TestLoadFraction:
    @pytest.mark.parametrize("bad", [0, -5, 101, "0", "abc"])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValidationError):
            pct(bad)

    def test_accepts_decimal_strings_exactly(self):
        assert pct("12.5").fraction == Fraction(1, 8)

    def test_float_percent_reads_as_decimal(self):
        assert pct(0.1).fraction == Fraction(1, 1000)

    def test_hundred_percent(self):
        assert pct(100).fraction == 1


class TestParseDuration:
    @pytest.mark.parametrize(
        "text,ns",
        [
            ("20ms", 20_000_000),
            ("1.5s", 1_500_000_000),
            ("300us", 300_000),
            ("300µs", 300_000),
            ("2min", 120_000_000_000),
            ("1h", 3_600_000_000_000),
            ("42ns", 42),
            (1234, 1234),
        ],
    )
    def test_exact_conversion(self, text, ns):
        assert parse_duration_ns(text) == ns

    @pytest.mark.parametrize("bad", ["20", "20xs", "0.5ns", "-5ms", "ms", ""])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValidationError):
            parse_duration_ns(bad)


# --- properties ---------------------------------------------------------------

slot_sizes = st.integers(min_value=84, max_value=1542)
loads = st.fractions(min_value=Fraction(1, 1000), max_value=1)


class TestProperties:
    @given(s=slot_sizes, l1=loads, l2=loads)
    def test_gap_and_period_monotone_in_load(self, s, l1, l2):
        if l1 > l2:
            l1, l2 = l2, l1
        g1, g2 = extra_gap(s, LoadFraction(l1)), extra_gap(s, LoadFraction(l2))
        assert g1 >= g2
        assert period(s, g1, R100) >= period(s, g2, R100)

    @given(s=slot_sizes, load=loads)
    def test_achieved_load_bound_and_tightness(self, s, load):
        gap = extra_gap(s, LoadFraction(load))
        assert Fraction(s, s + gap) <= load
        if gap > 0:
            assert Fraction(s, s + gap - 1) > load

    @given(s=slot_sizes, load=loads, t=st.integers(0, 10**12))
    def test_duration_feasibility(self, s, load, t):
        frames = frames_for_duration(R100, s, LoadFraction(load), t)
        gap = extra_gap(s, LoadFraction(load))
        p = period(s, gap, R100)
        t_prime = elapsed(frames, p)
        assert t_prime <= t < t_prime + p

    @given(s=slot_sizes, load=loads)
    def test_exact_loads_have_zero_error(self, s, load):
        # when S*(1/L - 1) is integral the achieved load equals the request
        exact = s * (1 - load) / load
        gap = extra_gap(s, LoadFraction(load))
        if exact.denominator == 1:
            assert Fraction(s, s + gap) == load
