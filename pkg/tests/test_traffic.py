import math

import numpy as np
import pytest

from mecadapt import TrafficConfig, UserSchedule, frame_arrivals, generate_schedule, merge_arrivals


def test_config_validation():
    with pytest.raises(ValueError):
        TrafficConfig(n_users=0, mean_on=300.0, mean_off=240.0)
    with pytest.raises(ValueError):
        TrafficConfig(n_users=1, mean_on=0.0, mean_off=240.0)
    with pytest.raises(ValueError):
        TrafficConfig(n_users=1, mean_on=300.0, mean_off=240.0, min_on=400.0)
    with pytest.raises(ValueError):
        TrafficConfig(n_users=1, mean_on=300.0, mean_off=240.0, fps=0.0)
    with pytest.raises(ValueError):
        TrafficConfig(n_users=1, mean_on=300.0, mean_off=240.0, min_mode="clip")


def test_schedule_is_deterministic_and_well_formed():
    cfg = TrafficConfig(n_users=3, mean_on=300.0, mean_off=240.0,
                        min_on=120.0, min_off=120.0, duration=3600.0, seed=11)
    a = generate_schedule(cfg)
    b = generate_schedule(cfg)
    assert a == b
    assert [s.user_id for s in a] == [0, 1, 2]
    for s in a:
        prev_end = 0.0
        for start, end in s.on_intervals:
            assert prev_end < start < end <= cfg.duration
            prev_end = end
        # minimum on-durations hold except for the final clipped interval
        for start, end in s.on_intervals[:-1]:
            assert end - start >= cfg.min_on - 1e-9


def test_schedule_durations_match_truncated_exponential_mean():
    # E[max(m, Exp(mu))] = m + mu * exp(-m/mu); 120 + 300 exp(-0.4) = 321.1
    cfg = TrafficConfig(n_users=200, mean_on=300.0, mean_off=240.0,
                        min_on=120.0, min_off=120.0, duration=200000.0, seed=5)
    durations = [end - start
                 for s in generate_schedule(cfg)
                 for start, end in s.on_intervals[:-1]]
    expect = 120.0 + 300.0 * math.exp(-0.4)
    assert len(durations) > 10000
    assert np.mean(durations) == pytest.approx(expect, rel=0.02)


def test_resample_mode_respects_minimum_strictly():
    cfg = TrafficConfig(n_users=50, mean_on=10.0, mean_off=10.0,
                        min_on=8.0, min_off=8.0, duration=2000.0, seed=3,
                        min_mode="resample")
    gaps = []
    for s in generate_schedule(cfg):
        for start, end in s.on_intervals[:-1]:
            assert end - start >= 8.0
        prev = 0.0
        for start, end in s.on_intervals:
            gaps.append(start - prev)
            prev = end
    assert min(gaps) >= 8.0
    # conditioned exponential keeps substantial mass above the floor
    assert np.mean([g for g in gaps]) > 8.0 + 5.0


def test_frame_arrivals_fill_on_interval_at_fps():
    s = UserSchedule(4, ((0.0, 1.0),))
    out = frame_arrivals(s, 30.0)
    assert len(out) == 30
    assert out[0] == (0.0, 4)
    assert out[-1][0] == pytest.approx(29 / 30.0)
    assert all(uid == 4 for _, uid in out)

    short = frame_arrivals(UserSchedule(1, ((10.0, 10.05),)), 30.0)
    assert [t for t, _ in short] == [pytest.approx(10.0), pytest.approx(10.0 + 1 / 30.0)]


def test_frame_arrivals_exact_multiple_excludes_endpoint():
    out = frame_arrivals(UserSchedule(0, ((2.0, 2.1),)), 30.0)
    # 0.1 s at 30 fps is exactly 3 periods: frames at 2.0, 2.033, 2.067 only
    assert len(out) == 3


def test_merge_arrivals_sorted_with_user_tiebreak():
    s0 = UserSchedule(0, ((0.0, 0.1),))
    s1 = UserSchedule(1, ((0.0, 0.1),))
    merged = merge_arrivals([s1, s0], 30.0)
    assert merged == sorted(merged)
    assert merged[0] == (0.0, 0)
    assert merged[1] == (0.0, 1)
    assert len(merged) == 6


def test_distinct_seeds_give_distinct_schedules():
    base = dict(n_users=2, mean_on=300.0, mean_off=240.0, duration=3600.0)
    a = generate_schedule(TrafficConfig(seed=1, **base))
    b = generate_schedule(TrafficConfig(seed=2, **base))
    assert a != b
