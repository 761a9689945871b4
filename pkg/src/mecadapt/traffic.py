"""On/off user sessions with periodic frame arrivals while on."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_MODES = ("truncate", "resample")


@dataclass(frozen=True)
class TrafficConfig:
    n_users: int
    mean_on: float
    mean_off: float
    min_on: float = 0.0
    min_off: float = 0.0
    fps: float = 30.0
    duration: float = 3600.0
    seed: int = 0
    min_mode: str = "truncate"

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ValueError("n_users must be at least 1")
        if self.mean_on <= 0.0 or self.mean_off <= 0.0:
            raise ValueError("mean durations must be positive")
        if self.min_on < 0.0 or self.min_off < 0.0:
            raise ValueError("minimum durations must be nonnegative")
        if self.min_on > self.mean_on or self.min_off > self.mean_off:
            raise ValueError("minimum durations must not exceed the means")
        if self.fps <= 0.0:
            raise ValueError("fps must be positive")
        if self.duration < 0.0:
            raise ValueError("duration must be nonnegative")
        if self.min_mode not in MIN_MODES:
            raise ValueError(f"min_mode must be one of {MIN_MODES}")


@dataclass(frozen=True)
class UserSchedule:
    user_id: int
    on_intervals: tuple[tuple[float, float], ...]


def _draw_duration(rng: np.random.Generator, mean: float, minimum: float, mode: str) -> float:
    if mode == "truncate":
        return max(minimum, rng.exponential(mean))
    while True:  # resample: condition the exponential on exceeding the minimum
        x = rng.exponential(mean)
        if x >= minimum:
            return x


def generate_schedule(cfg: TrafficConfig) -> list[UserSchedule]:
    """Draw each user's on-intervals; users start off at t=0.

    Durations are exponential with the configured means, forced above the
    minimums either by truncation (max with the minimum, the default) or by
    resampling.  Fully deterministic for a given config.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_users)
    schedules = []
    for user_id, child in enumerate(children):
        rng = np.random.default_rng(child)
        t = 0.0
        intervals: list[tuple[float, float]] = []
        while True:
            t += _draw_duration(rng, cfg.mean_off, cfg.min_off, cfg.min_mode)
            if t >= cfg.duration:
                break
            on = _draw_duration(rng, cfg.mean_on, cfg.min_on, cfg.min_mode)
            intervals.append((t, min(t + on, cfg.duration)))
            t += on
            if t >= cfg.duration:
                break
        schedules.append(UserSchedule(user_id, tuple(intervals)))
    return schedules


def frame_arrivals(schedule: UserSchedule, fps: float) -> list[tuple[float, int]]:
    """Arrival times on the fps grid inside each on-interval, tagged with the user id."""
    if fps <= 0.0:
        raise ValueError("fps must be positive")
    out = []
    for start, end in schedule.on_intervals:
        if end <= start:
            continue
        n = math.ceil((end - start) * fps - 1e-9)
        out.extend((start + k / fps, schedule.user_id) for k in range(n))
    return out


def merge_arrivals(schedules: list[UserSchedule], fps: float) -> list[tuple[float, int]]:
    """All users' arrivals in time order; ties broken by user id."""
    merged: list[tuple[float, int]] = []
    for schedule in schedules:
        merged.extend(frame_arrivals(schedule, fps))
    merged.sort()
    return merged
