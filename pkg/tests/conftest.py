"""Shared fixtures: one full scenario-1 run per scheme, reused across tests.

The adaptive run mirrors runner.simulate_scheme but keeps the frame list and
snapshots the accounting counters at every slot boundary so the causality and
conservation checks can inspect the whole history without a second run.
"""
import math
import time
from dataclasses import dataclass

import pytest

from mecadapt.config import ScenarioConfig, bundled_scenario_path, load_config
from mecadapt.control import SlotController, make_policies
from mecadapt.runner import build_frames, build_simulator, simulate_scheme


@dataclass
class SchemeRun:
    cfg: ScenarioConfig
    records: list
    policies: dict
    sim: object
    frames: list
    boundaries: list  # (injected, completed, in_flight) after each slot
    runtime: float


@pytest.fixture(scope="session")
def scenario1_cfg():
    return load_config(bundled_scenario_path("scenario1"))


def _run_keeping_frames(cfg: ScenarioConfig, scheme: str) -> SchemeRun:
    t_start = time.perf_counter()
    sim = build_simulator(cfg)
    frames = build_frames(cfg)
    for frame in frames:
        sim.schedule_frame(frame, frame.t_sent)
    policies = make_policies(scheme, cfg.ul_space, cfg.gpu_space, cfg.dl_space)
    controller = SlotController(sim, policies, cfg.budgets, cfg.q_c,
                                slot_len=cfg.slot_len, frames=frames)
    n_slots = int(math.floor(cfg.traffic.duration / cfg.slot_len + 1e-9))
    boundaries = []
    for _ in range(n_slots):
        controller.run_slot()
        boundaries.append((sim.injected, sim.completed_count, sim.in_flight()))
    runtime = time.perf_counter() - t_start
    return SchemeRun(cfg, controller.records, policies, sim,
                     controller.frames, boundaries, runtime)


@pytest.fixture(scope="session")
def scenario1_mucb1(scenario1_cfg):
    return _run_keeping_frames(scenario1_cfg, "mucb1")


@pytest.fixture(scope="session")
def scenario1_static(scenario1_cfg):
    t_start = time.perf_counter()
    records, policies, sim = simulate_scheme(scenario1_cfg, "static")
    runtime = time.perf_counter() - t_start
    return SchemeRun(scenario1_cfg, records, policies, sim, [], [], runtime)
