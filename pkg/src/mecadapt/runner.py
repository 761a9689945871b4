"""Scenario execution and artifact writing (CSV tables, learner dumps, figures)."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .control import DL, EDGE, HOPS, UL, SlotController, make_policies
from .metrics import (SummaryRow, build_summary, per_load_trailing_summary)
from .sim import Frame, GpuHopModel, RadioHopModel, Simulator
from .traffic import generate_schedule, merge_arrivals

SLOT_CSV_COLUMNS = [
    "slot_index", "n_flows", "state_ul", "state_dl", "state_edge",
    "a_ul", "a_dl", "a_gpu", "q_ul", "q_edge", "q_dl", "q_rt",
    "frames_evaluated",
]
SUMMARY_CSV_COLUMNS = [
    "scheme", "qos_ratio", "avg_ul_prbs", "avg_dl_prbs", "avg_gpu_mhz",
    "ue_savings", "bs_savings",
]
PER_LOAD_CSV_COLUMNS = [
    "n_flows", "n_slots", "window_used", "qos_rt", "avg_ul_prbs",
    "avg_dl_prbs", "avg_gpu_mhz", "zero_load",
]


@dataclass(frozen=True)
class RunArtifacts:
    slots_csv: Path
    summary: Path
    per_load: Path
    bandit_dump: Path | None
    figures: tuple[Path, ...]


def build_simulator(cfg: ScenarioConfig) -> Simulator:
    cal = cfg.calibration
    ul = RadioHopModel(UL, cal.ul_full_rate, cal.prb_max, cal.ul_fixed)
    dl = RadioHopModel(DL, cal.dl_full_rate, cal.prb_max, cal.dl_fixed)
    gpu = GpuHopModel(cal.gpu_base, cal.f_max, cal.gpu_scaling_exponent)
    rng = None
    if cal.size_jitter > 0.0:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    return Simulator(
        ul, gpu, dl,
        spaces=(cfg.ul_space, cfg.gpu_space, cfg.dl_space),
        size_jitter=cal.size_jitter,
        rng=rng,
    )


def build_frames(cfg: ScenarioConfig) -> list[Frame]:
    """One frozen traffic realization: frames in send order with per-flow sequence numbers."""
    schedules = generate_schedule(cfg.traffic)
    arrivals = merge_arrivals(schedules, cfg.traffic.fps)
    counters: dict[int, int] = {}
    frames = []
    cal = cfg.calibration
    for t, flow_id in arrivals:
        seq = counters.get(flow_id, 0)
        counters[flow_id] = seq + 1
        frames.append(Frame(flow_id, seq, cal.ul_frame_bits, cal.dl_frame_bits, t))
    return frames


def simulate_scheme(cfg: ScenarioConfig, scheme: str):
    """Run one scheme over the scenario; returns (records, policies, sim)."""
    sim = build_simulator(cfg)
    frames = build_frames(cfg)
    for frame in frames:
        sim.schedule_frame(frame, frame.t_sent)
    policies = make_policies(scheme, cfg.ul_space, cfg.gpu_space, cfg.dl_space)
    controller = SlotController(sim, policies, cfg.budgets, cfg.q_c,
                                slot_len=cfg.slot_len, frames=frames)
    n_slots = int(math.floor(cfg.traffic.duration / cfg.slot_len + 1e-9))
    controller.run(n_slots, check_invariants=True)
    return controller.records, policies, sim


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _csv_text(columns, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def write_slots_csv(records, path: Path) -> None:
    rows = [[getattr(r, c) for c in SLOT_CSV_COLUMNS] for r in records]
    _write_atomic(path, _csv_text(SLOT_CSV_COLUMNS, rows))


def write_summary_csv(rows: list[SummaryRow], path: Path) -> None:
    data = [[getattr(r, c) for c in SUMMARY_CSV_COLUMNS] for r in rows]
    _write_atomic(path, _csv_text(SUMMARY_CSV_COLUMNS, data))


def write_per_load(records, path: Path, window: int = 100) -> None:
    """Trailing-window averages per active-flow count; the 0-flow group is
    flagged so report consumers can leave it out of plots."""
    summary = per_load_trailing_summary(records, window)
    rows = []
    for n_flows, s in sorted(summary.items()):
        rows.append([s.n_flows, s.n_slots, s.window_used, s.qos_rt,
                     s.avg_ul_prbs, s.avg_dl_prbs, s.avg_gpu_mhz,
                     1 if n_flows == 0 else 0])
    _write_atomic(path, _csv_text(PER_LOAD_CSV_COLUMNS, rows))


def _write_bandit_dump(policies, path: Path) -> bool:
    sections = []
    for hop in HOPS:
        text = policies[hop].dump()
        if text is not None:
            sections.append(f"[{hop}]\n{text}")
    if not sections:
        return False
    _write_atomic(path, "\n".join(sections))
    return True


def _run_and_write(cfg: ScenarioConfig, scheme: str, out: Path,
                   figures: bool, window: int):
    records, policies, _ = simulate_scheme(cfg, scheme)
    written: list[Path] = []
    try:
        slots_path = out / f"{scheme}_slots.csv"
        write_slots_csv(records, slots_path)
        written.append(slots_path)

        summary_path = out / f"{scheme}_summary.csv"
        write_summary_csv([build_summary(scheme, records)], summary_path)
        written.append(summary_path)

        per_load_path = out / f"{scheme}_per_load.csv"
        write_per_load(records, per_load_path, window)
        written.append(per_load_path)

        bandit_path = out / f"{scheme}_bandit.txt"
        has_dump = _write_bandit_dump(policies, bandit_path)
        if has_dump:
            written.append(bandit_path)

        figure_paths: tuple[Path, ...] = ()
        if figures:
            from .figures import render_run_figure

            fig_path = out / f"{scheme}_per_load.png"
            render_run_figure(records, cfg.slot_len, scheme, fig_path, window)
            written.append(fig_path)
            figure_paths = (fig_path,)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    artifacts = RunArtifacts(
        slots_csv=slots_path,
        summary=summary_path,
        per_load=per_load_path,
        bandit_dump=bandit_path if has_dump else None,
        figures=figure_paths,
    )
    return records, artifacts


def run_scenario(cfg: ScenarioConfig, scheme: str, out_dir: str | Path,
                 *, figures: bool = True, window: int = 100) -> RunArtifacts:
    """Simulate one scheme and write its artifacts; partial files are removed on failure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, artifacts = _run_and_write(cfg, scheme, out, figures, window)
    return artifacts


def compare_schemes(cfg: ScenarioConfig, out_dir: str | Path,
                    *, figures: bool = True, window: int = 100):
    """Run every configured scheme on the same frozen traffic and write a
    side-by-side summary; returns (summary rows, per-scheme artifacts, csv path)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[SummaryRow] = []
    artifacts: dict[str, RunArtifacts] = {}
    for scheme in cfg.schemes:
        records, artifacts[scheme] = _run_and_write(cfg, scheme, out, figures, window)
        rows.append(build_summary(scheme, records))
    comparison_path = out / "comparison.csv"
    write_summary_csv(rows, comparison_path)
    if figures:
        from .figures import render_comparison_figure

        render_comparison_figure(rows, out / "comparison.png")
    return rows, artifacts, comparison_path


class _RecordView:
    """Slot record reread from CSV; numeric fields only."""

    __slots__ = tuple(SLOT_CSV_COLUMNS)

    def __init__(self, row: dict) -> None:
        for key in SLOT_CSV_COLUMNS:
            setattr(self, key, int(row[key]))


def read_slots_csv(path: str | Path):
    with open(path, newline="") as fh:
        return [_RecordView(row) for row in csv.DictReader(fh)]
