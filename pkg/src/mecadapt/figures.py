"""Matplotlib renderings of the run and comparison reports."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import per_load_trailing_summary  # noqa: E402


def render_run_figure(records, slot_len: float, scheme: str, outfile: str | Path,
                      window: int = 100) -> None:
    """Active load over time plus trailing per-load averages for one run."""
    summary = per_load_trailing_summary(records, window)
    loads = [n for n in sorted(summary) if n > 0]  # idle group is not depicted
    fig, axes = plt.subplots(2, 2, figsize=(11.0, 7.0))

    ax = axes[0][0]
    times = [r.slot_index * slot_len / 60.0 for r in records]
    ax.step(times, [r.n_flows for r in records], where="post", lw=0.8)
    ax.set_xlabel("time [min]")
    ax.set_ylabel("active flows")
    ax.set_title("offered load")

    ax = axes[0][1]
    ax.bar([str(n) for n in loads], [summary[n].qos_rt for n in loads], color="tab:green")
    ax.axhline(0.9, color="gray", ls="--", lw=0.8)
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("active flows")
    ax.set_ylabel("delivery ratio")
    ax.set_title(f"trailing-{window} round-trip QoS")

    ax = axes[1][0]
    xs = range(len(loads))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], [summary[n].avg_ul_prbs for n in loads],
           width, label="UL")
    ax.bar([x + width / 2 for x in xs], [summary[n].avg_dl_prbs for n in loads],
           width, label="DL")
    ax.set_xticks(list(xs), [str(n) for n in loads])
    ax.set_xlabel("active flows")
    ax.set_ylabel("PRBs")
    ax.set_title(f"trailing-{window} radio allocation")
    ax.legend()

    ax = axes[1][1]
    ax.bar([str(n) for n in loads], [summary[n].avg_gpu_mhz for n in loads], color="tab:orange")
    ax.set_xlabel("active flows")
    ax.set_ylabel("MHz")
    ax.set_title(f"trailing-{window} GPU clock")

    fig.suptitle(scheme)
    fig.tight_layout()
    fig.savefig(outfile, dpi=150)
    plt.close(fig)


def render_comparison_figure(rows, outfile: str | Path) -> None:
    """Side-by-side QoS, allocation, and power-savings bars per scheme."""
    names = [r.scheme for r in rows]
    xs = range(len(names))
    fig, axes = plt.subplots(1, 4, figsize=(14.0, 3.6))

    ax = axes[0]
    ax.bar(names, [r.qos_ratio for r in rows], color="tab:green")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("QoS delivery ratio")

    ax = axes[1]
    width = 0.38
    ax.bar([x - width / 2 for x in xs], [r.avg_ul_prbs for r in rows], width, label="UL")
    ax.bar([x + width / 2 for x in xs], [r.avg_dl_prbs for r in rows], width, label="DL")
    ax.set_xticks(list(xs), names)
    ax.set_title("avg PRBs")
    ax.legend()

    ax = axes[2]
    ax.bar(names, [r.avg_gpu_mhz for r in rows], color="tab:orange")
    ax.set_title("avg GPU MHz")

    ax = axes[3]
    ax.bar([x - width / 2 for x in xs], [100.0 * r.ue_savings for r in rows], width, label="UE")
    ax.bar([x + width / 2 for x in xs], [100.0 * r.bs_savings for r in rows], width, label="BS")
    ax.set_xticks(list(xs), names)
    ax.set_title("power savings [%]")
    ax.legend()

    fig.tight_layout()
    fig.savefig(outfile, dpi=150)
    plt.close(fig)
