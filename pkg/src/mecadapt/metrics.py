"""Delivery-ratio, allocation, and power summaries over slot records."""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum

from .sim import DL, EDGE, UL

_ACTION_FIELD = {UL: "a_ul", DL: "a_dl", EDGE: "a_gpu"}


@dataclass(frozen=True)
class PowerParams:
    gpu_k: float = 1.0
    gpu_const: float = 0.0
    bs_sleep: float = 1.0
    ue_sleep: float = 1.0
    a_ul_max: float = 106.0
    a_dl_max: float = 106.0


DEFAULT_POWER = PowerParams()


def gpu_power(f_mhz: float, params: PowerParams = DEFAULT_POWER) -> float:
    """Affine clock-to-power map."""
    if f_mhz < 0.0:
        raise ValueError("frequency must be nonnegative")
    return params.gpu_k * f_mhz + params.gpu_const


def bs_power(a_dl: float, params: PowerParams = DEFAULT_POWER) -> float:
    """Base-station draw in sleep-power units: 145 idle plus 135 at full DL load."""
    if a_dl < 0.0 or a_dl > params.a_dl_max:
        raise ValueError(f"a_dl must lie in [0, {params.a_dl_max}]")
    return (145.0 + 135.0 * a_dl / params.a_dl_max) * params.bs_sleep


def ue_power(a_ul: float, params: PowerParams = DEFAULT_POWER) -> float:
    """Handset draw in sleep-power units, affine in the UL PRB share."""
    if a_ul < 0.0 or a_ul > params.a_ul_max:
        raise ValueError(f"a_ul must lie in [0, {params.a_ul_max}]")
    return (0.4 + 0.6 * (40.0 * a_ul / params.a_ul_max - 20.0) / 80.0) * params.ue_sleep


def qos_delivery_ratio(records) -> float:
    """Fraction of slots whose round-trip feedback was satisfied."""
    if not records:
        raise ValueError("no records")
    return sum(r.q_rt for r in records) / len(records)


def avg_resource(records, hop: str) -> float:
    if not records:
        raise ValueError("no records")
    field = _ACTION_FIELD[hop]
    return fsum(getattr(r, field) for r in records) / len(records)


def savings_vs_static(records, which: str, params: PowerParams = DEFAULT_POWER) -> float:
    """1 - mean(power(allocation)) / power(max allocation), for "ue" or "bs"."""
    if not records:
        raise ValueError("no records")
    if which == "ue":
        mean = fsum(ue_power(r.a_ul, params) for r in records) / len(records)
        return 1.0 - mean / ue_power(params.a_ul_max, params)
    if which == "bs":
        mean = fsum(bs_power(r.a_dl, params) for r in records) / len(records)
        return 1.0 - mean / bs_power(params.a_dl_max, params)
    raise ValueError('which must be "ue" or "bs"')


@dataclass(frozen=True)
class LoadSummary:
    n_flows: int
    n_slots: int
    window_used: int
    qos_rt: float
    avg_ul_prbs: float
    avg_dl_prbs: float
    avg_gpu_mhz: float


def per_load_trailing_summary(records, window: int = 100) -> dict[int, LoadSummary]:
    """Group slots by active flow count and average the last `window` of each group."""
    if window < 1:
        raise ValueError("window must be at least 1")
    groups: dict[int, list] = {}
    for r in records:
        groups.setdefault(r.n_flows, []).append(r)
    out = {}
    for n_flows, rows in sorted(groups.items()):
        tail = rows[-window:]
        k = len(tail)
        out[n_flows] = LoadSummary(
            n_flows=n_flows,
            n_slots=len(rows),
            window_used=k,
            qos_rt=sum(r.q_rt for r in tail) / k,
            avg_ul_prbs=fsum(r.a_ul for r in tail) / k,
            avg_dl_prbs=fsum(r.a_dl for r in tail) / k,
            avg_gpu_mhz=fsum(r.a_gpu for r in tail) / k,
        )
    return out


@dataclass(frozen=True)
class SummaryRow:
    """One scheme's run-level summary, ordered like the comparison report."""

    scheme: str
    qos_ratio: float
    avg_ul_prbs: float
    avg_dl_prbs: float
    avg_gpu_mhz: float
    ue_savings: float
    bs_savings: float


def build_summary(scheme: str, records, params: PowerParams = DEFAULT_POWER) -> SummaryRow:
    return SummaryRow(
        scheme=scheme,
        qos_ratio=qos_delivery_ratio(records),
        avg_ul_prbs=avg_resource(records, UL),
        avg_dl_prbs=avg_resource(records, DL),
        avg_gpu_mhz=avg_resource(records, EDGE),
        ue_savings=savings_vs_static(records, "ue", params),
        bs_savings=savings_vs_static(records, "bs", params),
    )
