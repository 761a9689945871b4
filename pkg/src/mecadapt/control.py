"""Slot-level control loop: observe demand states, pick per-hop allocations,
advance the simulator, and score each hop against its share of the round-trip
delay budget.  Hops are controlled independently; the schemes range from a
fixed maximum allocation to per-state bandits.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .bandit import ActionSpace, ContextualBanditTable, CostParams, normalize_cost, slot_cost
from .sim import DL, EDGE, HOPS, UL, HopAllocation, Simulator

SCHEMES = ("static", "tcp", "ucb1", "mucb1")
_ALIASES = {"tcp-based": "tcp", "tcpbased": "tcp"}


def normalize_scheme(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return key


@dataclass(frozen=True)
class HopBudgets:
    """Per-hop shares of the round-trip delay budget, in seconds."""

    ul: float
    edge: float
    dl: float

    def __post_init__(self) -> None:
        if self.ul <= 0.0 or self.edge <= 0.0 or self.dl <= 0.0:
            raise ValueError("budgets must be positive")

    def total(self) -> float:
        return self.ul + self.edge + self.dl

    def for_hop(self, hop: str) -> float:
        return {UL: self.ul, EDGE: self.edge, DL: self.dl}[hop]


def split_budget(q_c: float, base_delays: tuple[float, float, float],
                 ratios: tuple[float, float, float]) -> HopBudgets:
    """Split the round-trip budget across (ul, edge, dl) in proportion to
    base delay times ratio, rounding each share to the nearest 10 ms and
    repairing the rounding drift on the largest share.
    """
    if any(b <= 0.0 for b in base_delays) or any(r <= 0.0 for r in ratios):
        raise ValueError("base delays and ratios must be positive")
    floor = sum(base_delays)
    if q_c < floor:
        raise ValueError(f"q_c={q_c} is below the single-flow floor {floor}")
    weights = [b * r for b, r in zip(base_delays, ratios)]
    total = sum(weights)
    q_c_ms = q_c * 1000.0
    shares_ms = [int(q_c_ms * w / total / 10.0 + 0.5) * 10.0 for w in weights]
    drift = sum(shares_ms) - q_c_ms
    if abs(drift) > 1e-6:
        idx = 0
        for j in (1, 2):
            if shares_ms[j] >= shares_ms[idx]:
                idx = j
        shares_ms[idx] -= drift
    if any(s <= 0.0 for s in shares_ms):
        raise ValueError(f"q_c={q_c} leaves a nonpositive hop budget after rounding")
    return HopBudgets(shares_ms[0] / 1000.0, shares_ms[1] / 1000.0, shares_ms[2] / 1000.0)


def observe_state(samples, per_prb_bits: float) -> int:
    """Average per-sub-interval PRB demand, snapped to a multiple of 5 in [0, 105]."""
    if not samples:
        raise ValueError("need at least one sub-interval sample")
    if per_prb_bits <= 0.0:
        raise ValueError("per_prb_bits must be positive")
    total = 0
    for s in samples:
        total += math.ceil((s.arrived_bits + s.backlog_bits) / per_prb_bits)
    mean = total / len(samples)
    state = int(mean / 5.0 + 0.5) * 5  # half rounds up
    return min(state, 105)


_HOP_BOUNDS = {
    UL: ("t_sent", "t_edge_in"),
    EDGE: ("t_edge_in", "t_edge_out"),
    DL: ("t_edge_out", "t_received"),
}


def hop_feedback(frames, hop: str, budget: float, at: float) -> int:
    """1 iff every flow's mean delay on this hop stayed within the budget.

    A frame still inside the hop at evaluation time counts as a violation
    once its sojourn exceeds the budget.  Frames that never reached the hop
    say nothing about it: every evaluated frame is older than the summed
    budgets, so whichever hop actually holds it up is over its own share
    and takes the blame there.  No observations at all count as satisfied.
    """
    if hop not in HOPS:
        raise ValueError(f"unknown hop {hop!r}")
    start_attr, end_attr = _HOP_BOUNDS[hop]
    flows: dict[int, list] = {}  # flow -> [delay_sum, count, violated]
    for f in frames:
        t0 = getattr(f, start_attr)
        if t0 is None:
            continue
        acc = flows.setdefault(f.flow_id, [0.0, 0, False])
        t1 = getattr(f, end_attr)
        if t1 is None:
            if at - t0 > budget:
                acc[2] = True
        else:
            acc[0] += t1 - t0
            acc[1] += 1
    for delay_sum, count, violated in flows.values():
        if violated or (count and delay_sum / count > budget):
            return 0
    return 1


def roundtrip_feedback(frames, q_c: float) -> int:
    """1 iff every flow's mean round-trip delay is within q_c; unfinished
    frames this old have already blown the budget and count as violations."""
    flows: dict[int, list] = {}
    for f in frames:
        acc = flows.setdefault(f.flow_id, [0.0, 0, False])
        if f.t_received is None:
            acc[2] = True
        else:
            acc[0] += f.t_received - f.t_sent
            acc[1] += 1
    for delay_sum, count, violated in flows.values():
        if violated or (count and delay_sum / count > q_c):
            return 0
    return 1


def static_action(space: ActionSpace):
    return space.levels[-1]


def tcp_step(space: ActionSpace, a_prev, q: int):
    """Multiplicative increase on violation, one level down on success."""
    if q not in (0, 1):
        raise ValueError("q must be 0 or 1")
    levels = space.levels
    i = levels.index(a_prev)
    if q == 1:
        return levels[i - 1] if i > 0 else levels[0]
    j = bisect_left(levels, 2 * a_prev)
    return levels[j] if j < len(levels) else levels[-1]


# ---- per-hop policies ----


class StaticPolicy:
    """Always the maximum level."""

    def __init__(self, space: ActionSpace) -> None:
        self.space = space

    def select(self, state: int):
        return static_action(self.space)

    def update(self, state: int, action, q: int) -> None:
        pass

    def dump(self) -> str | None:
        return None


class TcpPolicy:
    """Stateless of demand: reacts only to its own last feedback."""

    def __init__(self, space: ActionSpace, initial=None) -> None:
        self.space = space
        if initial is None:
            initial = space.a_max
        elif initial not in space:
            raise ValueError(f"initial action {initial} not in the space")
        self.current = initial

    def select(self, state: int):
        return self.current

    def update(self, state: int, action, q: int) -> None:
        self.current = tcp_step(self.space, action, q)

    def dump(self) -> str | None:
        return None


class Ucb1Policy:
    """Plain per-state UCB1 on observed slot costs."""

    def __init__(self, space: ActionSpace) -> None:
        self.table = ContextualBanditTable(space, CostParams.from_space(space))

    def select(self, state: int):
        return self.table.select(state)

    def update(self, state: int, action, q: int) -> None:
        cost = slot_cost(action, q, self.table.params)
        self.table.update_single(state, action, normalize_cost(cost, self.table.params))

    def dump(self) -> str | None:
        return self.table.dump()


class Mucb1Policy:
    """UCB1 with the monotone counterfactual sweep."""

    def __init__(self, space: ActionSpace) -> None:
        self.table = ContextualBanditTable(space, CostParams.from_space(space))

    def select(self, state: int):
        return self.table.select(state)

    def update(self, state: int, action, q: int) -> None:
        self.table.update_monotone(state, action, q)

    def dump(self) -> str | None:
        return self.table.dump()


_POLICY_TYPES = {
    "static": StaticPolicy,
    "tcp": TcpPolicy,
    "ucb1": Ucb1Policy,
    "mucb1": Mucb1Policy,
}


def make_policies(scheme: str, ul_space: ActionSpace, gpu_space: ActionSpace,
                  dl_space: ActionSpace) -> dict:
    cls = _POLICY_TYPES[normalize_scheme(scheme)]
    return {UL: cls(ul_space), EDGE: cls(gpu_space), DL: cls(dl_space)}


@dataclass(frozen=True)
class SlotRecord:
    slot_index: int
    n_flows: int
    state_ul: int
    state_dl: int
    state_edge: int
    a_ul: int
    a_dl: int
    a_gpu: int
    q_ul: int
    q_edge: int
    q_dl: int
    q_rt: int
    frames_evaluated: int


class SlotController:
    """Runs the observe/allocate/advance/score loop slot by slot.

    States are read from the previous slot's sub-intervals (the edge hop
    reuses the uplink state), each hop's policy picks a level independently,
    and feedback is computed over frames sent early enough in the slot that
    they could have finished a full round trip by the slot's end.
    """

    def __init__(self, sim: Simulator, policies: dict, budgets: HopBudgets,
                 q_c: float, slot_len: float = 5.0, frames=()) -> None:
        if q_c <= 0.0 or slot_len <= q_c:
            raise ValueError("need 0 < q_c < slot_len")
        self.sim = sim
        self.policies = policies
        self.budgets = budgets
        self.q_c = q_c
        self.slot_len = slot_len
        self.frames = sorted(frames, key=lambda f: (f.t_sent, f.flow_id, f.seq))
        self._sent = [f.t_sent for f in self.frames]
        self.per_prb = {
            UL: sim.ul_model.full_rate / sim.ul_model.prb_max * sim.subinterval,
            DL: sim.dl_model.full_rate / sim.dl_model.prb_max * sim.subinterval,
        }
        self.records: list[SlotRecord] = []
        self.slot_index = 0

    def _observe(self, hop: str, t0: float) -> int:
        samples = self.sim.collect_subintervals(hop, t0 - self.slot_len, t0)
        return observe_state(samples, self.per_prb[hop])

    def run_slot(self) -> SlotRecord:
        i = self.slot_index
        t0 = i * self.slot_len
        t1 = t0 + self.slot_len
        if i == 0:
            state_ul = state_dl = 0
        else:
            state_ul = self._observe(UL, t0)
            state_dl = self._observe(DL, t0)
        state_edge = state_ul  # edge demand mirrors what the uplink admits
        states = {UL: state_ul, EDGE: state_edge, DL: state_dl}
        actions = {hop: self.policies[hop].select(states[hop]) for hop in HOPS}
        self.sim.set_allocation(
            HopAllocation(actions[UL], actions[EDGE], actions[DL]), t0)
        self.sim.advance_to(t1)
        lo = bisect_left(self._sent, t0)
        hi = bisect_left(self._sent, t1 - self.q_c)
        attributed = self.frames[lo:hi]
        q = {hop: hop_feedback(attributed, hop, self.budgets.for_hop(hop), t1) for hop in HOPS}
        q_rt = roundtrip_feedback(attributed, self.q_c)
        for hop in HOPS:
            self.policies[hop].update(states[hop], actions[hop], q[hop])
        record = SlotRecord(
            slot_index=i,
            n_flows=len({f.flow_id for f in attributed}),
            state_ul=state_ul,
            state_dl=state_dl,
            state_edge=state_edge,
            a_ul=actions[UL],
            a_dl=actions[DL],
            a_gpu=actions[EDGE],
            q_ul=q[UL],
            q_edge=q[EDGE],
            q_dl=q[DL],
            q_rt=q_rt,
            frames_evaluated=len(attributed),
        )
        self.records.append(record)
        self.slot_index += 1
        return record

    def run(self, n_slots: int, check_invariants: bool = False) -> list[SlotRecord]:
        for _ in range(n_slots):
            self.run_slot()
            if check_invariants:
                self.sim.check_conservation()
        return self.records
