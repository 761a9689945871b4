"""Event-driven simulator of a three-hop pipeline: uplink radio, GPU inference, downlink radio.

Radio hops are fluid FIFO bit queues drained at a rate proportional to the
allocated PRBs; rate changes apply immediately to whatever bits remain.  The
GPU hop is a single non-preemptive server: the frequency in force when a frame
enters service is locked until that frame finishes.  Each radio hop adds a
fixed pipeline latency after its queue drains a frame; bits in that stage do
not count as backlog.
"""
from __future__ import annotations

import itertools
import math
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass
from heapq import heappop, heappush

UL = "ul"
EDGE = "edge"
DL = "dl"
RADIO_HOPS = (UL, DL)
HOPS = (UL, EDGE, DL)

# event kinds, dispatched in the advance loop
_ARRIVE_UL = 0
_UL_DONE = 1
_GPU_IN = 2
_GPU_DONE = 3
_DL_DONE = 4
_RECEIVE = 5

_EPS = 1e-9


@dataclass(slots=True)
class Frame:
    """One video frame travelling uplink -> GPU -> downlink.

    Timestamps are filled in by the simulator as the frame crosses half-hop
    boundaries; ``None`` means the boundary has not been reached yet.
    """

    flow_id: int
    seq: int
    ul_bits: float
    dl_bits: float
    t_sent: float
    t_edge_in: float | None = None
    t_edge_out: float | None = None
    t_received: float | None = None


@dataclass(frozen=True)
class RadioHopModel:
    """Linear PRB-to-rate map for one radio direction."""

    direction: str
    full_rate: float
    prb_max: int = 106
    fixed_latency: float = 0.0

    def __post_init__(self) -> None:
        if self.direction not in RADIO_HOPS:
            raise ValueError(f"direction must be one of {RADIO_HOPS}, got {self.direction!r}")
        if self.full_rate <= 0.0:
            raise ValueError("full_rate must be positive")
        if self.prb_max <= 0:
            raise ValueError("prb_max must be positive")
        if self.fixed_latency < 0.0:
            raise ValueError("fixed_latency must be nonnegative")

    def service_rate(self, prbs: float) -> float:
        """Bits per second delivered by ``prbs`` allocated PRBs."""
        if prbs <= 0 or prbs > self.prb_max:
            raise ValueError(f"prbs must lie in (0, {self.prb_max}], got {prbs}")
        return self.full_rate * prbs / self.prb_max


@dataclass(frozen=True)
class GpuHopModel:
    """Inference time scaling with GPU clock frequency."""

    base_service: float = 0.009
    f_max: float = 1600.0
    scaling_exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.base_service <= 0.0:
            raise ValueError("base_service must be positive")
        if self.f_max <= 0.0:
            raise ValueError("f_max must be positive")

    def service_time(self, mhz: float) -> float:
        """Seconds to run inference on one frame at clock ``mhz``."""
        if mhz <= 0 or mhz > self.f_max:
            raise ValueError(f"mhz must lie in (0, {self.f_max}], got {mhz}")
        return self.base_service * (self.f_max / mhz) ** self.scaling_exponent


@dataclass(frozen=True)
class HopAllocation:
    """Per-slot resource vector: UL PRBs, GPU MHz, DL PRBs."""

    ul_prbs: int
    gpu_mhz: float
    dl_prbs: int


@dataclass(frozen=True)
class SubIntervalSample:
    """Demand observed on one radio hop over one sub-interval."""

    hop: str
    arrived_bits: float
    backlog_bits: float

    def __post_init__(self) -> None:
        if self.arrived_bits < 0.0 or self.backlog_bits < 0.0:
            raise ValueError("sample quantities must be nonnegative")


class _RadioQueue:
    """Fluid FIFO bit queue with piecewise-constant drain rate.

    Backlog history is recorded as knots (time, backlog, drain rate); between
    consecutive knots the backlog is linear, so any past value can be
    reconstructed exactly.
    """

    __slots__ = (
        "model", "rate", "frames", "head_remaining", "head_version",
        "last_sync", "backlog", "transit", "arrival_times", "arrival_cum",
        "knots_t", "knots_b", "knots_r", "drained_completed", "busy_integral",
    )

    def __init__(self, model: RadioHopModel, rate: float) -> None:
        self.model = model
        self.rate = rate
        self.frames: deque[list] = deque()  # [frame, total_bits] pairs
        self.head_remaining = 0.0
        self.head_version = 0
        self.last_sync = 0.0
        self.backlog = 0.0
        self.transit = 0  # frames in the fixed-latency stage
        self.arrival_times: list[float] = []
        self.arrival_cum: list[float] = [0.0]  # prefix sums of arrived bits
        self.knots_t: list[float] = [0.0]
        self.knots_b: list[float] = [0.0]
        self.knots_r: list[float] = [0.0]
        self.drained_completed = 0.0  # nominal bits of fully drained frames
        self.busy_integral = 0.0  # integral of rate over busy time

    def sync(self, t: float) -> None:
        if self.frames:
            dt = t - self.last_sync
            if dt > 0.0:
                self.head_remaining -= self.rate * dt
                self.backlog -= self.rate * dt
                self.busy_integral += self.rate * dt
        self.last_sync = t

    def knot(self, t: float) -> None:
        self.knots_t.append(t)
        self.knots_b.append(self.backlog if self.backlog > 0.0 else 0.0)
        self.knots_r.append(self.rate if self.frames else 0.0)

    def backlog_at(self, t: float) -> float:
        i = bisect_right(self.knots_t, t) - 1
        if i < 0:
            return 0.0
        value = self.knots_b[i] - self.knots_r[i] * (t - self.knots_t[i])
        return value if value > 0.0 else 0.0

    def drained_total(self) -> float:
        partial = 0.0
        if self.frames:
            partial = self.frames[0][1] - self.head_remaining
        return self.drained_completed + partial


class _GpuQueue:
    """Non-preemptive single server; queue length history kept as a step function."""

    __slots__ = ("model", "freq", "waiting", "in_service", "knots_t", "knots_n")

    def __init__(self, model: GpuHopModel, freq: float) -> None:
        self.model = model
        self.freq = freq
        self.waiting: deque[Frame] = deque()
        self.in_service: Frame | None = None
        self.knots_t: list[float] = [0.0]
        self.knots_n: list[int] = [0]

    def count(self) -> int:
        return len(self.waiting) + (1 if self.in_service is not None else 0)

    def knot(self, t: float) -> None:
        self.knots_t.append(t)
        self.knots_n.append(self.count())

    def count_at(self, t: float) -> int:
        i = bisect_right(self.knots_t, t) - 1
        return self.knots_n[i] if i >= 0 else 0


class Simulator:
    """Three-hop pipeline under piecewise-constant resource allocations.

    Frames are scheduled ahead of time, allocations are applied at the current
    simulation time, and ``advance_to`` plays events forward, returning frames
    that completed the full round trip since the previous call.
    """

    def __init__(
        self,
        ul_model: RadioHopModel,
        gpu_model: GpuHopModel,
        dl_model: RadioHopModel,
        *,
        subinterval: float = 0.2,
        spaces=None,
        size_jitter: float = 0.0,
        rng=None,
    ) -> None:
        if subinterval <= 0.0:
            raise ValueError("subinterval must be positive")
        if size_jitter < 0.0 or size_jitter >= 1.0:
            raise ValueError("size_jitter must lie in [0, 1)")
        if size_jitter > 0.0 and rng is None:
            raise ValueError("size_jitter requires an rng")
        self.ul_model = ul_model
        self.gpu_model = gpu_model
        self.dl_model = dl_model
        self.subinterval = subinterval
        self.spaces = spaces  # optional (ul, gpu, dl) membership check
        self.size_jitter = size_jitter
        self.rng = rng
        self.now = 0.0
        self.injected = 0
        self.completed_count = 0
        self.allocation = HopAllocation(ul_model.prb_max, gpu_model.f_max, dl_model.prb_max)
        self._ul = _RadioQueue(ul_model, ul_model.service_rate(ul_model.prb_max))
        self._dl = _RadioQueue(dl_model, dl_model.service_rate(dl_model.prb_max))
        self._gpu = _GpuQueue(gpu_model, gpu_model.f_max)
        self._heap: list = []
        self._seq = itertools.count()
        self._completed_buffer: list[Frame] = []

    # ---- scheduling and control ----

    def schedule_frame(self, frame: Frame, t: float) -> None:
        """Register a frame to enter the uplink queue at time ``t``."""
        if t < self.now - _EPS:
            raise ValueError(f"cannot schedule a frame in the past (t={t}, now={self.now})")
        if abs(frame.t_sent - t) > _EPS:
            raise ValueError("frame.t_sent must match the scheduled time")
        if frame.ul_bits <= 0.0 or frame.dl_bits <= 0.0:
            raise ValueError("frame sizes must be positive")
        if frame.t_edge_in is not None or frame.t_edge_out is not None or frame.t_received is not None:
            raise ValueError("frame timestamps beyond t_sent must be unset")
        heappush(self._heap, (t, next(self._seq), _ARRIVE_UL, frame))

    def set_allocation(self, alloc: HopAllocation, t: float) -> None:
        """Apply a new allocation at the current simulation time."""
        if abs(t - self.now) > _EPS:
            raise ValueError(f"allocations apply at the current time (t={t}, now={self.now})")
        if self.spaces is not None:
            for value, space, name in (
                (alloc.ul_prbs, self.spaces[0], "ul_prbs"),
                (alloc.gpu_mhz, self.spaces[1], "gpu_mhz"),
                (alloc.dl_prbs, self.spaces[2], "dl_prbs"),
            ):
                if value not in space:
                    raise ValueError(f"{name}={value} is outside the action space")
        ul_rate = self.ul_model.service_rate(alloc.ul_prbs)
        dl_rate = self.dl_model.service_rate(alloc.dl_prbs)
        self.gpu_model.service_time(alloc.gpu_mhz)  # range check
        for queue, rate, done_kind in ((self._ul, ul_rate, _UL_DONE), (self._dl, dl_rate, _DL_DONE)):
            queue.sync(self.now)
            queue.rate = rate
            self._reschedule_head(queue, done_kind)
            queue.knot(self.now)
        self._gpu.freq = alloc.gpu_mhz  # queued frames only; in-service stays locked
        self.allocation = alloc

    def advance_to(self, t: float) -> list[Frame]:
        """Process all events up to and including time ``t``; return newly completed frames."""
        if t < self.now - _EPS:
            raise ValueError(f"cannot advance backwards (t={t}, now={self.now})")
        heap = self._heap
        while heap and heap[0][0] <= t:
            ev_t, _, kind, payload = heappop(heap)
            self.now = ev_t
            if kind == _ARRIVE_UL:
                self._on_arrive_ul(payload)
            elif kind == _UL_DONE:
                self._on_radio_done(self._ul, payload, _GPU_IN, self.ul_model.fixed_latency, _UL_DONE)
            elif kind == _GPU_IN:
                self._on_gpu_in(payload)
            elif kind == _GPU_DONE:
                self._on_gpu_done(payload)
            elif kind == _DL_DONE:
                self._on_radio_done(self._dl, payload, _RECEIVE, self.dl_model.fixed_latency, _DL_DONE)
            else:  # _RECEIVE
                self._on_receive(payload)
        if t > self.now:
            self.now = t
        out = self._completed_buffer
        self._completed_buffer = []
        return out

    # ---- event handlers ----

    def _on_arrive_ul(self, frame: Frame) -> None:
        self.injected += 1
        if self.size_jitter > 0.0:
            lo, hi = 1.0 - self.size_jitter, 1.0 + self.size_jitter
            frame.ul_bits *= self.rng.uniform(lo, hi)
            frame.dl_bits *= self.rng.uniform(lo, hi)
        self._radio_enqueue(self._ul, frame, frame.ul_bits, _UL_DONE)

    def _radio_enqueue(self, queue: _RadioQueue, frame: Frame, bits: float, done_kind: int) -> None:
        queue.sync(self.now)
        queue.frames.append([frame, bits])
        queue.backlog += bits
        queue.arrival_times.append(self.now)
        queue.arrival_cum.append(queue.arrival_cum[-1] + bits)
        if len(queue.frames) == 1:
            queue.head_remaining = bits
            self._reschedule_head(queue, done_kind)
        queue.knot(self.now)

    def _reschedule_head(self, queue: _RadioQueue, done_kind: int) -> None:
        queue.head_version += 1
        if queue.frames:
            t_done = queue.last_sync + queue.head_remaining / queue.rate
            heappush(self._heap, (t_done, next(self._seq), done_kind, (queue, queue.head_version)))

    def _on_radio_done(self, queue: _RadioQueue, payload, next_kind: int, latency: float, done_kind: int) -> None:
        _, version = payload
        if version != queue.head_version:
            return  # superseded by a rate change
        queue.sync(self.now)
        frame, total = queue.frames.popleft()
        queue.backlog -= queue.head_remaining  # clear float residue
        queue.drained_completed += total
        queue.transit += 1
        heappush(self._heap, (self.now + latency, next(self._seq), next_kind, frame))
        if queue.frames:
            queue.head_remaining = queue.frames[0][1]
        else:
            queue.head_remaining = 0.0
            queue.backlog = 0.0
        self._reschedule_head(queue, done_kind)
        queue.knot(self.now)

    def _on_gpu_in(self, frame: Frame) -> None:
        self._ul.transit -= 1
        frame.t_edge_in = self.now
        gpu = self._gpu
        gpu.waiting.append(frame)
        if gpu.in_service is None:
            self._gpu_start()
        gpu.knot(self.now)

    def _gpu_start(self) -> None:
        gpu = self._gpu
        frame = gpu.waiting.popleft()
        gpu.in_service = frame
        t_done = self.now + gpu.model.service_time(gpu.freq)
        heappush(self._heap, (t_done, next(self._seq), _GPU_DONE, frame))

    def _on_gpu_done(self, frame: Frame) -> None:
        gpu = self._gpu
        frame.t_edge_out = self.now
        gpu.in_service = None
        self._radio_enqueue(self._dl, frame, frame.dl_bits, _DL_DONE)
        if gpu.waiting:
            self._gpu_start()
        gpu.knot(self.now)

    def _on_receive(self, frame: Frame) -> None:
        self._dl.transit -= 1
        frame.t_received = self.now
        self.completed_count += 1
        self._completed_buffer.append(frame)

    # ---- observation ----

    def hop_backlog(self, hop: str, t: float) -> float:
        """Queued bits (radio) or frames (GPU) at time ``t`` <= now."""
        if t < -_EPS or t > self.now + _EPS:
            raise ValueError(f"t must lie in [0, {self.now}], got {t}")
        if hop == UL:
            return self._ul.backlog_at(t)
        if hop == DL:
            return self._dl.backlog_at(t)
        if hop == EDGE:
            return float(self._gpu.count_at(t))
        raise ValueError(f"unknown hop {hop!r}")

    def collect_subintervals(self, hop: str, slot_start: float, slot_end: float) -> list[SubIntervalSample]:
        """Arrived bits and end-of-sub-interval backlog for each sub-interval of a past slot."""
        if hop not in RADIO_HOPS:
            raise ValueError(f"sub-interval collection applies to radio hops, got {hop!r}")
        if slot_start < -_EPS or slot_end > self.now + _EPS or slot_end <= slot_start:
            raise ValueError("slot must lie within simulated time")
        n_float = (slot_end - slot_start) / self.subinterval
        n = round(n_float)
        if n < 1 or abs(n_float - n) > 1e-6:
            raise ValueError("slot is not aligned to the sub-interval grid")
        queue = self._ul if hop == UL else self._dl
        samples = []
        times = queue.arrival_times
        cum = queue.arrival_cum
        for k in range(n):
            lo = slot_start + k * self.subinterval
            hi = slot_end if k == n - 1 else slot_start + (k + 1) * self.subinterval
            i0 = bisect_left(times, lo)
            i1 = bisect_left(times, hi)
            arrived = cum[i1] - cum[i0]
            backlog = queue.backlog_at(hi)
            samples.append(SubIntervalSample(hop, arrived if arrived > 0.0 else 0.0, backlog))
        return samples

    # ---- accounting ----

    def in_flight_breakdown(self) -> dict[str, int]:
        return {
            "ul_queue": len(self._ul.frames),
            "ul_transit": self._ul.transit,
            "gpu": self._gpu.count(),
            "dl_queue": len(self._dl.frames),
            "dl_transit": self._dl.transit,
        }

    def in_flight(self) -> int:
        return sum(self.in_flight_breakdown().values())

    def check_conservation(self) -> None:
        """Raise if injected frames are not all accounted for across the stages."""
        in_flight = self.in_flight()
        if self.injected != self.completed_count + in_flight:
            raise RuntimeError(
                f"conservation violated: injected={self.injected} "
                f"completed={self.completed_count} in_flight={in_flight}"
            )

    def conservation_error(self) -> float:
        """Max relative gap between drained bits and integrated service on the radio hops."""
        worst = 0.0
        for queue in (self._ul, self._dl):
            queue.sync(self.now)
            drained = queue.drained_total()
            gap = abs(drained - queue.busy_integral) / max(drained, 1.0)
            worst = max(worst, gap)
        return worst
