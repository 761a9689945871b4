from collections import Counter

import pytest

from mecadapt import (DL, EDGE, UL, ActionSpace, Frame, GpuHopModel, HopBudgets,
                      Mucb1Policy, RadioHopModel, Simulator, SlotController,
                      StaticPolicy, TcpPolicy, Ucb1Policy, hop_feedback,
                      make_policies, normalize_scheme, observe_state,
                      roundtrip_feedback, split_budget, static_action, tcp_step)
from mecadapt.sim import SubIntervalSample

UL_SPACE = ActionSpace(range(10, 107, 2))
GPU_SPACE = ActionSpace((500.0, 700.0, 900.0, 1100.0, 1300.0, 1600.0))


def frame(flow, seq, sent, edge_in=None, edge_out=None, received=None):
    f = Frame(flow_id=flow, seq=seq, ul_bits=143333.0, dl_bits=50000.0, t_sent=sent)
    f.t_edge_in = edge_in
    f.t_edge_out = edge_out
    f.t_received = received
    return f


def test_normalize_scheme():
    assert normalize_scheme("MUCB1") == "mucb1"
    assert normalize_scheme("TCP-based") == "tcp"
    assert normalize_scheme(" static ") == "static"
    with pytest.raises(ValueError):
        normalize_scheme("greedy")


def test_split_budget_nominal():
    b = split_budget(0.150, (0.012, 0.009, 0.019), (5.0, 2.0, 3.0))
    assert (b.ul, b.edge, b.dl) == (0.070, 0.020, 0.060)
    assert b.total() == pytest.approx(0.150)
    assert b.for_hop(UL) == 0.070
    assert b.for_hop(EDGE) == 0.020
    assert b.for_hop(DL) == 0.060


def test_split_budget_repairs_rounding_on_largest_share():
    b = split_budget(0.135, (0.012, 0.009, 0.019), (5.0, 2.0, 3.0))
    assert (b.ul, b.edge, b.dl) == (0.060, 0.020, 0.055)
    assert b.total() == pytest.approx(0.135)


def test_split_budget_validation():
    with pytest.raises(ValueError):
        split_budget(0.030, (0.012, 0.009, 0.019), (5.0, 2.0, 3.0))  # below floor
    with pytest.raises(ValueError):
        split_budget(0.150, (0.012, 0.0, 0.019), (5.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        split_budget(0.150, (0.012, 0.009, 0.019), (5.0, -2.0, 3.0))
    with pytest.raises(ValueError):
        HopBudgets(0.07, 0.0, 0.06)


def test_observe_state_rounding_and_clamp():
    per_prb = 22e6 / 106 * 0.2  # ~41509 bits per PRB per sub-interval
    mk = lambda bits, backlog=0.0: SubIntervalSample(UL, bits, backlog)
    # 1.72e6 bits -> ceil 42 PRBs -> state 40
    assert observe_state([mk(1.72e6)], per_prb) == 40
    # backlog adds to demand
    assert observe_state([mk(1.72e6, 1.72e6)], per_prb) == 85
    # mean of 42 and 43 is 42.5: half rounds up
    assert observe_state([mk(42 * per_prb), mk(43 * per_prb)], per_prb) == 45
    assert observe_state([mk(0.0)], per_prb) == 0
    assert observe_state([mk(1e9)], per_prb) == 105
    with pytest.raises(ValueError):
        observe_state([], per_prb)
    with pytest.raises(ValueError):
        observe_state([mk(1.0)], 0.0)


def test_hop_feedback_mean_within_budget():
    frames = [frame(0, 0, 0.0, edge_in=0.050), frame(0, 1, 0.0, edge_in=0.060)]
    assert hop_feedback(frames, UL, 0.070, at=10.0) == 1
    # mean of 50 and 80 ms is 65: one slow frame is tolerated if the mean holds
    frames = [frame(0, 0, 0.0, edge_in=0.050), frame(0, 1, 0.0, edge_in=0.080)]
    assert hop_feedback(frames, UL, 0.070, at=10.0) == 1
    assert hop_feedback(frames, UL, 0.060, at=10.0) == 0


def test_hop_feedback_empty_is_satisfied():
    assert hop_feedback([], UL, 0.070, at=5.0) == 1
    assert hop_feedback([], DL, 0.060, at=5.0) == 1


def test_hop_feedback_per_flow_isolation():
    good = [frame(0, k, 0.0, edge_in=0.020) for k in range(3)]
    bad = [frame(1, k, 0.0, edge_in=0.200) for k in range(3)]
    assert hop_feedback(good, UL, 0.070, at=5.0) == 1
    assert hop_feedback(good + bad, UL, 0.070, at=5.0) == 0


def test_hop_feedback_stuck_frame_blames_its_hop():
    # inside the uplink for longer than the budget at evaluation time
    stuck = frame(0, 0, 4.8)
    assert hop_feedback([stuck], UL, 0.070, at=5.0) == 0
    # not yet over budget: still fine
    fresh = frame(0, 0, 4.96)
    assert hop_feedback([fresh], UL, 0.070, at=5.0) == 1
    # never reached the downlink: says nothing about the downlink
    assert hop_feedback([stuck], DL, 0.060, at=5.0) == 1
    with pytest.raises(ValueError):
        hop_feedback([stuck], "core", 0.070, at=5.0)


def test_roundtrip_feedback():
    done = frame(0, 0, 1.0, 1.01, 1.02, 1.040)
    assert roundtrip_feedback([done], 0.150) == 1
    slow = frame(0, 1, 1.0, 1.05, 1.10, 1.151)
    assert roundtrip_feedback([slow], 0.150) == 0
    mixed = [frame(0, 0, 1.0, received=1.100), frame(0, 1, 1.0, received=1.160)]
    assert roundtrip_feedback(mixed, 0.150) == 1  # mean 130 ms
    unfinished = frame(0, 2, 1.0, edge_in=1.05)
    assert roundtrip_feedback([done, unfinished], 0.150) == 0
    assert roundtrip_feedback([], 0.150) == 1


def test_tcp_step_doubles_up_and_steps_down():
    space = ActionSpace(range(10, 107, 2))
    assert tcp_step(space, 20, 0) == 40
    assert tcp_step(space, 60, 0) == 106  # doubling clamps to the top
    assert tcp_step(space, 106, 0) == 106
    assert tcp_step(space, 30, 1) == 28
    assert tcp_step(space, 10, 1) == 10
    # doubling lands on the next level at or above 2*a
    coarse = ActionSpace((10, 20, 40, 60, 80, 100))
    assert tcp_step(coarse, 40, 0) == 80
    assert tcp_step(coarse, 60, 0) == 100
    with pytest.raises(ValueError):
        tcp_step(space, 20, 2)


def test_static_action_is_max():
    assert static_action(UL_SPACE) == 106
    assert static_action(GPU_SPACE) == 1600.0


def test_policy_behaviour():
    static = StaticPolicy(UL_SPACE)
    assert static.select(40) == 106
    static.update(40, 106, 0)
    assert static.select(40) == 106
    assert static.dump() is None

    tcp = TcpPolicy(UL_SPACE)
    assert tcp.select(0) == 106  # starts at the top
    tcp.update(0, 106, 1)
    assert tcp.select(50) == 104  # ignores the state entirely
    with pytest.raises(ValueError):
        TcpPolicy(UL_SPACE, initial=13)

    ucb = Ucb1Policy(UL_SPACE)
    mucb = Mucb1Policy(UL_SPACE)
    assert ucb.select(40) == 10 and mucb.select(40) == 10
    ucb.update(40, 10, 0)
    mucb.update(40, 10, 0)
    assert ucb.select(40) == 12 and mucb.select(40) == 12
    assert "state=40" in ucb.dump() and "state=40" in mucb.dump()


def test_make_policies_one_per_hop():
    policies = make_policies("mucb1", UL_SPACE, GPU_SPACE, UL_SPACE)
    assert set(policies) == {UL, EDGE, DL}
    assert policies[EDGE].table.space is GPU_SPACE
    assert isinstance(make_policies("static", UL_SPACE, GPU_SPACE, UL_SPACE)[UL], StaticPolicy)


COARSE_UL = ActionSpace((10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 106))
COARSE_GPU = ActionSpace(range(500, 1700, 100))


def make_controller(scheme="static", frames=(), slot_len=5.0):
    sim = Simulator(RadioHopModel(UL, 22e6, fixed_latency=0.0055),
                    GpuHopModel(0.009, 1600.0),
                    RadioHopModel(DL, 44e6, fixed_latency=0.0179),
                    spaces=(COARSE_UL.levels, COARSE_GPU.levels, COARSE_UL.levels))
    for f in frames:
        sim.schedule_frame(f, f.t_sent)
    budgets = HopBudgets(0.070, 0.020, 0.060)
    policies = make_policies(scheme, COARSE_UL, COARSE_GPU, COARSE_UL)
    return SlotController(sim, policies, budgets, q_c=0.150,
                          slot_len=slot_len, frames=list(frames))


def test_controller_slot_zero_cold_start():
    ctrl = make_controller()
    rec = ctrl.run_slot()
    assert rec.slot_index == 0
    assert rec.state_ul == rec.state_dl == rec.state_edge == 0
    assert rec.a_ul == 106 and rec.a_gpu == 1600.0 and rec.a_dl == 106
    assert rec.q_ul == rec.q_edge == rec.q_dl == rec.q_rt == 1  # nothing to evaluate
    assert rec.frames_evaluated == 0 and rec.n_flows == 0


def test_controller_attributes_frames_with_censoring():
    frames = []
    for k in range(150):
        t = k / 30.0
        frames.append(Frame(flow_id=0, seq=k, ul_bits=143333.0, dl_bits=50000.0, t_sent=t))
    ctrl = make_controller(frames=frames)
    rec = ctrl.run_slot()
    # slot [0, 5): only frames sent before 4.85 count; 4.85 * 30 = 145.5
    assert rec.frames_evaluated == 146
    assert rec.n_flows == 1
    assert rec.q_ul == rec.q_edge == rec.q_dl == rec.q_rt == 1
    rec2 = ctrl.run_slot()
    # the 4 censored frames are never re-attributed
    assert rec2.frames_evaluated == 0
    assert rec2.n_flows == 0


def test_controller_edge_state_mirrors_uplink():
    frames = []
    for k in range(300):
        t = k / 30.0
        frames.append(Frame(flow_id=0, seq=k, ul_bits=143333.0, dl_bits=50000.0, t_sent=t))
    ctrl = make_controller(frames=frames)
    ctrl.run(2)
    rec = ctrl.records[1]
    assert rec.state_edge == rec.state_ul
    assert rec.state_ul > 0
    assert rec.state_dl > 0


def test_controller_rejects_bad_windows():
    sim = Simulator(RadioHopModel(UL, 22e6), GpuHopModel(), RadioHopModel(DL, 44e6))
    policies = make_policies("static", UL_SPACE, GPU_SPACE, UL_SPACE)
    budgets = HopBudgets(0.070, 0.020, 0.060)
    with pytest.raises(ValueError):
        SlotController(sim, policies, budgets, q_c=0.150, slot_len=0.1)
    with pytest.raises(ValueError):
        SlotController(sim, policies, budgets, q_c=0.0)


def test_stationary_load_mucb1_learns_cheap_feasible_arms():
    # One 30 fps flow, 240 slots, deterministic: the cheapest stable levels
    # are 30 uplink PRBs (20 cannot keep up), an 800 MHz clock (18 ms fits
    # the 20 ms edge share) and 10 downlink PRBs.  The learner should spend
    # nearly the whole tail there, with only sporadic exploration re-pulls.
    frames = [Frame(flow_id=0, seq=k, ul_bits=143333.0, dl_bits=50000.0,
                    t_sent=k / 30.0) for k in range(36000)]
    ctrl = make_controller("mucb1", frames=frames)
    ctrl.run(240)
    tail = ctrl.records[-100:]
    qos = sum(r.q_rt for r in tail) / len(tail)
    avg_ul = sum(r.a_ul for r in tail) / len(tail)
    assert qos >= 0.9
    assert avg_ul < 60.0
    mode = lambda key: Counter(key(r) for r in tail).most_common(1)[0][0]
    assert mode(lambda r: r.a_ul) == 30
    assert mode(lambda r: r.a_gpu) == 800.0
    assert mode(lambda r: r.a_dl) == 10
