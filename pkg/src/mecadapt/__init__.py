"""Three-hop edge pipeline simulator with slot-level resource control."""

from .bandit import (ActionSpace, ArmStats, ContextualBanditTable, CostParams,
                     lambda_for, normalize_cost, slot_cost)
from .config import (CalibrationConfig, ConfigError, ScenarioConfig,
                     bundled_scenario_path, config_from_dict, load_config)
from .control import (SCHEMES, HopBudgets, Mucb1Policy, SlotController,
                      SlotRecord, StaticPolicy, TcpPolicy, Ucb1Policy,
                      hop_feedback, make_policies, normalize_scheme,
                      observe_state, roundtrip_feedback, split_budget,
                      static_action, tcp_step)
from .metrics import (LoadSummary, PowerParams, SummaryRow, avg_resource,
                      bs_power, build_summary, gpu_power,
                      per_load_trailing_summary, qos_delivery_ratio,
                      savings_vs_static, ue_power)
from .runner import (RunArtifacts, compare_schemes, read_slots_csv,
                     run_scenario, simulate_scheme)
from .sim import (DL, EDGE, HOPS, UL, Frame, GpuHopModel, HopAllocation,
                  RadioHopModel, Simulator, SubIntervalSample)
from .traffic import (TrafficConfig, UserSchedule, frame_arrivals,
                      generate_schedule, merge_arrivals)

__version__ = "0.1.0"
