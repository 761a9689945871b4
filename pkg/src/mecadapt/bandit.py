"""Per-state UCB1 bandits over discrete resource levels, with an optional
counterfactual update that exploits monotone feedback: if an allocation
failed, every smaller one would have failed too; if it succeeded, every
larger one would have succeeded at its own resource cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

STATE_LEVELS = tuple(range(0, 110, 5))  # discretized demand states 0..105


@dataclass(frozen=True)
class ActionSpace:
    """Strictly increasing positive resource levels."""

    levels: tuple

    def __init__(self, levels) -> None:
        levels = tuple(levels)
        if not levels:
            raise ValueError("action space must not be empty")
        if levels[0] <= 0:
            raise ValueError("levels must be positive")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @property
    def a_max(self):
        return self.levels[-1]

    def __len__(self) -> int:
        return len(self.levels)

    def __contains__(self, value) -> bool:
        return value in self.levels

    def index(self, value) -> int:
        return self.levels.index(value)


def lambda_for(a_max: float) -> float:
    """Violation penalty weight: 0.2 * a_max spread over a 0.1 unit step."""
    return 0.2 * a_max / 0.1


@dataclass(frozen=True)
class CostParams:
    lam: float
    a_max: float

    @classmethod
    def from_space(cls, space: ActionSpace) -> "CostParams":
        return cls(lambda_for(space.a_max), space.a_max)

    @property
    def max_cost(self) -> float:
        return self.a_max + self.lam


def slot_cost(action: float, q: int, params: CostParams) -> float:
    """Resource spent plus the penalty when the slot missed its budget."""
    if q not in (0, 1):
        raise ValueError("q must be 0 or 1")
    return action + params.lam * (1 - q)


def normalize_cost(cost: float, params: CostParams) -> float:
    if cost < -1e-12 or cost > params.max_cost * (1 + 1e-12):
        raise ValueError(f"cost {cost} outside [0, {params.max_cost}]")
    return cost / params.max_cost


@dataclass
class ArmStats:
    pulls: int = 0
    mean_cost: float = 0.0


class ContextualBanditTable:
    """Independent UCB1 learner per discretized state.

    Selection returns the arm minimizing mean_cost - sqrt(2 ln(rounds)/pulls),
    after an initial ascending sweep of unpulled arms; ties go to the smaller
    resource level.
    """

    def __init__(self, space: ActionSpace, params: CostParams | None = None) -> None:
        self.space = space
        self.params = params if params is not None else CostParams.from_space(space)
        self._arms: dict[int, list[ArmStats]] = {}
        self._rounds: dict[int, int] = {}

    def _check_state(self, state: int) -> None:
        if state not in STATE_LEVELS:
            raise ValueError(f"state must be a multiple of 5 in [0, 105], got {state}")

    def arms(self, state: int) -> list[ArmStats]:
        self._check_state(state)
        stats = self._arms.get(state)
        if stats is None:
            stats = [ArmStats() for _ in self.space.levels]
            self._arms[state] = stats
            self._rounds[state] = 0
        return stats

    def rounds(self, state: int) -> int:
        self.arms(state)
        return self._rounds[state]

    def select(self, state: int):
        stats = self.arms(state)
        for i, s in enumerate(stats):
            if s.pulls == 0:
                return self.space.levels[i]
        log_term = 2.0 * math.log(self._rounds[state])
        best_i = 0
        best_score = math.inf
        for i, s in enumerate(stats):
            score = s.mean_cost - math.sqrt(log_term / s.pulls)
            if score < best_score:
                best_score = score
                best_i = i
        return self.space.levels[best_i]

    def greedy(self, state: int):
        """Lowest mean-cost arm, ignoring exploration bonuses."""
        stats = self.arms(state)
        best_i = min(range(len(stats)), key=lambda i: (stats[i].mean_cost, i))
        return self.space.levels[best_i]

    @staticmethod
    def _push(stat: ArmStats, cost: float) -> None:
        stat.pulls += 1
        stat.mean_cost += (cost - stat.mean_cost) / stat.pulls

    def update_single(self, state: int, action, cost_normalized: float) -> None:
        """Record one observed normalized cost for the arm actually played."""
        if cost_normalized < -1e-12 or cost_normalized > 1.0 + 1e-12:
            raise ValueError("normalized cost must lie in [0, 1]")
        stats = self.arms(state)
        self._push(stats[self.space.index(action)], cost_normalized)
        self._rounds[state] += 1

    def update_monotone(self, state: int, action, q: int) -> None:
        """Counterfactual sweep: a failure charges every arm at or below the
        one played (its cost plus the penalty); a success charges every arm at
        or above it (its own cost only).  One round regardless of arm count.
        """
        if q not in (0, 1):
            raise ValueError("q must be 0 or 1")
        stats = self.arms(state)
        split = self.space.index(action)
        params = self.params
        if q == 0:
            for i in range(split + 1):
                cost = (self.space.levels[i] + params.lam) / params.max_cost
                self._push(stats[i], cost)
        else:
            for i in range(split, len(stats)):
                cost = self.space.levels[i] / params.max_cost
                self._push(stats[i], cost)
        self._rounds[state] += 1

    def dump(self) -> str:
        """Human-readable listing of every visited state's arm statistics."""
        lines = [f"levels: {' '.join(str(v) for v in self.space.levels)}"]
        for state in sorted(self._arms):
            lines.append(f"state={state} rounds={self._rounds[state]}")
            for level, s in zip(self.space.levels, self._arms[state]):
                lines.append(f"  arm={level} pulls={s.pulls} mean_cost={s.mean_cost:.6f}")
        return "\n".join(lines) + "\n"
