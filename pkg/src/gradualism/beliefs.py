"""Stake-indexed belief curves and their learning rules.

A curve stores, for each integer stake level X on the grid, the player's
subjective probability that every other group member is willing to contribute
at X.  Curves are pinned to 1 at X = 0 and weakly decrease in the stake.
Updates react only to the single public signal of a period: whether the whole
group contributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .game import Action, GameParams


class KernelForm(str, Enum):
    """Shape of the upward-influence kernel applied after a success."""

    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    STEP = "step"


@dataclass(frozen=True)
class UpdateParams:
    """Learning-rule parameters shared by the three update cases.

    kernel_scale is the decay rate for the exponential form and the cutoff
    width for the linear and step forms.  failure_cap is the level beliefs are
    capped at (from the failed stake upward) after contributing to a failure;
    it must stay below the decision threshold 1/multiplier for failures to be
    absorbing.
    """

    kernel_form: KernelForm = KernelForm.EXPONENTIAL
    kernel_scale: float = 0.2
    failure_cap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kernel_form", KernelForm(self.kernel_form))
        if not (math.isfinite(self.kernel_scale) and self.kernel_scale >= 0.0):
            raise ValueError(f"kernel_scale must be finite and >= 0, got {self.kernel_scale!r}")
        if not 0.0 <= self.failure_cap < 1.0:
            raise ValueError(f"failure_cap must lie in [0, 1), got {self.failure_cap!r}")


def kernel_eval(params: UpdateParams, gap: int) -> float:
    """Influence of a success at stake S on willingness at stake S + gap.

    Equal to 1 at gap 0 and weakly decreasing in the gap for every form.
    """
    if isinstance(gap, bool) or not isinstance(gap, (int, np.integer)):
        raise ValueError(f"gap must be an integer, got {gap!r}")
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    if gap == 0:
        return 1.0
    if params.kernel_form is KernelForm.EXPONENTIAL:
        return math.exp(-params.kernel_scale * gap)
    if params.kernel_form is KernelForm.LINEAR:
        if params.kernel_scale == 0.0:
            return 0.0
        return max(0.0, 1.0 - gap / params.kernel_scale)
    return 1.0 if gap <= params.kernel_scale else 0.0


@lru_cache(maxsize=None)
def _kernel_table(params: UpdateParams, grid_max: int) -> np.ndarray:
    table = np.array([kernel_eval(params, g) for g in range(grid_max + 1)])
    table.flags.writeable = False
    return table


@dataclass(frozen=True, eq=False)
class BeliefCurve:
    """Weakly decreasing contribution beliefs over the integer stake grid 0..grid_max."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("curve needs a 1-D grid with at least stakes 0 and 1")
        if arr[0] != 1.0:
            raise ValueError(f"curve must equal 1 at stake 0, got {arr[0]!r}")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("curve values must lie in [0, 1]")
        if np.any(np.diff(arr) > 0.0):
            raise ValueError("curve must be weakly decreasing in the stake")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def grid_max(self) -> int:
        return self.values.shape[0] - 1

    @classmethod
    def flat(cls, level: float, grid_max: int = 20) -> "BeliefCurve":
        """Curve pinned to 1 at stake 0 and constant at `level` above it."""
        vals = np.full(grid_max + 1, float(level))
        vals[0] = 1.0
        return cls(vals)

    def to_json(self) -> list[float]:
        return [float(v) for v in self.values]

    def __eq__(self, other):
        return isinstance(other, BeliefCurve) and np.array_equal(self.values, other.values)


def _wrap(values: np.ndarray) -> BeliefCurve:
    # Internal fast path: callers guarantee the invariants hold by construction.
    curve = object.__new__(BeliefCurve)
    values.flags.writeable = False
    object.__setattr__(curve, "values", values)
    return curve


def _check_grid_stake(stake, grid_max: int) -> int:
    if isinstance(stake, bool) or not isinstance(stake, (int, np.integer)):
        raise ValueError(f"stake must be an integer grid level, got {stake!r}")
    if not 0 <= stake <= grid_max:
        raise ValueError(f"stake {stake} is off the grid 0..{grid_max}")
    return int(stake)


def evaluate(curve: BeliefCurve, stake) -> float:
    """Belief that all others contribute at an integer stake level."""
    stake = _check_grid_stake(stake, curve.grid_max)
    return float(curve.values[stake])


def decide(curve: BeliefCurve, stake, game: GameParams) -> Action:
    """Contribute iff the belief at the stake clears 1/multiplier (ties contribute)."""
    if evaluate(curve, stake) >= game.decision_threshold:
        return Action.CONTRIBUTE
    return Action.NOT_CONTRIBUTE


def update_after_success(curve: BeliefCurve, stake, params: UpdateParams) -> BeliefCurve:
    """Group succeeded at `stake`: certainty up to the stake, kernel lift above it.

    Levels at or below the successful stake clamp to 1; each higher level X
    rises to at least kernel(X - stake) and never falls.
    """
    stake = _check_grid_stake(stake, curve.grid_max)
    new = curve.values.copy()
    new[: stake + 1] = 1.0
    if stake < curve.grid_max:
        tail = _kernel_table(params, curve.grid_max)[1: curve.grid_max - stake + 1]
        np.maximum(new[stake + 1:], tail, out=new[stake + 1:])
    return _wrap(new)


def update_after_observed_failure(curve: BeliefCurve, stake, params: UpdateParams) -> BeliefCurve:
    """Own contribution met a failure at `stake`: cap beliefs from the stake upward."""
    stake = _check_grid_stake(stake, curve.grid_max)
    if stake < 1:
        raise ValueError("failure updates need a positive stake")
    new = curve.values.copy()
    np.minimum(new[stake:], params.failure_cap, out=new[stake:])
    return _wrap(new)


def update_after_own_abstention(curve: BeliefCurve) -> BeliefCurve:
    """Holding out reveals nothing about the others; beliefs stay put."""
    return curve


@dataclass(frozen=True)
class InitialBeliefParams:
    """Log-normal population of initial decay rates.

    Each fresh agent draws lam = exp(location + spread * z) with z standard
    normal and starts from the curve exp(-lam * X).
    """

    location: float
    spread: float

    def __post_init__(self):
        if not math.isfinite(self.location):
            raise ValueError(f"location must be finite, got {self.location!r}")
        if not (math.isfinite(self.spread) and self.spread > 0.0):
            raise ValueError(f"spread must be finite and > 0, got {self.spread!r}")


def sample_initial(params: InitialBeliefParams, game: GameParams,
                   rng: np.random.Generator) -> BeliefCurve:
    """Draw one agent's initial curve exp(-lam * X) on the game's stake grid."""
    lam = math.exp(params.location + params.spread * rng.standard_normal())
    grid = np.arange(game.grid_max + 1, dtype=np.float64)
    return BeliefCurve(np.exp(-lam * grid))
