"""Shared value types for the triage world: attributes, scenario profiles,
system states, decision plans, and the cost functions every policy prices.

Everything here is an immutable value object; the stochastic machinery lives
in :mod:`triagelab.environment` and the optimization in
:mod:`triagelab.solver`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping


class TriageError(Exception):
    """Base class for all package errors."""


class ProfileError(TriageError):
    """A scenario profile violates the schema or a semantic invariant."""

    def __init__(self, fieldname: str, message: str):
        self.fieldname = fieldname
        super().__init__(f"{fieldname}: {message}")


class PlanInfeasibleError(TriageError):
    """A decision plan violates the flow constraints for its state."""


class ArcCostError(TriageError):
    """A cost entry required by the solver is missing (configuration error)."""


class InstanceTooLargeError(TriageError):
    """An exact/enumerative routine was asked to exceed its hard size caps."""


@dataclass(frozen=True, order=True)
class BugAttr:
    """An open bug: its category index and epochs remaining until deadline.

    ``due`` may go negative once the deadline has passed; it is clamped below
    at the profile's ``due_floor`` to keep the attribute space finite.
    """

    type_id: int
    due: int


@dataclass(frozen=True, order=True)
class DevAttr:
    """A developer: expertise-class index and epochs until availability.

    ``sch == 0`` means the developer can take an assignment this epoch.
    """

    exp_id: int
    sch: int


@dataclass(frozen=True)
class DevClass:
    """One expertise class: a cost row over bug types and a headcount.

    ``initial_schedule`` maps sch -> count at episode start and must sum to
    ``count``; by default everyone starts available.
    """

    cost: tuple[float, ...]
    count: int
    name: str = ""
    initial_schedule: tuple[tuple[int, int], ...] = ()

    def schedule_or_default(self) -> tuple[tuple[int, int], ...]:
        if self.initial_schedule:
            return self.initial_schedule
        return ((0, self.count),)


@dataclass(frozen=True)
class ArrivalProcess:
    """Per-epoch bug arrival model.

    kind:
      - ``histogram``: independent per-type histograms of per-epoch counts,
        ``per_type[i]`` is a tuple of (count, probability) pairs.
      - ``poisson``: independent per-type Poisson rates.
      - ``joint_histogram``: a joint distribution over count vectors
        (no independence assumption across types).
    """

    kind: str
    per_type: tuple[tuple[tuple[int, float], ...], ...] = ()
    rates: tuple[float, ...] = ()
    support: tuple[tuple[int, ...], ...] = ()
    probs: tuple[float, ...] = ()

    def mean_per_type(self, n_types: int) -> list[float]:
        if self.kind == "poisson":
            return list(self.rates)
        if self.kind == "histogram":
            return [sum(c * p for c, p in hist) for hist in self.per_type]
        means = [0.0] * n_types
        for vec, p in zip(self.support, self.probs):
            for i, c in enumerate(vec):
                means[i] += c * p
        return means


@dataclass(frozen=True)
class ScheduleProcess:
    """Last-minute availability churn: with probability ``change_prob`` an
    available developer becomes absent for a geometric duration with mean
    ``absence_mean`` epochs, and symmetrically an unavailable developer
    returns early with the same probability."""

    change_prob: float = 0.05
    absence_mean: float = 2.0


@dataclass(frozen=True)
class ScenarioProfile:
    """Static description of one triage world.

    Costs are expressed in epochs: ``dev_classes[e].cost[b]`` is the fixing
    time a class-``e`` developer needs for a type-``b`` bug.
    """

    n_bug_types: int
    dev_classes: tuple[DevClass, ...]
    horizon: int
    deadline_cap: int
    arrival_process: ArrivalProcess
    schedule_process: ScheduleProcess = ScheduleProcess()
    epoch_length: float = 1.0
    due_floor: int | None = None
    rejection_prob: float = 0.75
    discount: float = 0.99
    postponement_cost_kind: str = "linear"
    postponement_base: float = 0.9
    gamma_weights_vfa: bool = True
    rng_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.due_floor is None:
            object.__setattr__(self, "due_floor", -self.deadline_cap)

    @property
    def n_dev_classes(self) -> int:
        return len(self.dev_classes)

    @property
    def total_devs(self) -> int:
        return sum(c.count for c in self.dev_classes)

    def cost(self, exp_id: int, type_id: int) -> float:
        return self.dev_classes[exp_id].cost[type_id]

    @property
    def max_cost(self) -> float:
        return max(max(c.cost) for c in self.dev_classes)

    def busy_epochs(self, exp_id: int, type_id: int) -> int:
        """Integer epochs a developer stays unavailable after taking a bug:
        the fixing time rounded half-up, never below one epoch."""
        return max(1, int(math.floor(self.cost(exp_id, type_id) + 0.5)))

    def due_range(self) -> range:
        return range(self.due_floor, self.deadline_cap + 1)

    def validate(self) -> None:
        if self.n_bug_types < 1:
            raise ProfileError("n_bug_types", "must be >= 1")
        if not self.dev_classes:
            raise ProfileError("dev_classes", "must be non-empty")
        for e, cls in enumerate(self.dev_classes):
            if len(cls.cost) != self.n_bug_types:
                raise ProfileError(
                    f"dev_classes[{e}].cost",
                    f"length {len(cls.cost)} != n_bug_types {self.n_bug_types}",
                )
            for b, c in enumerate(cls.cost):
                if not (c > 0 and math.isfinite(c)):
                    raise ProfileError(
                        f"dev_classes[{e}].cost[{b}]",
                        f"must be positive and finite, got {c}",
                    )
            if cls.count < 0:
                raise ProfileError(f"dev_classes[{e}].count", "must be >= 0")
            if cls.initial_schedule:
                if sum(n for _, n in cls.initial_schedule) != cls.count:
                    raise ProfileError(
                        f"dev_classes[{e}].initial_schedule",
                        "entries must sum to the class count",
                    )
                for sch, n in cls.initial_schedule:
                    if sch < 0 or n < 0:
                        raise ProfileError(
                            f"dev_classes[{e}].initial_schedule",
                            "sch and count must be >= 0",
                        )
        if self.horizon < 2:
            raise ProfileError("horizon", "must be >= 2")
        if self.deadline_cap < 1:
            raise ProfileError("deadline_cap", "must be >= 1")
        if self.due_floor > 0:
            raise ProfileError("due_floor", "must be <= 0")
        if not 0.0 <= self.rejection_prob <= 1.0:
            raise ProfileError("rejection_prob", "must be in [0, 1]")
        if not 0.0 < self.discount < 1.0:
            raise ProfileError("discount", "must be in the open interval (0, 1)")
        if self.postponement_cost_kind not in ("linear", "exponential"):
            raise ProfileError(
                "postponement_cost_kind", "must be 'linear' or 'exponential'"
            )
        if not 0.0 < self.postponement_base < 1.0:
            raise ProfileError("postponement_base", "must be in (0, 1)")
        if self.epoch_length <= 0:
            raise ProfileError("epoch_length", "must be > 0")
        self._validate_arrivals()
        sp = self.schedule_process
        if not 0.0 <= sp.change_prob <= 1.0:
            raise ProfileError("schedule_process.change_prob", "must be in [0, 1]")
        if sp.absence_mean < 1.0:
            raise ProfileError("schedule_process.absence_mean", "must be >= 1")

    def _validate_arrivals(self) -> None:
        ap = self.arrival_process
        if ap.kind == "histogram":
            if len(ap.per_type) != self.n_bug_types:
                raise ProfileError(
                    "arrival_process.per_type",
                    f"needs {self.n_bug_types} histograms, got {len(ap.per_type)}",
                )
            for i, hist in enumerate(ap.per_type):
                total = sum(p for _, p in hist)
                if abs(total - 1.0) > 1e-9:
                    raise ProfileError(
                        f"arrival_process.per_type[{i}]",
                        f"probabilities sum to {total}, expected 1",
                    )
                if any(c < 0 or p < 0 for c, p in hist):
                    raise ProfileError(
                        f"arrival_process.per_type[{i}]",
                        "counts and probabilities must be >= 0",
                    )
        elif ap.kind == "poisson":
            if len(ap.rates) != self.n_bug_types:
                raise ProfileError(
                    "arrival_process.rates",
                    f"needs {self.n_bug_types} rates, got {len(ap.rates)}",
                )
            if any(r < 0 for r in ap.rates):
                raise ProfileError("arrival_process.rates", "must be >= 0")
        elif ap.kind == "joint_histogram":
            if len(ap.support) != len(ap.probs):
                raise ProfileError(
                    "arrival_process.support", "support/probs length mismatch"
                )
            if abs(sum(ap.probs) - 1.0) > 1e-9:
                raise ProfileError("arrival_process.probs", "must sum to 1")
            for vec in ap.support:
                if len(vec) != self.n_bug_types:
                    raise ProfileError(
                        "arrival_process.support",
                        f"vector {vec} has wrong arity",
                    )
                if any(c < 0 for c in vec):
                    raise ProfileError("arrival_process.support", "counts must be >= 0")
        else:
            raise ProfileError("arrival_process.kind", f"unknown kind {ap.kind!r}")


@dataclass(frozen=True)
class SystemState:
    """Counts of open bugs and developers at the start of an epoch."""

    epoch: int
    bug_counts: Mapping[BugAttr, int]
    dev_counts: Mapping[DevAttr, int]

    @property
    def total_bugs(self) -> int:
        return sum(self.bug_counts.values())

    @property
    def total_devs(self) -> int:
        return sum(self.dev_counts.values())

    def available_devs(self) -> dict[DevAttr, int]:
        return {
            d: n for d, n in self.dev_counts.items() if d.sch == 0 and n > 0
        }

    def open_bugs(self) -> dict[BugAttr, int]:
        return {b: n for b, n in self.bug_counts.items() if n > 0}

    def key(self) -> tuple:
        """Canonical hashable key (used for memoization in the exact oracle)."""
        return (
            self.epoch,
            tuple(sorted((b.type_id, b.due, n) for b, n in self.bug_counts.items() if n)),
            tuple(sorted((d.exp_id, d.sch, n) for d, n in self.dev_counts.items() if n)),
        )


@dataclass(frozen=True)
class DecisionPlan:
    """The per-epoch action: assignment counts y, postponement counts p and
    idle slacks h. Only strictly positive entries are stored."""

    assign: Mapping[tuple[DevAttr, BugAttr], int]
    postpone: Mapping[BugAttr, int]
    idle: Mapping[DevAttr, int]

    @property
    def total_assigned(self) -> int:
        return sum(self.assign.values())

    def validate_for(self, state: SystemState) -> None:
        """Check Eqs-of-flow feasibility: every available developer is either
        assigned or idle, every open bug assigned or postponed, all integral."""
        for mapping in (self.assign, self.postpone, self.idle):
            for key, v in mapping.items():
                if not isinstance(v, int) or v < 0:
                    raise PlanInfeasibleError(f"entry {key} -> {v} not a count")
        dev_used: dict[DevAttr, int] = {}
        bug_used: dict[BugAttr, int] = {}
        for (d, b), y in self.assign.items():
            if d.sch != 0:
                raise PlanInfeasibleError(f"assignment from busy developer {d}")
            dev_used[d] = dev_used.get(d, 0) + y
            bug_used[b] = bug_used.get(b, 0) + y
        for d, h in self.idle.items():
            if d.sch != 0:
                raise PlanInfeasibleError(f"idle slack for busy developer {d}")
            dev_used[d] = dev_used.get(d, 0) + h
        for b, p in self.postpone.items():
            bug_used[b] = bug_used.get(b, 0) + p
        avail = state.available_devs()
        for d in set(avail) | set(dev_used):
            if dev_used.get(d, 0) != avail.get(d, 0):
                raise PlanInfeasibleError(
                    f"developer balance violated at {d}: "
                    f"{dev_used.get(d, 0)} used vs {avail.get(d, 0)} available"
                )
        bugs = state.open_bugs()
        for b in set(bugs) | set(bug_used):
            if bug_used.get(b, 0) != bugs.get(b, 0):
                raise PlanInfeasibleError(
                    f"bug balance violated at {b}: "
                    f"{bug_used.get(b, 0)} routed vs {bugs.get(b, 0)} open"
                )


@dataclass(frozen=True)
class ExogenousDraw:
    """One realization of the between-epochs information: new bugs per type,
    schedule-change events and rejected assignments."""

    new_bugs: Mapping[int, int]
    sch_changes: tuple[tuple[int, int, int, int], ...] = ()  # (exp, from, to, count)
    rejections: Mapping[tuple[int, BugAttr], int] = field(default_factory=dict)

    @property
    def total_arrivals(self) -> int:
        return sum(self.new_bugs.values())


def postponement_cost(due: int, profile: ScenarioProfile) -> float:
    """Penalty for deferring a bug whose deadline is ``due`` epochs away.

    Linear kind: (T - due)/T, reaching 1 at the deadline and growing past it.
    Exponential kind: base**due, also 1 at the deadline, exploding when late.
    """
    if profile.postponement_cost_kind == "linear":
        return (profile.horizon - due) / profile.horizon
    return profile.postponement_base ** due


def initial_due(t: int, profile: ScenarioProfile) -> int:
    """Deadline attribute of a bug entering the tracker at epoch ``t``:
    min(T - t - 1, U), floored at zero for arrivals at the horizon edge."""
    return max(0, min(profile.horizon - t - 1, profile.deadline_cap))


def clamp_due(due: int, profile: ScenarioProfile) -> int:
    return max(due, profile.due_floor)


def decision_cost(
    state: SystemState, plan: DecisionPlan, profile: ScenarioProfile
) -> float:
    """Immediate cost of a plan: postponement penalties plus fixing times."""
    plan.validate_for(state)
    total = 0.0
    for b, p in sorted(plan.postpone.items()):
        total += postponement_cost(b.due, profile) * p
    for (d, b), y in sorted(plan.assign.items()):
        total += profile.cost(d.exp_id, b.type_id) * y
    return total


def empty_plan() -> DecisionPlan:
    return DecisionPlan(assign={}, postpone={}, idle={})


def profile_with(profile: ScenarioProfile, **changes) -> ScenarioProfile:
    """Return a copy of the profile with the given fields replaced."""
    return replace(profile, **changes)
