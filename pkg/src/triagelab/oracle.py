"""Exact backward-induction solver of the finite-horizon triage MDP.

Only defined on tiny instances (hard caps below): the expectation over
exogenous arrivals is computed exactly from the enumerated distribution and
the action space is enumerated exhaustively, so the returned values are the
ground truth the approximate policy is benchmarked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .domain import (
    BugAttr,
    DecisionPlan,
    DevAttr,
    InstanceTooLargeError,
    ScenarioProfile,
    SystemState,
    decision_cost,
    initial_due,
    postponement_cost,
)
from .environment import ExogenousDraw, state_next, state_post
from .solver import enumerate_plans

MAX_DEV_CLASSES = 2
MAX_BUG_TYPES = 2
MAX_HORIZON = 8
MAX_DEADLINE_CAP = 3
MAX_ARRIVALS_PER_EPOCH = 1
MAX_TOTAL_DEVS = 3


def check_caps(profile: ScenarioProfile) -> None:
    if profile.n_dev_classes > MAX_DEV_CLASSES:
        raise InstanceTooLargeError(
            f"oracle capped at {MAX_DEV_CLASSES} developer classes"
        )
    if profile.n_bug_types > MAX_BUG_TYPES:
        raise InstanceTooLargeError(f"oracle capped at {MAX_BUG_TYPES} bug types")
    if profile.horizon > MAX_HORIZON:
        raise InstanceTooLargeError(f"oracle capped at horizon {MAX_HORIZON}")
    if profile.deadline_cap > MAX_DEADLINE_CAP:
        raise InstanceTooLargeError(
            f"oracle capped at deadline cap {MAX_DEADLINE_CAP}"
        )
    if profile.total_devs > MAX_TOTAL_DEVS:
        raise InstanceTooLargeError(f"oracle capped at {MAX_TOTAL_DEVS} developers")
    if profile.rejection_prob != 0.0:
        raise InstanceTooLargeError("oracle requires rejection_prob = 0")
    if profile.schedule_process.change_prob != 0.0:
        raise InstanceTooLargeError("oracle requires schedule change_prob = 0")
    for vec, _ in arrival_distribution(profile):
        if sum(vec) > MAX_ARRIVALS_PER_EPOCH:
            raise InstanceTooLargeError(
                f"oracle capped at {MAX_ARRIVALS_PER_EPOCH} arrival per epoch"
            )


def arrival_distribution(profile: ScenarioProfile):
    """The exact support of the per-epoch arrival vector with probabilities."""
    ap = profile.arrival_process
    if ap.kind == "joint_histogram":
        return [(tuple(vec), p) for vec, p in zip(ap.support, ap.probs) if p > 0]
    if ap.kind == "histogram":
        supports = []
        for hist in ap.per_type:
            supports.append([(c, p) for c, p in hist if p > 0])
        out = []
        for combo in itertools.product(*supports):
            vec = tuple(c for c, _ in combo)
            prob = 1.0
            for _, p in combo:
                prob *= p
            out.append((vec, prob))
        return out
    raise InstanceTooLargeError(
        "oracle requires a histogram arrival process (finite support)"
    )


def initial_dev_counts(profile: ScenarioProfile) -> dict[DevAttr, int]:
    devs: dict[DevAttr, int] = {}
    for exp_id, cls in enumerate(profile.dev_classes):
        for sch, n in cls.schedule_or_default():
            if n > 0:
                attr = DevAttr(exp_id, sch)
                devs[attr] = devs.get(attr, 0) + n
    return devs


@dataclass
class OracleSolution:
    """Exact state values and optimal plans, evaluated lazily and memoized.

    ``expected_value`` is the optimum averaged over the initial arrival draw;
    ``value``/``plan_for`` work for any state within the caps, reachable or
    not.
    """

    profile: ScenarioProfile
    expected_value: float

    def __post_init__(self):
        self._values: dict[tuple, float] = {}
        self._plans: dict[tuple, DecisionPlan] = {}
        self._arrivals = arrival_distribution(self.profile)

    def value(self, t: int, state: SystemState) -> float:
        key = (t, state.key())
        if key not in self._values:
            self._solve(t, state)
        return self._values[key]

    def plan_for(self, state: SystemState) -> DecisionPlan:
        key = (state.epoch, state.key())
        if key not in self._plans:
            self._solve(state.epoch, state)
        return self._plans[key]

    def decide(self, state: SystemState):
        """Policy-callable form, interchangeable with the other policies."""
        return self.plan_for(state), None

    @property
    def n_states(self) -> int:
        return len(self._values)

    def _solve(self, t: int, state: SystemState) -> float:
        profile = self.profile
        gamma = profile.discount
        T = profile.horizon
        key = (t, state.key())
        if key in self._values:
            return self._values[key]
        best_value = None
        best_plan = None
        for plan in enumerate_plans(state):
            immediate = decision_cost(state, plan, profile)
            post = state_post(state, plan, profile)
            if t == T:
                future = sum(
                    postponement_cost(b.due, profile) * n
                    for b, n in sorted(post.bug_counts.items())
                )
            else:
                future = 0.0
                for vec, prob in self._arrivals:
                    draw = ExogenousDraw(
                        new_bugs={i: n for i, n in enumerate(vec) if n}
                    )
                    nxt = state_next(post, draw, t, profile)
                    future += prob * self._solve(t + 1, nxt)
            total = immediate + gamma * future
            if best_value is None or total < best_value - 1e-12:
                best_value = total
                best_plan = plan
        self._values[key] = best_value
        self._plans[key] = best_plan
        return best_value


def solve_exact(profile: ScenarioProfile) -> OracleSolution:
    """Exact optimum of the tiny MDP; errors beyond the hard caps."""
    profile.validate()
    check_caps(profile)
    solution = OracleSolution(profile=profile, expected_value=0.0)
    devs = initial_dev_counts(profile)
    due0 = initial_due(1, profile)
    expected = 0.0
    for vec, prob in arrival_distribution(profile):
        bugs = {BugAttr(i, due0): n for i, n in enumerate(vec) if n}
        s1 = SystemState(epoch=1, bug_counts=bugs, dev_counts=devs)
        expected += prob * solution.value(1, s1)
    solution.expected_value = expected
    return solution


def exact_policy_value(profile: ScenarioProfile, decide) -> float:
    """Exact expected discounted cost of an arbitrary policy under the same
    enumerated dynamics; used to certify oracle optimality against baselines."""
    profile.validate()
    check_caps(profile)
    arrivals = arrival_distribution(profile)
    T = profile.horizon
    gamma = profile.discount
    cache: dict[tuple, float] = {}

    def W(t: int, state: SystemState) -> float:
        key = (t, state.key())
        if key in cache:
            return cache[key]
        plan, _ = decide(state)
        immediate = decision_cost(state, plan, profile)
        post = state_post(state, plan, profile)
        if t == T:
            future = sum(
                postponement_cost(b.due, profile) * n
                for b, n in sorted(post.bug_counts.items())
            )
        else:
            future = 0.0
            for vec, prob in arrivals:
                draw = ExogenousDraw(new_bugs={i: n for i, n in enumerate(vec) if n})
                future += prob * W(t + 1, state_next(post, draw, t, profile))
        cache[key] = immediate + gamma * future
        return cache[key]

    due0 = initial_due(1, profile)
    devs = initial_dev_counts(profile)
    expected = 0.0
    for vec, prob in arrivals:
        bugs = {BugAttr(i, due0): n for i, n in enumerate(vec) if n}
        expected += prob * W(1, SystemState(1, bugs, devs))
    return expected
