import math

import pytest

from triagelab.domain import (
    BugAttr,
    DecisionPlan,
    DevAttr,
    PlanInfeasibleError,
    ProfileError,
    SystemState,
    decision_cost,
    initial_due,
    postponement_cost,
)

from conftest import make_profile


class TestPostponementCost:
    def test_linear_at_deadline_is_one(self):
        profile = make_profile(horizon=100)
        assert postponement_cost(0, profile) == 1.0

    def test_linear_halfway(self):
        profile = make_profile(horizon=100, deadline_cap=60)
        assert postponement_cost(50, profile) == pytest.approx(0.5)

    def test_linear_overdue(self):
        profile = make_profile(horizon=100)
        assert postponement_cost(-10, profile) == pytest.approx(1.1)

    def test_exponential_at_deadline_is_one(self):
        profile = make_profile(postponement_cost_kind="exponential")
        assert postponement_cost(0, profile) == 1.0

    def test_exponential_overdue(self):
        profile = make_profile(postponement_cost_kind="exponential")
        assert postponement_cost(-1, profile) == pytest.approx(1.0 / 0.9)

    @pytest.mark.parametrize("kind", ["linear", "exponential"])
    def test_strictly_decreasing_in_due(self, kind):
        profile = make_profile(postponement_cost_kind=kind, deadline_cap=8,
                               due_floor=-8, horizon=20)
        values = [postponement_cost(d, profile) for d in profile.due_range()]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestInitialDue:
    def test_capped_by_deadline(self):
        assert initial_due(3, make_profile(horizon=10, deadline_cap=5)) == 5

    def test_capped_by_horizon(self):
        assert initial_due(9, make_profile(horizon=10, deadline_cap=5)) == 0

    def test_long_horizon(self):
        assert initial_due(1, make_profile(horizon=100, deadline_cap=7)) == 7

    def test_never_negative_and_never_above_cap(self):
        profile = make_profile(horizon=12, deadline_cap=4)
        for t in range(1, profile.horizon + 1):
            due = initial_due(t, profile)
            assert 0 <= due <= profile.deadline_cap
            assert due <= max(0, profile.horizon - t - 1)


class TestDecisionCost:
    def test_empty(self):
        profile = make_profile()
        state = SystemState(epoch=1, bug_counts={}, dev_counts={})
        plan = DecisionPlan(assign={}, postpone={}, idle={})
        assert decision_cost(state, plan, profile) == 0.0

    def test_single_assignment(self):
        profile = make_profile(
            dev_classes=(make_profile().dev_classes[0].__class__(cost=(3.0, 3.0), count=1),)
        )
        bug = BugAttr(0, 0)
        dev = DevAttr(0, 0)
        state = SystemState(epoch=1, bug_counts={bug: 1}, dev_counts={dev: 1})
        plan = DecisionPlan(assign={(dev, bug): 1}, postpone={}, idle={})
        assert decision_cost(state, plan, profile) == pytest.approx(3.0)

    def test_single_postponement_at_deadline(self):
        profile = make_profile(horizon=10)
        bug = BugAttr(0, 0)
        state = SystemState(epoch=1, bug_counts={bug: 1}, dev_counts={})
        plan = DecisionPlan(assign={}, postpone={bug: 1}, idle={})
        assert decision_cost(state, plan, profile) == pytest.approx(1.0)

    def test_additive_over_disjoint_counts(self, rng):
        profile = make_profile()
        b0, b1 = BugAttr(0, 2), BugAttr(1, 1)
        d0, d1 = DevAttr(0, 0), DevAttr(1, 0)
        s1 = SystemState(1, {b0: 1}, {d0: 1})
        p1 = DecisionPlan(assign={(d0, b0): 1}, postpone={}, idle={})
        s2 = SystemState(1, {b1: 2}, {d1: 1})
        p2 = DecisionPlan(assign={(d1, b1): 1}, postpone={b1: 1}, idle={})
        merged_state = SystemState(1, {b0: 1, b1: 2}, {d0: 1, d1: 1})
        merged_plan = DecisionPlan(
            assign={(d0, b0): 1, (d1, b1): 1}, postpone={b1: 1}, idle={}
        )
        assert decision_cost(merged_state, merged_plan, profile) == pytest.approx(
            decision_cost(s1, p1, profile) + decision_cost(s2, p2, profile)
        )

    def test_infeasible_plan_raises(self):
        profile = make_profile()
        bug = BugAttr(0, 1)
        state = SystemState(epoch=1, bug_counts={bug: 1}, dev_counts={})
        plan = DecisionPlan(assign={}, postpone={}, idle={})
        with pytest.raises(PlanInfeasibleError):
            decision_cost(state, plan, profile)


class TestPlanValidation:
    def test_idle_must_cover_available_devs(self):
        state = SystemState(1, {}, {DevAttr(0, 0): 2})
        plan = DecisionPlan(assign={}, postpone={}, idle={DevAttr(0, 0): 1})
        with pytest.raises(PlanInfeasibleError):
            plan.validate_for(state)

    def test_busy_devs_cannot_be_assigned(self):
        bug = BugAttr(0, 1)
        state = SystemState(1, {bug: 1}, {DevAttr(0, 1): 1})
        plan = DecisionPlan(assign={(DevAttr(0, 1), bug): 1}, postpone={}, idle={})
        with pytest.raises(PlanInfeasibleError):
            plan.validate_for(state)

    def test_non_integer_counts_rejected(self):
        bug = BugAttr(0, 1)
        state = SystemState(1, {bug: 1}, {})
        plan = DecisionPlan(assign={}, postpone={bug: 1.0}, idle={})
        with pytest.raises(PlanInfeasibleError):
            plan.validate_for(state)


class TestProfileValidation:
    def test_nonpositive_cost_rejected(self):
        with pytest.raises(ProfileError, match=r"dev_classes\[0\].cost\[1\]"):
            make_profile(
                dev_classes=(
                    make_profile().dev_classes[0].__class__(cost=(2.0, 0.0), count=1),
                )
            )

    def test_discount_open_interval(self):
        with pytest.raises(ProfileError, match="discount"):
            make_profile(discount=1.0)

    def test_due_floor_default_is_minus_cap(self):
        profile = make_profile(deadline_cap=4)
        assert profile.due_floor == -4

    def test_busy_epochs_rounds_half_up_with_floor_one(self):
        profile = make_profile(
            dev_classes=(
                make_profile().dev_classes[0].__class__(cost=(0.2, 2.5), count=1),
            )
        )
        assert profile.busy_epochs(0, 0) == 1
        assert profile.busy_epochs(0, 1) == 3
