import numpy as np
import pytest

from triagelab.domain import (
    ArrivalProcess,
    BugAttr,
    DecisionPlan,
    DevAttr,
    DevClass,
    ExogenousDraw,
    PlanInfeasibleError,
    SystemState,
)
from triagelab.environment import (
    Environment,
    EpisodeLog,
    episode_discounted_cost,
    state_next,
    state_post,
)
from triagelab.policies import make_policy

from conftest import make_profile


def plan_all_postpone(state):
    return DecisionPlan(
        assign={},
        postpone=dict(state.open_bugs()),
        idle=dict(state.available_devs()),
    )


class TestStatePost:
    def test_postponed_bug_moves_one_epoch_closer(self, profile):
        bug = BugAttr(0, 3)
        state = SystemState(1, {bug: 1}, {})
        plan = DecisionPlan(assign={}, postpone={bug: 1}, idle={})
        post = state_post(state, plan, profile)
        assert post.bug_counts == {BugAttr(0, 2): 1}

    def test_due_clamped_at_floor(self):
        profile = make_profile(deadline_cap=2, due_floor=-1)
        bug = BugAttr(0, -1)
        state = SystemState(1, {bug: 2}, {})
        plan = DecisionPlan(assign={}, postpone={bug: 2}, idle={})
        post = state_post(state, plan, profile)
        assert post.bug_counts == {BugAttr(0, -1): 2}

    def test_returning_devs_become_available(self, profile):
        state = SystemState(1, {}, {DevAttr(0, 1): 2})
        plan = DecisionPlan(assign={}, postpone={}, idle={})
        post = state_post(state, plan, profile)
        assert post.dev_counts == {DevAttr(0, 0): 2}

    def test_assigned_dev_busy_for_rounded_fix_time(self):
        profile = make_profile(
            dev_classes=(DevClass(cost=(4.0, 4.0), count=1),)
        )
        bug, dev = BugAttr(0, 2), DevAttr(0, 0)
        state = SystemState(1, {bug: 1}, {dev: 1})
        plan = DecisionPlan(assign={(dev, bug): 1}, postpone={}, idle={})
        post = state_post(state, plan, profile)
        assert post.dev_counts == {DevAttr(0, 4): 1}
        assert post.bug_counts == {}

    def test_infeasible_plan_rejected(self, profile):
        state = SystemState(1, {BugAttr(0, 1): 1}, {})
        plan = DecisionPlan(assign={}, postpone={}, idle={})
        with pytest.raises(PlanInfeasibleError):
            state_post(state, plan, profile)


class TestStateNext:
    def test_identity_without_exogenous_events(self, profile):
        bug = BugAttr(1, 2)
        state = SystemState(3, {BugAttr(1, 3): 1}, {DevAttr(0, 2): 1})
        plan = plan_all_postpone(state)
        post = state_post(state, plan, profile)
        nxt = state_next(post, ExogenousDraw(new_bugs={}), 3, profile)
        assert nxt.epoch == 4
        assert nxt.bug_counts == {bug: 1}
        assert nxt.dev_counts == {DevAttr(0, 1): 1}

    def test_arrival_enters_with_initial_due(self):
        profile = make_profile(horizon=100, deadline_cap=7)
        post_state = state_post(
            SystemState(5, {}, {}), DecisionPlan({}, {}, {}), profile
        )
        nxt = state_next(post_state, ExogenousDraw(new_bugs={1: 1}), 5, profile)
        assert nxt.bug_counts == {BugAttr(1, 7): 1}

    def test_rejection_returns_bug_and_frees_dev(self):
        profile = make_profile(
            dev_classes=(DevClass(cost=(3.0, 3.0), count=1),), deadline_cap=5
        )
        bug, dev = BugAttr(0, 4), DevAttr(0, 0)
        state = SystemState(1, {bug: 1}, {dev: 1})
        plan = DecisionPlan(assign={(dev, bug): 1}, postpone={}, idle={})
        post = state_post(state, plan, profile)
        assert post.dev_counts == {DevAttr(0, 3): 1}
        draw = ExogenousDraw(new_bugs={}, rejections={(0, bug): 1})
        nxt = state_next(post, draw, 1, profile)
        assert nxt.bug_counts == {BugAttr(0, 3): 1}
        assert nxt.dev_counts == {DevAttr(0, 0): 1}

    def test_fig_transition_composition(self):
        # Three developers, two of them available; assign one bug, postpone
        # the other; one new bug arrives, the assignment is accepted and no
        # schedules change: next state has two available developers and two
        # open bugs.
        profile = make_profile(
            n_bug_types=2,
            dev_classes=(
                DevClass(cost=(2.0, 2.0), count=1),
                DevClass(cost=(3.0, 3.0), count=1),
                DevClass(cost=(4.0, 4.0), count=1),
            ),
            deadline_cap=3,
        )
        b1, b2 = BugAttr(0, 2), BugAttr(1, 1)
        d1, d2, d3 = DevAttr(0, 0), DevAttr(1, 0), DevAttr(2, 1)
        state = SystemState(1, {b1: 1, b2: 1}, {d1: 1, d2: 1, d3: 1})
        plan = DecisionPlan(assign={(d2, b2): 1}, postpone={b1: 1}, idle={d1: 1})
        post = state_post(state, plan, profile)
        assert post.dev_counts[DevAttr(2, 0)] == 1  # d3 returned
        assert post.dev_counts[DevAttr(1, 3)] == 1  # d2 busy for c epochs
        nxt = state_next(post, ExogenousDraw(new_bugs={0: 1}), 1, profile)
        available = {d: n for d, n in nxt.dev_counts.items() if d.sch == 0}
        assert sum(available.values()) == 2
        assert nxt.total_bugs == 2
        assert nxt.bug_counts[BugAttr(0, 1)] == 1  # b1 postponed, due reduced
        assert nxt.bug_counts[BugAttr(0, 3)] == 1  # the new arrival


class TestSampling:
    def test_zero_epsilon_never_rejects(self, profile):
        env = Environment(profile, seed=1, epsilon=0.0)
        bug, dev = BugAttr(0, 2), DevAttr(0, 0)
        state = SystemState(1, {bug: 1}, {dev: 1})
        plan = DecisionPlan(assign={(dev, bug): 1}, postpone={}, idle={})
        post = state_post(state, plan, profile)
        for _ in range(50):
            draw = env.sample_exogenous(post, plan)
            assert not draw.rejections

    def test_deterministic_arrivals(self):
        profile = make_profile(
            n_bug_types=1,
            dev_classes=(DevClass(cost=(2.0,), count=1),),
            arrival_process=ArrivalProcess(kind="histogram", per_type=(((1, 1.0),),)),
        )
        env = Environment(profile, seed=3)
        for _ in range(20):
            assert env.sample_arrivals() == {0: 1}

    def test_histogram_mean_matches_law_of_large_numbers(self):
        profile = make_profile(
            n_bug_types=1,
            dev_classes=(DevClass(cost=(2.0,), count=1),),
            arrival_process=ArrivalProcess(
                kind="histogram", per_type=(((0, 0.5), (2, 0.5)),)
            ),
        )
        env = Environment(profile, seed=10)
        total = sum(env.sample_arrivals().get(0, 0) for _ in range(100_000))
        assert total / 100_000 == pytest.approx(1.0, abs=0.02)

    def test_schedule_changes_preserve_headcount(self):
        profile = make_profile(
            schedule_process=make_profile().schedule_process.__class__(
                change_prob=0.4, absence_mean=2.0
            )
        )
        env = Environment(profile, seed=11)
        policy = make_policy("random", profile, seed=2)
        log = env.run_episode(policy, epochs=8)
        for rec in log.records:
            assert rec.state.total_devs == profile.total_devs


class TestEpisodes:
    def test_determinism_under_fixed_seed(self, profile):
        policy = make_policy("myopic", profile)
        log_a = Environment(profile, seed=7, episode_key=4).run_episode(policy, 8)
        log_b = Environment(profile, seed=7, episode_key=4).run_episode(policy, 8)
        assert log_a.to_jsonl() == log_b.to_jsonl()

    def test_bug_conservation_each_epoch(self):
        profile = make_profile(rejection_prob=0.5)
        env = Environment(profile, seed=13)
        policy = make_policy("random", profile, seed=5)
        log = env.run_episode(policy, epochs=9)
        for rec, nxt in zip(log.records, log.records[1:]):
            postponed = sum(rec.plan.postpone.values())
            rejected = sum(rec.draw.rejections.values())
            arrived = rec.draw.total_arrivals
            assert nxt.state.total_bugs == postponed + rejected + arrived

    def test_jsonl_round_trip(self, profile):
        env = Environment(profile, seed=21)
        policy = make_policy("myopic", profile)
        log = env.run_episode(policy, epochs=6)
        back = EpisodeLog.from_jsonl(log.to_jsonl())
        assert back.to_jsonl() == log.to_jsonl()
        assert back.terminal_cost == log.terminal_cost

    def test_discounted_cost_matches_manual_sum(self, profile):
        env = Environment(profile, seed=2)
        policy = make_policy("myopic", profile)
        log = env.run_episode(policy, epochs=6)
        expected = sum(
            0.9 ** (rec.epoch - 1) * rec.cost for rec in log.records
        ) + 0.9 ** 6 * log.terminal_cost
        assert episode_discounted_cost(log, 0.9) == pytest.approx(expected)
