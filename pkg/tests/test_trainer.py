import pytest

from triagelab.domain import ArrivalProcess, DevClass
from triagelab.environment import Environment, episode_discounted_cost
from triagelab.policies import adp_decide
from triagelab.trainer import TrainConfig, evaluate, train
from triagelab.value_store import ValueStore

from conftest import make_profile


def deterministic_profile(**overrides):
    defaults = dict(
        n_bug_types=2,
        dev_classes=(
            DevClass(cost=(2.0, 5.0), count=1),
            DevClass(cost=(6.0, 3.0), count=1),
        ),
        horizon=6,
        deadline_cap=2,
        arrival_process=ArrivalProcess(
            kind="joint_histogram", support=((1, 0),), probs=(1.0,)
        ),
        rejection_prob=0.0,
    )
    defaults.update(overrides)
    return make_profile(**defaults)


class TestTrainMechanics:
    def test_first_iteration_plans_match_frozen_store_replay(self, profile):
        config = TrainConfig(
            iterations=1,
            eval_every=1,
            eval_epochs=4,
            eval_replications=2,
            stepsize="constant",
            init_mode="zeros",
            epsilon=0.0,
            seed=42,
        )
        report = train(profile, config)
        frozen = ValueStore.init(report.profile, "zeros")
        frozen.set_terminal_values(report.profile)
        env = Environment(report.profile, seed=42, episode_key=1)
        state = env.initial_state()
        from triagelab.environment import EpisodeLog

        log = EpisodeLog()
        for rec in report.first_episode.records:
            plan, _ = adp_decide(state, frozen, report.profile)
            assert plan == rec.plan
            assert state == rec.state
            state = env.step(
                log, state, plan,
                final_epoch=(rec.epoch == report.profile.horizon),
            )

    def test_alpha_one_leaves_cells_at_last_duals(self):
        profile = deterministic_profile()
        seed = 5
        one = train(
            profile,
            TrainConfig(
                iterations=1, eval_every=10, eval_epochs=2,
                eval_replications=1, stepsize="constant",
                stepsize_params={"value": 1.0}, seed=seed,
            ),
        )
        two = train(
            profile,
            TrainConfig(
                iterations=2, eval_every=10, eval_epochs=2,
                eval_replications=1, stepsize="constant",
                stepsize_params={"value": 1.0}, seed=seed,
            ),
        )
        # Replay iteration 2 against the frozen end-of-iteration-1 store:
        # the duals it collects must be exactly what the N=2 store holds.
        env = Environment(two.profile, seed=seed, episode_key=2)
        state = env.initial_state()
        seen = []
        from triagelab.environment import EpisodeLog

        log = EpisodeLog()
        for t in range(1, two.profile.horizon + 1):
            plan, result = adp_decide(state, one.store, two.profile)
            for d, dual in result.dev_duals.items():
                seen.append(("dev", t - 1, d.exp_id, dual))
            for b, dual in result.bug_duals.items():
                seen.append(("bug", t - 1, b.type_id, b.due, dual))
            state = env.step(log, state, plan, final_epoch=(t == two.profile.horizon))
        assert seen, "episode should observe at least one dual"
        for item in seen:
            if item[0] == "dev":
                _, t, exp_id, dual = item
                assert two.store.dev_value(t, exp_id) == pytest.approx(dual, abs=1e-12)
            else:
                _, t, type_id, due, dual = item
                assert two.store.bug_value(t, type_id, due) == pytest.approx(
                    dual, abs=1e-12
                )

    def test_zero_alpha_freezes_values_and_costs(self):
        profile = deterministic_profile()
        config = TrainConfig(
            iterations=5, eval_every=100, eval_epochs=2, eval_replications=1,
            stepsize="constant", stepsize_params={"value": 0.0}, seed=3,
        )
        report = train(profile, config)
        init = ValueStore.init(report.profile, config.init_mode)
        init.set_terminal_values(report.profile)
        assert (report.store.bug_values == init.bug_values).all()
        assert (report.store.dev_values == init.dev_values).all()
        assert len(set(round(c, 12) for c in report.realized_costs)) == 1

    def test_realized_cost_consistent_with_episode_log(self, profile):
        config = TrainConfig(
            iterations=1, eval_every=10, eval_epochs=2, eval_replications=1,
            stepsize="harmonic", seed=11, epsilon=0.3,
        )
        report = train(profile, config)
        recomputed = episode_discounted_cost(
            report.first_episode, report.profile.discount
        )
        assert report.realized_costs[0] == pytest.approx(recomputed)

    def test_eval_points_at_expected_iterations(self, profile):
        config = TrainConfig(
            iterations=7, eval_every=3, eval_epochs=2, eval_replications=2,
            stepsize="constant", seed=1,
        )
        report = train(profile, config)
        assert [pt.iteration for pt in report.eval_series] == [0, 3, 6, 7]

    def test_value_traces_cover_all_iterations(self, profile):
        config = TrainConfig(
            iterations=4, eval_every=10, eval_epochs=2, eval_replications=1,
            stepsize="bakf", seed=2,
        )
        report = train(profile, config)
        for series in report.value_traces.values():
            assert len(series) == 4


class TestEvaluate:
    def test_empty_arrivals_cost_zero(self):
        profile = deterministic_profile(
            arrival_process=ArrivalProcess(
                kind="joint_histogram", support=((0, 0),), probs=(1.0,)
            )
        )
        result = evaluate(profile, "myopic", epochs=5, replications=3, seed=0)
        assert result.samples == [0.0, 0.0, 0.0]

    def test_same_seed_same_samples(self, profile):
        a = evaluate(profile, "myopic", epochs=6, replications=5, seed=9)
        b = evaluate(profile, "myopic", epochs=6, replications=5, seed=9)
        assert a.samples == b.samples

    def test_store_policy_runs(self, profile):
        store = ValueStore.init(profile, "postponement-penalty")
        result = evaluate(profile, store, epochs=4, replications=2, seed=5)
        assert len(result.samples) == 2
        assert all(s >= 0 for s in result.samples)

    def test_run_dir_layout(self, tmp_path, profile):
        config = TrainConfig(
            iterations=2, eval_every=1, eval_epochs=2, eval_replications=2,
            stepsize="constant", seed=1,
        )
        report = train(profile, config)
        run_dir = tmp_path / "run"
        report.save(run_dir)
        for name in (
            "profile.json",
            "config.json",
            "training_metrics.csv",
            "value_trace.csv",
            "value_store.json",
            "episodes.jsonl",
            "samples.csv",
        ):
            assert (run_dir / name).exists(), name
