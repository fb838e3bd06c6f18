"""Forward-pass training of the assignment policy and frozen-policy
evaluation.

Each training iteration walks one sampled episode: solve the priced LP at
every epoch, harvest the dual prices of the developer and bug constraints,
and blend them into the previous epoch's value cells with the configured
step-size rule.  Every ``eval_every`` iterations the store is frozen and a
batch of independent inner simulations measures the policy the values
currently induce; that series is the convergence diagnostic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import scenario
from .domain import ScenarioProfile
from .environment import Environment, EpisodeLog, episode_discounted_cost
from .policies import adp_decide, make_policy
from .stepsize import StepsizeManager
from .value_store import ValueStore

# Probe cells whose value estimates are traced every iteration:
# ("bug", t, type_id, due) or ("dev", t, exp_id).
Probe = tuple


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 20_000
    eval_every: int = 100
    eval_epochs: int = 30
    eval_replications: int = 30
    stepsize: str = "bakf"
    stepsize_params: dict = field(default_factory=dict)
    epsilon: float | None = None  # None: the profile's rejection probability
    gamma: float | None = None  # None: the profile's discount
    init_mode: str = "postponement-penalty"
    seed: int = 0
    eval_seed: int = 10_000_019
    eval_epsilon: float = 0.0
    probes: tuple[Probe, ...] = ()

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 1 <= self.eval_every:
            raise ValueError("eval_every must be >= 1")
        if self.eval_epochs < 1:
            raise ValueError("eval_epochs must be >= 1")


@dataclass
class EvalPoint:
    iteration: int
    mean: float
    stderr: float


@dataclass
class EvalResult:
    samples: list[float]
    logs: list[EpisodeLog]

    @property
    def mean(self) -> float:
        return sum(self.samples) / len(self.samples)

    @property
    def stderr(self) -> float:
        n = len(self.samples)
        if n < 2:
            return 0.0
        mu = self.mean
        var = sum((x - mu) ** 2 for x in self.samples) / (n - 1)
        return math.sqrt(var / n)


@dataclass
class TrainReport:
    profile: ScenarioProfile
    config: TrainConfig
    realized_costs: list[float]
    eval_series: list[EvalPoint]
    value_traces: dict[str, list[float]]
    store: ValueStore
    final_eval: EvalResult | None = None
    first_episode: EpisodeLog | None = None

    def save(self, run_dir) -> None:
        """Run-directory layout: profile copy, config snapshot, metrics CSVs,
        the trained store, and the final inner simulation's episodes."""
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        scenario.save(self.profile, run_dir / "profile.json")
        cfg = {**self.config.__dict__, "probes": [list(p) for p in self.config.probes]}
        (run_dir / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
        self.store.save(run_dir / "value_store.json")
        eval_by_iter = {pt.iteration: pt for pt in self.eval_series}
        with open(run_dir / "training_metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "realized_cost", "eval_mean", "eval_stderr"])
            if 0 in eval_by_iter:
                pt = eval_by_iter[0]
                writer.writerow([0, "", f"{pt.mean:.6f}", f"{pt.stderr:.6f}"])
            for i, cost in enumerate(self.realized_costs, start=1):
                pt = eval_by_iter.get(i)
                writer.writerow(
                    [
                        i,
                        f"{cost:.6f}",
                        f"{pt.mean:.6f}" if pt else "",
                        f"{pt.stderr:.6f}" if pt else "",
                    ]
                )
        with open(run_dir / "value_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            names = list(self.value_traces)
            writer.writerow(["iteration"] + names)
            for i in range(len(self.realized_costs)):
                writer.writerow(
                    [i + 1] + [f"{self.value_traces[k][i]:.6f}" for k in names]
                )
        if self.final_eval is not None:
            with open(run_dir / "episodes.jsonl", "w") as fh:
                for log in self.final_eval.logs:
                    fh.write(log.to_jsonl())
            with open(run_dir / "samples.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["replication", "discounted_cost"])
                for r, x in enumerate(self.final_eval.samples):
                    writer.writerow([r, f"{x:.6f}"])


def probe_name(probe: Probe) -> str:
    if probe[0] == "bug":
        return f"bug_t{probe[1]}_type{probe[2]}_due{probe[3]}"
    return f"dev_t{probe[1]}_exp{probe[2]}"


def default_probes(profile: ScenarioProfile) -> tuple[Probe, ...]:
    """The most frequently updated cells: epoch-0 values of a fresh arrival
    and of the first developer class."""
    from .domain import initial_due

    return (
        ("bug", 0, 0, initial_due(1, profile)),
        ("dev", 0, 0),
    )


def read_probe(store: ValueStore, probe: Probe) -> float:
    if probe[0] == "bug":
        return store.bug_value(probe[1], probe[2], probe[3])
    return store.dev_value(probe[1], probe[2])


def effective_profile(profile: ScenarioProfile, config: TrainConfig) -> ScenarioProfile:
    changes = {}
    if config.gamma is not None:
        changes["discount"] = config.gamma
    if config.epsilon is not None:
        changes["rejection_prob"] = config.epsilon
    return replace(profile, **changes) if changes else profile


def train(profile: ScenarioProfile, config: TrainConfig) -> TrainReport:
    """Run the forward-pass learning loop; see the module docstring."""
    config.validate()
    profile = effective_profile(profile, config)
    profile.validate()
    gamma = profile.discount
    T = profile.horizon
    store = ValueStore.init(profile, config.init_mode)
    if config.init_mode != "big-m":
        # The end-of-horizon value is known exactly; pinning it keeps the
        # last epoch's pricing honest from iteration one.  big-m init stays
        # untouched so the first iteration is myopic plan-for-plan.
        store.set_terminal_values(profile)
    stepper = StepsizeManager(config.stepsize, **config.stepsize_params)
    probes = config.probes or default_probes(profile)
    traces: dict[str, list[float]] = {probe_name(p): [] for p in probes}
    realized: list[float] = []
    eval_series: list[EvalPoint] = []

    def run_eval() -> EvalResult:
        return evaluate(
            profile,
            store,
            epochs=config.eval_epochs,
            replications=config.eval_replications,
            seed=config.eval_seed,
            epsilon=config.eval_epsilon,
        )

    ev = run_eval()
    eval_series.append(EvalPoint(0, ev.mean, ev.stderr))

    last_eval = ev
    first_episode = None
    for n in range(1, config.iterations + 1):
        stepper.begin_iteration(n)
        env = Environment(profile, seed=config.seed, episode_key=n)
        state = env.initial_state()
        log = EpisodeLog()
        for t in range(1, T + 1):
            plan, result = adp_decide(state, store, profile)
            for d, dual in sorted(result.dev_duals.items()):
                old = store.dev_value(t - 1, d.exp_id)
                alpha = stepper.alpha(("dev", t - 1, d.exp_id), dual, old)
                store.set_dev_value(
                    t - 1, d.exp_id, (1 - alpha) * old + alpha * dual
                )
            for b, dual in sorted(result.bug_duals.items()):
                old = store.bug_value(t - 1, b.type_id, b.due)
                alpha = stepper.alpha(
                    ("bug", t - 1, b.type_id, b.due), dual, old
                )
                store.set_bug_value(
                    t - 1, b.type_id, b.due, (1 - alpha) * old + alpha * dual
                )
            state = env.step(log, state, plan, final_epoch=(t == T))
        env.close_episode(log, state)
        if n == 1:
            first_episode = log
        realized.append(episode_discounted_cost(log, gamma))
        for p in probes:
            traces[probe_name(p)].append(read_probe(store, p))
        if n % config.eval_every == 0 or n == config.iterations:
            last_eval = run_eval()
            eval_series.append(EvalPoint(n, last_eval.mean, last_eval.stderr))

    return TrainReport(
        profile=profile,
        config=config,
        realized_costs=realized,
        eval_series=eval_series,
        value_traces=traces,
        store=store,
        final_eval=last_eval,
        first_episode=first_episode,
    )


def evaluate(
    profile: ScenarioProfile,
    policy,
    epochs: int,
    replications: int,
    seed: int,
    epsilon: float = 0.0,
) -> EvalResult:
    """Frozen-policy evaluation: independent episodes, no learning.

    ``policy`` is a ValueStore (ADP with frozen values), a policy name
    ("myopic" / "random"), or any callable state -> (plan, aux).
    """
    if isinstance(policy, ValueStore):
        decide = make_policy("adp", profile, store=policy)
    elif isinstance(policy, str):
        decide = make_policy(policy, profile, seed=seed)
    else:
        decide = policy
    samples: list[float] = []
    logs: list[EpisodeLog] = []
    for rep in range(replications):
        env = Environment(profile, seed=seed, episode_key=rep, epsilon=epsilon)
        log = env.run_episode(decide, epochs)
        samples.append(episode_discounted_cost(log, profile.discount))
        logs.append(log)
    return EvalResult(samples=samples, logs=logs)
