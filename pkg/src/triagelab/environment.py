"""Stochastic world: the two-stage state transition and the exogenous draws.

The post-decision transform applies all deterministic bookkeeping of an
epoch: postponed bugs keep waiting with their deadline attribute reduced by
one, busy developers advance one epoch toward availability, and newly
assigned developers become busy for the rounded fixing time.  The second
stage injects exogenous information: bug arrivals, last-minute schedule
changes, and assignment rejections (which return the bug to the pool and
free the developer).

Randomness is split into named streams (arrivals / schedules / rejections)
derived from one seed, so e.g. changing the rejection probability never
perturbs the arrival sample path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import (
    BugAttr,
    DecisionPlan,
    DevAttr,
    ExogenousDraw,
    ScenarioProfile,
    SystemState,
    clamp_due,
    decision_cost,
    initial_due,
    postponement_cost,
)

_STREAM_ARRIVALS = 0
_STREAM_SCHEDULES = 1
_STREAM_REJECTIONS = 2


@dataclass(frozen=True)
class PostDecisionState:
    bug_counts: dict[BugAttr, int]
    dev_counts: dict[DevAttr, int]


@dataclass(frozen=True)
class AssignmentRecord:
    """One developer-bug pairing: what was matched and whether it stuck."""

    bug_type: int
    due_at_assignment: int
    exp_id: int
    fix_cost: float
    accepted: bool


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    state: SystemState
    plan: DecisionPlan
    draw: ExogenousDraw
    cost: float
    assignments: tuple[AssignmentRecord, ...]


@dataclass
class EpisodeLog:
    """Per-epoch records plus the end-of-horizon penalty for bugs left open."""

    records: list[EpochRecord] = field(default_factory=list)
    terminal_cost: float = 0.0

    @property
    def epochs(self) -> int:
        return len(self.records)

    def append(self, record: EpochRecord) -> None:
        if record.epoch != len(self.records) + 1:
            raise ValueError(
                f"records must arrive in epoch order, got {record.epoch}"
            )
        self.records.append(record)

    def accepted_assignments(self):
        for rec in self.records:
            for a in rec.assignments:
                if a.accepted:
                    yield a

    def to_jsonl(self) -> str:
        lines = []
        for rec in self.records:
            lines.append(json.dumps(_record_to_doc(rec)))
        lines.append(json.dumps({"terminal_cost": self.terminal_cost}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "EpisodeLog":
        log = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            if "terminal_cost" in doc and "epoch" not in doc:
                log.terminal_cost = doc["terminal_cost"]
            else:
                log.append(_record_from_doc(doc))
        return log


def _record_to_doc(rec: EpochRecord) -> dict:
    return {
        "epoch": rec.epoch,
        "state": {
            "bugs": [[b.type_id, b.due, n] for b, n in sorted(rec.state.bug_counts.items()) if n],
            "devs": [[d.exp_id, d.sch, n] for d, n in sorted(rec.state.dev_counts.items()) if n],
        },
        "plan": {
            "assign": [
                [d.exp_id, b.type_id, b.due, y]
                for (d, b), y in sorted(rec.plan.assign.items())
            ],
            "postpone": [[b.type_id, b.due, p] for b, p in sorted(rec.plan.postpone.items())],
            "idle": [[d.exp_id, h] for d, h in sorted(rec.plan.idle.items())],
        },
        "draw": {
            "new_bugs": [[t, n] for t, n in sorted(rec.draw.new_bugs.items()) if n],
            "sch_changes": [list(ev) for ev in rec.draw.sch_changes],
            "rejections": [
                [e, b.type_id, b.due, n]
                for (e, b), n in sorted(rec.draw.rejections.items())
            ],
        },
        "cost": rec.cost,
        "assignments": [
            [a.bug_type, a.due_at_assignment, a.exp_id, a.fix_cost, a.accepted]
            for a in rec.assignments
        ],
    }


def _record_from_doc(doc: dict) -> EpochRecord:
    state = SystemState(
        epoch=doc["epoch"],
        bug_counts={BugAttr(t, d): n for t, d, n in doc["state"]["bugs"]},
        dev_counts={DevAttr(e, s): n for e, s, n in doc["state"]["devs"]},
    )
    plan = DecisionPlan(
        assign={
            (DevAttr(e, 0), BugAttr(t, d)): y
            for e, t, d, y in doc["plan"]["assign"]
        },
        postpone={BugAttr(t, d): p for t, d, p in doc["plan"]["postpone"]},
        idle={DevAttr(e, 0): h for e, h in doc["plan"]["idle"]},
    )
    draw = ExogenousDraw(
        new_bugs={t: n for t, n in doc["draw"]["new_bugs"]},
        sch_changes=tuple(tuple(ev) for ev in doc["draw"]["sch_changes"]),
        rejections={
            (e, BugAttr(t, d)): n for e, t, d, n in doc["draw"]["rejections"]
        },
    )
    assignments = tuple(
        AssignmentRecord(t, d, e, c, bool(a))
        for t, d, e, c, a in doc["assignments"]
    )
    return EpochRecord(
        epoch=doc["epoch"],
        state=state,
        plan=plan,
        draw=draw,
        cost=doc["cost"],
        assignments=assignments,
    )


def state_post(
    state: SystemState, plan: DecisionPlan, profile: ScenarioProfile
) -> PostDecisionState:
    """Deterministic half of the transition; see module docstring."""
    plan.validate_for(state)
    bugs: dict[BugAttr, int] = {}
    for b, p in plan.postpone.items():
        if p > 0:
            succ = BugAttr(b.type_id, clamp_due(b.due - 1, profile))
            bugs[succ] = bugs.get(succ, 0) + p
    devs: dict[DevAttr, int] = {}

    def add_dev(attr: DevAttr, n: int) -> None:
        if n > 0:
            devs[attr] = devs.get(attr, 0) + n

    for d, n in state.dev_counts.items():
        if d.sch >= 1:
            add_dev(DevAttr(d.exp_id, d.sch - 1), n)
    for d, h in plan.idle.items():
        add_dev(d, h)
    for (d, b), y in plan.assign.items():
        busy = profile.busy_epochs(d.exp_id, b.type_id)
        add_dev(DevAttr(d.exp_id, busy), y)
    return PostDecisionState(bug_counts=bugs, dev_counts=devs)


def state_next(
    post: PostDecisionState,
    draw: ExogenousDraw,
    t: int,
    profile: ScenarioProfile,
) -> SystemState:
    """Fold the exogenous information into the post-decision state; the
    result is the system state at epoch t+1."""
    bugs = dict(post.bug_counts)
    devs = dict(post.dev_counts)
    due0 = initial_due(t + 1, profile)
    for type_id, n in draw.new_bugs.items():
        if n > 0:
            attr = BugAttr(type_id, due0)
            bugs[attr] = bugs.get(attr, 0) + n
    for exp_id, from_sch, to_sch, n in draw.sch_changes:
        src = DevAttr(exp_id, from_sch)
        dst = DevAttr(exp_id, to_sch)
        if devs.get(src, 0) < n:
            raise ValueError(f"schedule change {src} x{n} exceeds pool")
        devs[src] -= n
        if devs[src] == 0:
            del devs[src]
        devs[dst] = devs.get(dst, 0) + n
    for (exp_id, battr), n in draw.rejections.items():
        busy = profile.busy_epochs(exp_id, battr.type_id)
        src = DevAttr(exp_id, busy)
        if devs.get(src, 0) < n:
            raise ValueError(f"rejection return {src} x{n} exceeds pool")
        devs[src] -= n
        if devs[src] == 0:
            del devs[src]
        free = DevAttr(exp_id, 0)
        devs[free] = devs.get(free, 0) + n
        back = BugAttr(battr.type_id, clamp_due(battr.due - 1, profile))
        bugs[back] = bugs.get(back, 0) + n
    return SystemState(epoch=t + 1, bug_counts=bugs, dev_counts=devs)


class Environment:
    """Owns the RNG streams for one episode and walks it forward.

    Instances are single-threaded; concurrent evaluation uses one
    environment per replication with independent ``episode_key`` values.
    """

    def __init__(
        self,
        profile: ScenarioProfile,
        seed: int,
        episode_key: int = 0,
        epsilon: float | None = None,
    ):
        self.profile = profile
        self.epsilon = profile.rejection_prob if epsilon is None else epsilon
        self._rng_arrivals = self._stream(seed, episode_key, _STREAM_ARRIVALS)
        self._rng_schedules = self._stream(seed, episode_key, _STREAM_SCHEDULES)
        self._rng_rejections = self._stream(seed, episode_key, _STREAM_REJECTIONS)

    @staticmethod
    def _stream(seed: int, episode_key: int, stream: int):
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(episode_key, stream))
        return np.random.default_rng(seq)

    # -- sampling ----------------------------------------------------------

    def sample_arrivals(self) -> dict[int, int]:
        ap = self.profile.arrival_process
        rng = self._rng_arrivals
        counts: dict[int, int] = {}
        if ap.kind == "histogram":
            for type_id, hist in enumerate(ap.per_type):
                values = [c for c, _ in hist]
                probs = [p for _, p in hist]
                n = int(rng.choice(values, p=probs))
                if n:
                    counts[type_id] = n
        elif ap.kind == "poisson":
            for type_id, rate in enumerate(ap.rates):
                n = int(rng.poisson(rate)) if rate > 0 else 0
                if n:
                    counts[type_id] = n
        else:
            idx = int(rng.choice(len(ap.support), p=list(ap.probs)))
            for type_id, n in enumerate(ap.support[idx]):
                if n:
                    counts[type_id] = n
        return counts

    def sample_exogenous(
        self,
        post: PostDecisionState,
        plan: DecisionPlan,
        final_epoch: bool = False,
    ) -> ExogenousDraw:
        """Draw arrivals, schedule churn and per-assignment rejections.

        After the final decision epoch only rejections are sampled; arrivals
        and schedule changes past the horizon cannot influence anything.
        """
        new_bugs = {} if final_epoch else self.sample_arrivals()
        changes: list[tuple[int, int, int, int]] = []
        q = self.profile.schedule_process.change_prob
        if q > 0.0 and not final_epoch:
            rng = self._rng_schedules
            mean = self.profile.schedule_process.absence_mean
            # Developers paired this epoch churn through the rejection
            # channel only; schedule changes hit pre-existing schedules.
            eligible = dict(post.dev_counts)
            for (d, b), y in plan.assign.items():
                busy = self.profile.busy_epochs(d.exp_id, b.type_id)
                eligible[DevAttr(d.exp_id, busy)] -= y
            for d, n in sorted(eligible.items()):
                if n <= 0:
                    continue
                k = int(rng.binomial(n, q))
                if k == 0:
                    continue
                if d.sch == 0:
                    for _ in range(k):
                        dur = int(rng.geometric(1.0 / mean))
                        changes.append((d.exp_id, 0, dur, 1))
                else:
                    changes.append((d.exp_id, d.sch, 0, k))
        rejections: dict[tuple[int, BugAttr], int] = {}
        if self.epsilon > 0.0:
            rng = self._rng_rejections
            for (d, b), y in sorted(plan.assign.items()):
                k = int(rng.binomial(y, self.epsilon))
                if k > 0:
                    rejections[(d.exp_id, b)] = k
        return ExogenousDraw(
            new_bugs=new_bugs,
            sch_changes=tuple(changes),
            rejections=rejections,
        )

    # -- episode flow --------------------------------------------------------

    def initial_state(self) -> SystemState:
        """Episode start: all developers on their scripted schedules, the bug
        pool seeded with one arrival draw."""
        devs: dict[DevAttr, int] = {}
        for exp_id, cls in enumerate(self.profile.dev_classes):
            for sch, n in cls.schedule_or_default():
                if n > 0:
                    attr = DevAttr(exp_id, sch)
                    devs[attr] = devs.get(attr, 0) + n
        due0 = initial_due(1, self.profile)
        bugs = {
            BugAttr(type_id, due0): n
            for type_id, n in self.sample_arrivals().items()
        }
        return SystemState(epoch=1, bug_counts=bugs, dev_counts=devs)

    def run_episode(
        self,
        decide: Callable[[SystemState], tuple[DecisionPlan, object]],
        epochs: int,
    ) -> EpisodeLog:
        """Roll one episode under a policy; used by evaluation paths."""
        log = EpisodeLog()
        state = self.initial_state()
        for t in range(1, epochs + 1):
            plan, _ = decide(state)
            state = self.step(log, state, plan, final_epoch=(t == epochs))
        self.close_episode(log, state)
        return log

    def step(
        self,
        log: EpisodeLog,
        state: SystemState,
        plan: DecisionPlan,
        final_epoch: bool,
    ) -> SystemState:
        """Apply one epoch: cost, post-decision, draw, next state, record."""
        t = state.epoch
        cost = decision_cost(state, plan, self.profile)
        post = state_post(state, plan, self.profile)
        draw = self.sample_exogenous(post, plan, final_epoch=final_epoch)
        assignments = []
        for (d, b), y in sorted(plan.assign.items()):
            rejected = draw.rejections.get((d.exp_id, b), 0)
            fix = self.profile.cost(d.exp_id, b.type_id)
            for i in range(y):
                assignments.append(
                    AssignmentRecord(
                        bug_type=b.type_id,
                        due_at_assignment=b.due,
                        exp_id=d.exp_id,
                        fix_cost=fix,
                        accepted=i >= rejected,
                    )
                )
        log.append(
            EpochRecord(
                epoch=t,
                state=state,
                plan=plan,
                draw=draw,
                cost=cost,
                assignments=tuple(assignments),
            )
        )
        return state_next(post, draw, t, self.profile)

    def close_episode(self, log: EpisodeLog, final_state: SystemState) -> None:
        """Charge the end-of-horizon penalty for bugs still open."""
        log.terminal_cost = sum(
            postponement_cost(b.due, self.profile) * n
            for b, n in sorted(final_state.bug_counts.items())
        )


def episode_discounted_cost(log: EpisodeLog, gamma: float) -> float:
    """Discounted episode cost including the terminal penalty."""
    total = 0.0
    for rec in log.records:
        total += gamma ** (rec.epoch - 1) * rec.cost
    total += gamma ** log.epochs * log.terminal_cost
    return total
