"""Decision policies: value-priced ADP, Big-M myopic, and a random baseline.

All three produce plans through the same LP solver, so feasibility is
structural rather than per-policy logic.  The ADP policy prices each
postponement arc with the immediate penalty plus the (discounted) learned
value of the bug one epoch closer to its deadline, and each idle arc with
the learned value of keeping that developer free.
"""

from __future__ import annotations

import numpy as np

from .domain import (
    DecisionPlan,
    ScenarioProfile,
    SystemState,
    clamp_due,
    postponement_cost,
)
from .solver import ArcCosts, SolverResult, solve
from .value_store import BIG_M_FACTOR, ValueStore


def adp_decide(
    state: SystemState, store: ValueStore, profile: ScenarioProfile
) -> tuple[DecisionPlan, SolverResult]:
    """Solve the one-epoch LP with value-function-priced arcs.

    Developers returning regardless of the action are a constant term and
    stay out of the objective.
    """
    t = state.epoch
    w = profile.discount if profile.gamma_weights_vfa else 1.0
    avail = state.available_devs()
    bugs = state.open_bugs()
    assign = {
        (d, b): profile.cost(d.exp_id, b.type_id) for d in avail for b in bugs
    }
    postpone = {
        b: postponement_cost(b.due, profile)
        + w * store.bug_value(t, b.type_id, clamp_due(b.due - 1, profile))
        for b in bugs
    }
    idle = {d: w * store.dev_value(t, d.exp_id) for d in avail}
    result = solve(state, ArcCosts(assign=assign, postpone=postpone, idle=idle))
    return result.plan, result


def myopic_decide(
    state: SystemState, profile: ScenarioProfile
) -> tuple[DecisionPlan, SolverResult]:
    """Assign-now baseline: postponement priced at Big-M, idling free, so
    the LP exhausts developer capacity as cheaply as possible."""
    big_m = BIG_M_FACTOR * profile.max_cost
    avail = state.available_devs()
    bugs = state.open_bugs()
    assign = {
        (d, b): profile.cost(d.exp_id, b.type_id) for d in avail for b in bugs
    }
    postpone = {b: big_m for b in bugs}
    idle = {d: 0.0 for d in avail}
    result = solve(state, ArcCosts(assign=assign, postpone=postpone, idle=idle))
    return result.plan, result


def random_decide(
    state: SystemState, rng: np.random.Generator
) -> DecisionPlan:
    """Feasible sanity baseline: every bug unit independently picks
    postponement or a uniformly chosen developer with spare capacity."""
    caps = dict(state.available_devs())
    assign: dict = {}
    postpone: dict = {}
    units = []
    for b, m in sorted(state.open_bugs().items()):
        units.extend([b] * m)
    rng.shuffle(units)
    for b in units:
        options = [None] + sorted(d for d, n in caps.items() if n > 0)
        choice = options[int(rng.integers(0, len(options)))]
        if choice is None:
            postpone[b] = postpone.get(b, 0) + 1
        else:
            caps[choice] -= 1
            key = (choice, b)
            assign[key] = assign.get(key, 0) + 1
    idle = {d: n for d, n in caps.items() if n > 0}
    return DecisionPlan(assign=assign, postpone=postpone, idle=idle)


def make_policy(
    name: str,
    profile: ScenarioProfile,
    store: ValueStore | None = None,
    seed: int = 0,
):
    """Uniform callable interface: state -> (plan, solver result or None)."""
    if name == "adp":
        if store is None:
            raise ValueError("adp policy needs a value store")

        def decide_adp(state):
            return adp_decide(state, store, profile)

        return decide_adp
    if name == "myopic":

        def decide_myopic(state):
            return myopic_decide(state, profile)

        return decide_myopic
    if name == "random":
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(4,))
        )

        def decide_random(state):
            return random_decide(state, rng), None

        return decide_random
    raise ValueError(f"unknown policy {name!r}")
