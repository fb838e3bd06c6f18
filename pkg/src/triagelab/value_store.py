"""Time-indexed post-decision value estimates and their smoothing update.

Bug values live on a dense (epoch, type, due) grid; developer values are
keyed by expertise class only, because a developer carries decision leverage
exactly when available.  Cells that are never observed keep their
initialization value; there is no extrapolation across epochs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .domain import ScenarioProfile, TriageError, postponement_cost

STORE_SCHEMA_VERSION = 1

# Multiplier turning the largest fixing time into a postponement price no
# assignment can beat; shared with the myopic policy.
BIG_M_FACTOR = 1e3

INIT_MODES = ("postponement-penalty", "zeros", "big-m")


class StoreError(TriageError):
    pass


class ValueStore:
    def __init__(self, profile: ScenarioProfile, bug_values, dev_values):
        self.horizon = profile.horizon
        self.n_bug_types = profile.n_bug_types
        self.n_dev_classes = profile.n_dev_classes
        self.due_floor = profile.due_floor
        self.deadline_cap = profile.deadline_cap
        self.bug_values = bug_values  # (T+1, n_types, n_due_levels)
        self.dev_values = dev_values  # (T+1, n_classes)

    # -- construction ------------------------------------------------------

    @classmethod
    def init(cls, profile: ScenarioProfile, mode: str = "postponement-penalty"):
        """Fresh store per the chosen initialization.

        postponement-penalty: every bug cell starts at the maximum fixing
        time, developer cells at zero.  zeros: everything at zero.  big-m:
        bug cells are set so that every postponement arc prices out at
        exactly the myopic Big-M, making the first training iteration
        reproduce the myopic policy plan-for-plan.
        """
        if mode not in INIT_MODES:
            raise StoreError(f"unknown init mode {mode!r}")
        n_due = profile.deadline_cap - profile.due_floor + 1
        shape_bug = (profile.horizon + 1, profile.n_bug_types, n_due)
        shape_dev = (profile.horizon + 1, profile.n_dev_classes)
        dev = np.zeros(shape_dev)
        if mode == "zeros":
            bug = np.zeros(shape_bug)
        elif mode == "postponement-penalty":
            bug = np.full(shape_bug, profile.max_cost, dtype=float)
        else:
            big_m = BIG_M_FACTOR * profile.max_cost
            w = profile.discount if profile.gamma_weights_vfa else 1.0
            bug = np.empty(shape_bug)
            for idx in range(n_due):
                due = profile.due_floor + idx
                # Cell (type, due) is priced by the postpone arc of a bug at
                # due+1; solve f(due+1) + w * v = big_m for v.
                f_next = postponement_cost(due + 1, profile)
                bug[:, :, idx] = (big_m - f_next) / w
        return cls(profile, bug, dev)

    def copy(self) -> "ValueStore":
        clone = object.__new__(ValueStore)
        clone.__dict__.update(self.__dict__)
        clone.bug_values = self.bug_values.copy()
        clone.dev_values = self.dev_values.copy()
        return clone

    def set_terminal_values(self, profile: ScenarioProfile) -> None:
        """Pin the epoch-T row to the exactly known end-of-horizon cost: a
        bug still open after the last decision costs its postponement
        penalty once more, a developer is worth nothing."""
        for idx in range(self.bug_values.shape[2]):
            due = self.due_floor + idx
            self.bug_values[self.horizon, :, idx] = postponement_cost(due, profile)
        self.dev_values[self.horizon, :] = 0.0

    # -- access ------------------------------------------------------------

    def _due_index(self, due: int) -> int:
        if not self.due_floor <= due <= self.deadline_cap:
            raise StoreError(
                f"due {due} outside [{self.due_floor}, {self.deadline_cap}]"
            )
        return due - self.due_floor

    def bug_value(self, t: int, type_id: int, due: int) -> float:
        return float(self.bug_values[t, type_id, self._due_index(due)])

    def dev_value(self, t: int, exp_id: int) -> float:
        return float(self.dev_values[t, exp_id])

    def set_bug_value(self, t, type_id, due, value) -> None:
        self.bug_values[t, type_id, self._due_index(due)] = value

    def set_dev_value(self, t, exp_id, value) -> None:
        self.dev_values[t, exp_id] = value

    # -- updates -----------------------------------------------------------

    def smooth_update(self, t: int, duals, alpha: float) -> None:
        """Blend epoch-t dual prices into the epoch-(t-1) cells:
        new = (1 - alpha) * old + alpha * dual.  Cells without an observed
        dual are left untouched."""
        for d, dual in duals.dev_duals.items():
            old = self.dev_values[t - 1, d.exp_id]
            self.dev_values[t - 1, d.exp_id] = (1 - alpha) * old + alpha * dual
        for b, dual in duals.bug_duals.items():
            idx = self._due_index(max(b.due, self.due_floor))
            old = self.bug_values[t - 1, b.type_id, idx]
            self.bug_values[t - 1, b.type_id, idx] = (1 - alpha) * old + alpha * dual

    def vfa_value(self, t: int, post) -> float:
        """Linear post-decision value: sum of cell values weighted by the
        post-decision bug and available-developer counts."""
        total = 0.0
        for b, n in post.bug_counts.items():
            total += self.bug_value(t, b.type_id, b.due) * n
        for d, n in post.dev_counts.items():
            if d.sch == 0:
                total += self.dev_value(t, d.exp_id) * n
        return total

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "schema_version": STORE_SCHEMA_VERSION,
            "horizon": self.horizon,
            "n_bug_types": self.n_bug_types,
            "n_dev_classes": self.n_dev_classes,
            "due_floor": self.due_floor,
            "deadline_cap": self.deadline_cap,
            "bug_values": self.bug_values.tolist(),
            "dev_values": self.dev_values.tolist(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ValueStore":
        if doc.get("schema_version") != STORE_SCHEMA_VERSION:
            raise StoreError(
                f"value store schema_version {doc.get('schema_version')!r} "
                f"!= {STORE_SCHEMA_VERSION}"
            )
        store = object.__new__(ValueStore)
        store.horizon = doc["horizon"]
        store.n_bug_types = doc["n_bug_types"]
        store.n_dev_classes = doc["n_dev_classes"]
        store.due_floor = doc["due_floor"]
        store.deadline_cap = doc["deadline_cap"]
        store.bug_values = np.array(doc["bug_values"], dtype=float)
        store.dev_values = np.array(doc["dev_values"], dtype=float)
        expected_bug = (
            store.horizon + 1,
            store.n_bug_types,
            store.deadline_cap - store.due_floor + 1,
        )
        if store.bug_values.shape != expected_bug:
            raise StoreError(
                f"bug_values shape {store.bug_values.shape} != {expected_bug}"
            )
        if store.dev_values.shape != (store.horizon + 1, store.n_dev_classes):
            raise StoreError("dev_values shape mismatch")
        return store

    @classmethod
    def load(cls, path) -> "ValueStore":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    def matches_profile(self, profile: ScenarioProfile) -> bool:
        return (
            self.horizon == profile.horizon
            and self.n_bug_types == profile.n_bug_types
            and self.n_dev_classes == profile.n_dev_classes
            and self.due_floor == profile.due_floor
            and self.deadline_cap == profile.deadline_cap
        )
