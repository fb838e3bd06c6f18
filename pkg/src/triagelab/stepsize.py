"""Step-size rules for the value-smoothing update: constant, harmonic, and
the bias-adjusted Kalman filter (BAKF).

BAKF tracks, per value cell, the smoothed innovation (bias), the smoothed
squared innovation, and the variance coefficient of the running estimate.
The resulting step size is large while the estimate is transiently biased
and shrinks as observation noise starts to dominate; it never drops below
1/n.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


def constant_alpha(n: int, value: float = 0.5) -> float:
    """The basic rule: the same step size at every iteration."""
    return value


def harmonic_alpha(n: int, eta: float = 25.0, alpha0: float = 0.05) -> float:
    """Arithmetically declining sequence eta/(eta+n-1), floored at alpha0."""
    return max(eta / (eta + n - 1), alpha0)


@dataclass(frozen=True)
class BakfState:
    """Per-cell BAKF recursion state.

    ``theta`` mirrors the smoothed estimate for fidelity with the published
    recursions but is never read by the step-size computation itself.
    """

    nu: float = 0.01
    beta_bar: float = 0.0
    delta_bar: float = 0.0
    lambda_bar: float = 0.0
    sigma2: float = 0.0
    n: int = 0
    theta: float = 0.0
    nu_bar: float = 0.2


def bakf_update(
    state: BakfState, new_obs: float, prev_obs: float
) -> tuple[BakfState, float]:
    """One BAKF step on the innovation new_obs - prev_obs.

    ``prev_obs`` is the running smoothed estimate the observation is about
    to be blended into.  Returns the advanced state and the step size,
    clamped to [1/n, 1]; a degenerate zero-variance stream falls back to
    1/n exactly.
    """
    n = state.n + 1
    nu = state.nu / (1.0 + state.nu - state.nu_bar)
    diff = new_obs - prev_obs
    beta = (1.0 - nu) * state.beta_bar + nu * diff
    delta = (1.0 - nu) * state.delta_bar + nu * diff * diff
    sigma2 = (delta - beta * beta) / (1.0 + state.lambda_bar)
    if n == 1:
        alpha = 1.0
    elif delta <= 0.0:
        alpha = 1.0 / n
    else:
        alpha = 1.0 - sigma2 / delta
        alpha = min(1.0, max(alpha, 1.0 / n))
    lam = alpha * alpha if n == 1 else (1.0 - alpha) ** 2 * state.lambda_bar + alpha * alpha
    theta = (1.0 - alpha) * prev_obs + alpha * new_obs
    return (
        replace(
            state,
            nu=nu,
            beta_bar=beta,
            delta_bar=delta,
            lambda_bar=lam,
            sigma2=sigma2,
            n=n,
            theta=theta,
        ),
        alpha,
    )


class StepsizeManager:
    """Per-cell step-size dispatch used by the trainer.

    constant / harmonic depend only on the global iteration counter;
    bakf keeps one :class:`BakfState` per value cell because bias and
    variance are cell-specific.
    """

    def __init__(self, rule: str, **params):
        if rule not in ("constant", "harmonic", "bakf"):
            raise ValueError(f"unknown step-size rule {rule!r}")
        self.rule = rule
        self.params = params
        self.iteration = 1
        self._cells: dict[object, BakfState] = {}

    def begin_iteration(self, n: int) -> None:
        self.iteration = n

    def alpha(self, key: object, new_obs: float, prev_value: float) -> float:
        if self.rule == "constant":
            return constant_alpha(self.iteration, **self.params)
        if self.rule == "harmonic":
            return harmonic_alpha(self.iteration, **self.params)
        cell = self._cells.get(key, BakfState(**self.params))
        cell, alpha = bakf_update(cell, new_obs, prev_value)
        self._cells[key] = cell
        return alpha
