"""Equilibrium computation for QIF games.

The defender-optimal strategy of a QIF game minimizes

    f(delta) = max_a V[prior, sum_d delta(d) C_da],

the worst-case posterior vulnerability over pure attacker responses.
Because posterior g-vulnerability with a finite guess set is piecewise
linear in delta, f is convex and a subgradient is available in closed
form, so projected subgradient descent applies: start at the uniform
strategy, step against a subgradient with a diminishing step size
(default 0.1/sqrt(k)), and project back onto the probability simplex.

A running lower bound on the optimum certifies the answer: the descent
stops once the best value seen and the best lower bound are within the
requested tolerance.  The bound's constant uses the simplex radius around
the uniform start, sqrt((n-1)/n) with n the number of defender actions.
The certificate shrinks like O(1/sqrt(k)), so tight tolerances need very
many iterations even when the iterate itself has long since converged;
reports carry a ``certified`` flag rather than failing outright when the
iteration budget runs out first.

A note on the subgradient: for finite guess sets, differentiating the
active linear branch of f at delta gives components

    h_d = sum_y sum_x prior(x) * C_{d,a*}(x,y) * g(w*_y, x),

where a* attains the outer max and w*_y the per-column max.  (A variant
of this formula with an extra leading delta(d) factor circulates; it
fails the subgradient inequality on hand-checked instances, while the
form above satisfies it.  The property suite tests the inequality
directly.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    Distribution,
    GameSpec,
    LabelMismatch,
    SolveReport,
    ValidationError,
    WeightCountMismatch,
)

DEFAULT_TOLERANCE = 1e-4
DEFAULT_MAX_ITER = 200_000


def default_step_size(k: int) -> float:
    """Diminishing step size 0.1/sqrt(k); k counts from 1."""
    return 0.1 / math.sqrt(k)


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex.

    Sort-based algorithm; idempotent on simplex points.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("cannot project a non-finite vector")
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho_candidates = u + (1.0 - css) / np.arange(1, n + 1)
    rho = int(np.nonzero(rho_candidates > 0)[0][-1])
    theta = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(v + theta, 0.0)


def strategy_weights(delta, labels: tuple[str, ...]) -> np.ndarray:
    """Coerce a strategy (Distribution or weight sequence) to a weight vector."""
    if isinstance(delta, Distribution):
        if delta.labels != labels:
            raise LabelMismatch(
                f"strategy labels {delta.labels} do not match actions {labels}"
            )
        return np.asarray(delta.weights, dtype=float)
    w = np.asarray(delta, dtype=float)
    if w.shape != (len(labels),):
        raise WeightCountMismatch(
            f"{len(labels)} actions but strategy of shape {w.shape}"
        )
    return w


class QifObjective:
    """Precomputed evaluator for f(delta) and its subgradients.

    Folds prior, gain, and channel family into one tensor
    S0[a, d, w, y] = sum_x prior(x) g(w, x) C_da(x, y), so that a single
    contraction per iteration yields all per-action vulnerabilities.
    """

    def __init__(self, game: GameSpec):
        measure = game.require_qif()
        self.game = game
        self.defender_actions = game.defender_actions
        self.attacker_actions = game.attacker_actions
        weighted_gain = measure.gain.table * measure.prior.weights  # (w, x)
        stacks = []
        for a in game.attacker_actions:
            per_d = np.stack(
                [weighted_gain @ game.channel(d, a).matrix for d in game.defender_actions]
            )
            stacks.append(per_d)
        self._s0 = np.stack(stacks)  # (a, d, w, y)

    def per_action_values(self, delta: np.ndarray) -> np.ndarray:
        scores = np.tensordot(delta, self._s0, axes=(0, 1))  # (a, w, y)
        return scores.max(axis=1).sum(axis=1)

    def value(self, delta: np.ndarray) -> tuple[float, int]:
        """f(delta) and the attacker action index attaining it (lowest wins ties)."""
        values = self.per_action_values(delta)
        a_idx = int(np.argmax(values))
        return float(values[a_idx]), a_idx

    def value_batch(self, deltas: np.ndarray) -> np.ndarray:
        """f over a batch of strategies, shape (batch,)."""
        scores = np.einsum("bd,adwy->bawy", deltas, self._s0)
        return scores.max(axis=2).sum(axis=2).max(axis=1)

    def subgradient(self, delta: np.ndarray) -> np.ndarray:
        scores = np.tensordot(delta, self._s0, axes=(0, 1))  # (a, w, y)
        values = scores.max(axis=1).sum(axis=1)
        a_idx = int(np.argmax(values))
        w_star = np.argmax(scores[a_idx], axis=0)  # per-column best guess
        cols = np.arange(scores.shape[2])
        return self._s0[a_idx][:, w_star, cols].sum(axis=1)

    def value_and_subgradient(self, delta: np.ndarray) -> tuple[float, np.ndarray]:
        scores = np.tensordot(delta, self._s0, axes=(0, 1))
        colmax = scores.max(axis=1)
        values = colmax.sum(axis=1)
        a_idx = int(np.argmax(values))
        w_star = np.argmax(scores[a_idx], axis=0)
        cols = np.arange(scores.shape[2])
        h = self._s0[a_idx][:, w_star, cols].sum(axis=1)
        return float(values[a_idx]), h


def qif_utility(game: GameSpec, delta, alpha) -> float:
    """Expected posterior vulnerability of a mixed strategy profile."""
    obj = QifObjective(game)
    d = strategy_weights(delta, game.defender_actions)
    a = strategy_weights(alpha, game.attacker_actions)
    return float(obj.per_action_values(d) @ a)


def worst_case_vulnerability(game: GameSpec, delta) -> tuple[float, str]:
    """Value of the best pure attacker response to delta, and that action.

    Equal to the maximum of the mixed-profile utility over all attacker
    strategies; ties break toward the lowest action index.
    """
    obj = QifObjective(game)
    d = strategy_weights(delta, game.defender_actions)
    value, a_idx = obj.value(d)
    return value, game.attacker_actions[a_idx]


def attacker_best_response(game: GameSpec, delta) -> str:
    """Pure attacker action maximizing vulnerability against delta."""
    return worst_case_vulnerability(game, delta)[1]


def subgradient(game: GameSpec, delta) -> np.ndarray:
    """A subgradient of f at delta (see module docstring for the formula)."""
    obj = QifObjective(game)
    d = strategy_weights(delta, game.defender_actions)
    return obj.subgradient(d)


@dataclass
class DescentState:
    """Running statistics of the projected subgradient descent."""

    delta: np.ndarray
    k: int
    step_sum: float
    weighted_f_sum: float
    grad_norm_sum: float
    best_f: float
    best_delta: np.ndarray
    best_lower: float

    def lower_bound(self, radius_sq: float) -> float:
        return (
            2.0 * self.weighted_f_sum - radius_sq - self.grad_norm_sum
        ) / (2.0 * self.step_sum)


def solve_qif(
    game: GameSpec,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    step_size: Callable[[int], float] | None = None,
) -> SolveReport:
    """Defender-optimal strategy of a QIF game by projected subgradient descent.

    Returns the best strategy seen together with its value and the
    certificate gap (best value minus best proven lower bound).  When the
    gap meets ``tolerance`` the report is certified and the value is
    within ``tolerance`` of the equilibrium value; when ``max_iter`` runs
    out first the best-so-far report is returned with ``certified=False``.
    """
    if tolerance <= 0:
        raise ValidationError(f"tolerance must be positive, got {tolerance!r}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be at least 1, got {max_iter!r}")
    step = step_size or default_step_size
    obj = QifObjective(game)
    n = len(game.defender_actions)

    delta = np.full(n, 1.0 / n)
    if n == 1:
        value, _ = obj.value(delta)
        return SolveReport(
            defender_strategy=Distribution(game.defender_actions, delta),
            value=value,
            iterations=1,
            certificate_gap=0.0,
            certified=True,
            diagnostics={"method": "subgradient", "note": "single-action game"},
        )

    radius_sq = (n - 1) / n  # max squared distance from the uniform start
    state = DescentState(
        delta=delta,
        k=0,
        step_sum=0.0,
        weighted_f_sum=0.0,
        grad_norm_sum=0.0,
        best_f=math.inf,
        best_delta=delta.copy(),
        best_lower=-math.inf,
    )

    certified = False
    for k in range(1, max_iter + 1):
        f, h = obj.value_and_subgradient(state.delta)
        if f < state.best_f:
            state.best_f = f
            state.best_delta = state.delta.copy()
        s = step(k)
        state.k = k
        state.step_sum += s
        state.weighted_f_sum += s * f
        state.grad_norm_sum += s * s * float(h @ h)
        state.best_lower = max(state.best_lower, state.lower_bound(radius_sq))
        if state.best_f - state.best_lower <= tolerance:
            certified = True
            break
        state.delta = project_simplex(state.delta - s * h)

    gap = max(state.best_f - state.best_lower, 0.0)
    return SolveReport(
        defender_strategy=Distribution(game.defender_actions, state.best_delta),
        value=state.best_f,
        iterations=state.k,
        certificate_gap=gap,
        certified=certified,
        diagnostics={
            "method": "subgradient",
            "tolerance": tolerance,
            "best_lower_bound": state.best_lower,
        },
    )
