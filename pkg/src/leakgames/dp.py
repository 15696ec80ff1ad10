"""Equilibrium computation for DP games.

Utilities are differential-privacy levels, so mixed strategies behave
differently on the two sides of the game: the level of a visible choice
is the maximum level over the support (quasi-max), while the level of a
hidden choice is at most that maximum (quasi-convex).  Consequently any
full-support attacker strategy is optimal, and the defender problem
collapses to

    min_delta  max_a  VDP[ sum_d delta(d) C_da ]        (hidden choice)
    min_d      max_a  VDP[ C_da ]                       (visible choice)

The visible case is a finite argmin-max.  The hidden case is generalized
fractional programming over the entry ratios of adjacent rows: writing
f_j(delta) = sum_d delta(d) C_da(x,y) and g_j(delta) for the adjacent row
x', the objective is max_j f_j/g_j, minimized with a Dinkelbach-type
loop: at each round set lambda_k to the current max ratio, then solve the
linear program minimizing z subject to z >= f_j(delta) - lambda_k
g_j(delta); stop when the LP optimum F_k(delta_k) reaches zero.  The
lambda_k sequence is non-increasing and the final lambda is the game's
max ratio, so the value in nats is ln(lambda).

Ratio terms where both coefficient vectors vanish (a zero column shared
by the whole family, as conformance guarantees) carry no constraint and
are dropped when the term set is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import (
    Distribution,
    GameSpec,
    Infeasible,
    NumericalFailure,
    SolveReport,
    ValidationError,
    ZERO_TOL,
    uniform,
)
from .algebra import hidden_choice
from .measures import dp_level
from .qif import strategy_weights

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITER = 1000


def dp_utility_hidden(game: GameSpec, delta, alpha) -> float:
    """DP level (nats) of the hidden-choice composition under (delta, alpha).

    The visible choice over attacker actions collapses to a maximum over
    the support of alpha of the level of the delta-mixed channel.
    """
    game.require_dp()
    d = strategy_weights(delta, game.defender_actions)
    a = strategy_weights(alpha, game.attacker_actions)
    adjacency = game.measure.adjacency
    best = 0.0
    for idx, action in enumerate(game.attacker_actions):
        if a[idx] <= 0:
            continue
        mixed = hidden_choice(d, game.channels_for_attack(action))
        best = max(best, dp_level(mixed, adjacency))
    return best


def dp_utility_visible(game: GameSpec, delta, alpha) -> float:
    """DP level (nats) when both choices are visible: max over the supports."""
    game.require_dp()
    d = strategy_weights(delta, game.defender_actions)
    a = strategy_weights(alpha, game.attacker_actions)
    adjacency = game.measure.adjacency
    best = 0.0
    for i, da in enumerate(game.defender_actions):
        if d[i] <= 0:
            continue
        for j, aa in enumerate(game.attacker_actions):
            if a[j] <= 0:
                continue
            best = max(best, dp_level(game.channel(da, aa), adjacency))
    return best


def hidden_upper_bound(game: GameSpec, delta, alpha) -> float:
    """Worst pure-profile DP level over the supports; bounds the hidden utility."""
    return dp_utility_visible(game, delta, alpha)


@dataclass(frozen=True)
class LpProblem:
    """Parametric linear program of one Dinkelbach round.

    Minimize z subject to z >= (f_j - lam * g_j) . delta for every ratio
    term j, with delta on the probability simplex.  Coefficient rows are
    indexed by (attacker action, ordered adjacent input pair, output) and
    have one entry per defender action.
    """

    f_coeffs: np.ndarray  # (terms, defender actions)
    g_coeffs: np.ndarray
    lam: float

    def __post_init__(self):
        f = np.asarray(self.f_coeffs, dtype=float)
        g = np.asarray(self.g_coeffs, dtype=float)
        if f.ndim != 2 or f.shape != g.shape:
            raise ValidationError(
                f"coefficient arrays disagree: {f.shape} vs {g.shape}"
            )
        object.__setattr__(self, "f_coeffs", f)
        object.__setattr__(self, "g_coeffs", g)

    @property
    def num_terms(self) -> int:
        return self.f_coeffs.shape[0]

    @property
    def num_vars(self) -> int:
        """Defender weights plus the epigraph variable z."""
        return self.f_coeffs.shape[1] + 1

    def ratio_terms(self):
        return list(zip(self.f_coeffs, self.g_coeffs))

    def objective(self, delta: np.ndarray) -> float:
        """F(delta) = max_j [f_j(delta) - lam * g_j(delta)]."""
        return float(
            ((self.f_coeffs - self.lam * self.g_coeffs) @ delta).max()
        )


def solve_lp(problem: LpProblem) -> tuple[np.ndarray, float]:
    """Minimize the epigraph variable of a Dinkelbach round.

    Returns (delta, z) with z equal to the constraint maximum at delta.
    """
    n_terms, n_d = problem.f_coeffs.shape
    if n_terms == 0:
        raise ValidationError("linear program has no ratio terms")
    coeff = problem.f_coeffs - problem.lam * problem.g_coeffs
    c = np.zeros(n_d + 1)
    c[-1] = 1.0
    a_ub = np.hstack([coeff, -np.ones((n_terms, 1))])
    b_ub = np.zeros(n_terms)
    a_eq = np.ones((1, n_d + 1))
    a_eq[0, -1] = 0.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * n_d + [(None, None)],
        method="highs",
    )
    if res.status == 2:
        raise Infeasible("epigraph program reported infeasible (internal error)")
    if not res.success:
        raise NumericalFailure(f"linear program failed: {res.message}")
    delta = np.clip(res.x[:n_d], 0.0, None)
    total = delta.sum()
    if not math.isfinite(total) or total <= 0:
        raise NumericalFailure("linear program returned a degenerate strategy")
    delta = delta / total
    z = problem.objective(delta)
    if abs(z - float(res.x[-1])) > 1e-7:
        raise NumericalFailure(
            f"epigraph value {res.x[-1]!r} disagrees with constraint max {z!r}"
        )
    return delta, z


def build_ratio_terms(game: GameSpec) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient arrays of every live ratio term of a DP game.

    Terms run over attacker actions, ordered adjacent input pairs (both
    directions, which makes the log-free ratio formulation capture the
    symmetric maximum), and outputs.  Terms whose coefficient vectors are
    all zero on both sides (a column the whole family zeroes out, as the
    conforming zero pattern guarantees happens in lockstep) are dropped.
    """
    adjacency = game.require_dp().adjacency
    inputs = game.inputs
    pair_list = list(adjacency.ordered_pairs(inputs))
    f_rows: list[np.ndarray] = []
    g_rows: list[np.ndarray] = []
    for a in game.attacker_actions:
        stack = np.stack([c.matrix for c in game.channels_for_attack(a)])  # (d, x, y)
        for i, j in pair_list:
            for y in range(stack.shape[2]):
                f = stack[:, i, y]
                g = stack[:, j, y]
                if f.max(initial=0.0) <= ZERO_TOL and g.max(initial=0.0) <= ZERO_TOL:
                    continue
                f_rows.append(f)
                g_rows.append(g)
    if not f_rows:
        n_d = len(game.defender_actions)
        return np.zeros((0, n_d)), np.zeros((0, n_d))
    return np.array(f_rows), np.array(g_rows)


def _max_ratio(f_coeffs: np.ndarray, g_coeffs: np.ndarray, delta: np.ndarray) -> float:
    fv = f_coeffs @ delta
    gv = g_coeffs @ delta
    live = fv > ZERO_TOL
    if not live.any():
        return 1.0
    if np.any(gv[live] <= ZERO_TOL):
        raise NumericalFailure(
            "ratio with zero denominator on a conforming family; "
            "channel data is inconsistent"
        )
    return float((fv[live] / gv[live]).max())


def solve_dp_hidden(
    game: GameSpec,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveReport:
    """Defender-optimal strategy for hidden choice via Dinkelbach iteration.

    The reported value is ln(lambda_k) in nats.  Any full-support
    attacker strategy is optimal; the report carries the uniform one.
    """
    game.require_dp()
    if tolerance <= 0:
        raise ValidationError(f"tolerance must be positive, got {tolerance!r}")
    f_coeffs, g_coeffs = build_ratio_terms(game)
    alpha = uniform(game.attacker_actions)
    n_d = len(game.defender_actions)
    delta = np.full(n_d, 1.0 / n_d)

    if f_coeffs.shape[0] == 0:
        # No adjacency constraints: every strategy is 0-differentially private.
        return SolveReport(
            defender_strategy=Distribution(game.defender_actions, delta),
            value=0.0,
            iterations=0,
            certificate_gap=0.0,
            certified=True,
            attacker_strategy=alpha,
            diagnostics={"method": "dinkelbach", "note": "empty adjacency"},
        )

    lam = math.nan
    residual = math.inf
    certified = False
    lambdas: list[float] = []
    residuals: list[float] = []
    iterations = 0
    for k in range(1, max_iter + 1):
        iterations = k
        lam = _max_ratio(f_coeffs, g_coeffs, delta)
        lambdas.append(lam)
        problem = LpProblem(f_coeffs, g_coeffs, lam)
        delta, residual = solve_lp(problem)
        residuals.append(residual)
        if abs(residual) <= tolerance:
            certified = True
            break

    return SolveReport(
        defender_strategy=Distribution(game.defender_actions, delta),
        value=math.log(lam),
        iterations=iterations,
        certificate_gap=abs(residual),
        certified=certified,
        attacker_strategy=alpha,
        diagnostics={
            "method": "dinkelbach",
            "tolerance": tolerance,
            "lambda_history": lambdas,
            "residual_history": residuals,
        },
    )


def solve_dp_visible(game: GameSpec) -> SolveReport:
    """Defender-optimal pure strategy for visible choice.

    Picks the action minimizing the worst per-profile DP level (lowest
    index on ties); the value is exact, so the certificate gap is zero.
    """
    game.require_dp()
    adjacency = game.measure.adjacency
    levels = np.array(
        [
            [dp_level(game.channel(d, a), adjacency) for a in game.attacker_actions]
            for d in game.defender_actions
        ]
    )
    worst = levels.max(axis=1)
    d_idx = int(np.argmin(worst))
    weights = np.zeros(len(game.defender_actions))
    weights[d_idx] = 1.0
    return SolveReport(
        defender_strategy=Distribution(game.defender_actions, weights),
        value=float(worst[d_idx]),
        iterations=1,
        certificate_gap=0.0,
        certified=True,
        attacker_strategy=uniform(game.attacker_actions),
        diagnostics={
            "method": "argmin-max",
            "pure_levels": levels.tolist(),
            "defender_action": game.defender_actions[d_idx],
        },
    )


class DpObjective:
    """Vectorized evaluator of the hidden-choice DP objective.

    value(delta) = max_a VDP[sum_d delta(d) C_da] in nats.  Used by the
    grid oracle; the solver itself works in ratio space.
    """

    def __init__(self, game: GameSpec):
        adjacency = game.require_dp().adjacency
        self.game = game
        inputs = game.inputs
        pairs = list(adjacency.ordered_pairs(inputs))
        self._rows_i = np.array([i for i, _ in pairs], dtype=int)
        self._rows_j = np.array([j for _, j in pairs], dtype=int)
        self._stacks = [
            np.stack([c.matrix for c in game.channels_for_attack(a)])
            for a in game.attacker_actions
        ]

    def value_batch(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.asarray(deltas, dtype=float)
        if deltas.ndim == 1:
            deltas = deltas[None, :]
        if self._rows_i.size == 0:
            return np.zeros(deltas.shape[0])
        best = np.ones(deltas.shape[0])
        for stack in self._stacks:
            mixed = np.tensordot(deltas, stack, axes=(1, 0))  # (b, x, y)
            num = mixed[:, self._rows_i, :]
            den = mixed[:, self._rows_j, :]
            num_zero = num <= ZERO_TOL
            den_zero = den <= ZERO_TOL
            ratio = np.divide(num, np.where(den_zero, 1.0, den))
            ratio = np.where(num_zero & den_zero, 1.0, ratio)
            ratio = np.where(~num_zero & den_zero, np.inf, ratio)
            best = np.maximum(best, ratio.max(axis=(1, 2)))
        return np.log(best)

    def value(self, delta) -> float:
        return float(self.value_batch(np.asarray(delta, dtype=float))[0])
