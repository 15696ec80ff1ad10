"""Executable audits: brute-force oracles and theorem-shaped checks.

The oracles enumerate a simplex lattice and evaluate the solver
objectives directly, providing solver-independent reference values for
small games.  The bound checks mechanize the Bayesian readings of
differential privacy (posterior-odds bound; prior-to-posterior
information-increase bound with its 2-alpha converse), and the
independence witness constructs the three-channel family showing that
neither vulnerability nor DP level respects the expected-utility axiom
of independence: mixing with a third channel reverses a strict
preference under both measures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AdjacencyRelation,
    Channel,
    Distribution,
    GameSpec,
    NonConforming,
    NumericalFailure,
    ParameterOutOfRange,
    TooManyActions,
    ValidationError,
    channel_from_rows,
    uniform,
)
from .algebra import hidden_choice
from .measures import bayes_posterior, check_dp, dp_level, is_conforming
from .qif import QifObjective
from .dp import (
    DpObjective,
    dp_utility_hidden,
    hidden_upper_bound,
    solve_dp_hidden,
    solve_dp_visible,
)

MAX_ORACLE_ACTIONS = 4


def simplex_grid(n: int, step: float) -> np.ndarray:
    """Fixed-stride lattice over the n-simplex, vertices included.

    Points are all compositions k/m with k non-negative integers summing
    to m = round(1/step).
    """
    if not (0 < step <= 0.1 + 1e-12):
        raise ValidationError(f"grid step must lie in (0, 0.1], got {step!r}")
    m = max(1, round(1.0 / step))
    combos = itertools.combinations(range(m + n - 1), n - 1)
    points = []
    for dividers in combos:
        prev = -1
        parts = []
        for d in dividers:
            parts.append(d - prev - 1)
            prev = d
        parts.append(m + n - 2 - prev)
        points.append(parts)
    return np.array(points, dtype=float) / m


def _check_oracle_size(game: GameSpec, grid_step: float) -> None:
    if len(game.defender_actions) > MAX_ORACLE_ACTIONS:
        raise TooManyActions(
            f"grid oracle handles at most {MAX_ORACLE_ACTIONS} defender actions, "
            f"got {len(game.defender_actions)}"
        )
    if not (0 < grid_step <= 0.1 + 1e-12):
        raise ValidationError(f"grid step must lie in (0, 0.1], got {grid_step!r}")


def brute_force_qif(game: GameSpec, grid_step: float) -> tuple[Distribution, float]:
    """Grid minimizer of the worst-case vulnerability over the simplex."""
    _check_oracle_size(game, grid_step)
    obj = QifObjective(game)
    grid = simplex_grid(len(game.defender_actions), grid_step)
    values = obj.value_batch(grid)
    best = int(np.argmin(values))
    return Distribution(game.defender_actions, grid[best]), float(values[best])


def brute_force_dp_hidden(game: GameSpec, grid_step: float) -> tuple[Distribution, float]:
    """Grid minimizer of the hidden-choice DP level over the simplex."""
    _check_oracle_size(game, grid_step)
    obj = DpObjective(game)
    grid = simplex_grid(len(game.defender_actions), grid_step)
    values = obj.value_batch(grid)
    best = int(np.argmin(values))
    return Distribution(game.defender_actions, grid[best]), float(values[best])


def _posteriors(prior: Distribution, channel: Channel):
    joint = prior.weights[:, None] * channel.matrix
    p_y = joint.sum(axis=0)
    return joint, p_y


@dataclass(frozen=True)
class HypothesisBoundReport:
    """Posterior-odds audit of a channel at its own DP level.

    For every sampled prior, output, and adjacent pair, the posterior
    odds p(x|y)/p(x'|y) must not exceed e^epsilon times the prior odds.
    ``max_slack`` is the largest ln(posterior odds / prior odds) minus
    epsilon observed (non-positive when the bound holds).
    """

    epsilon: float
    max_slack: float
    violations: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return not self.violations


def check_bayes_hypothesis_bound(
    channel: Channel,
    adj: AdjacencyRelation,
    priors: list[Distribution],
    slack_tol: float = 1e-9,
) -> HypothesisBoundReport:
    """Verify the posterior-odds bound with epsilon = dp_level(channel)."""
    if not is_conforming(channel, adj):
        raise NonConforming("channel does not conform to the adjacency relation")
    eps = dp_level(channel, adj)
    max_slack = -math.inf
    violations = []
    for p_idx, prior in enumerate(priors):
        if prior.labels != channel.inputs:
            raise ValidationError("prior labels must match channel inputs")
        if np.any(prior.weights <= 0):
            raise ValidationError("hypothesis-bound audit needs full-support priors")
        joint, p_y = _posteriors(prior, channel)
        for i, j in adj.ordered_pairs(channel.inputs):
            for y in range(len(channel.outputs)):
                if p_y[y] <= 0 or joint[i, y] <= 0:
                    continue
                post_odds = joint[i, y] / joint[j, y]
                prior_odds = prior.weights[i] / prior.weights[j]
                slack = math.log(post_odds / prior_odds) - eps
                max_slack = max(max_slack, slack)
                if slack > slack_tol:
                    violations.append(
                        f"prior#{p_idx} pair ({channel.inputs[i]},{channel.inputs[j]}) "
                        f"output {channel.outputs[y]}: slack {slack:.3e}"
                    )
    if max_slack == -math.inf:
        max_slack = 0.0
    return HypothesisBoundReport(eps, max_slack, tuple(violations))


@dataclass(frozen=True)
class InfoIncreaseReport:
    """Two-directional audit of the information-increase bound.

    Direction 1: a channel at DP level <= alpha keeps every
    posterior-to-prior ratio p(x|y)/p(x) inside [e^-alpha, e^alpha] for
    every sampled prior.  Direction 2: if the ratios stay inside the
    alpha band on an exhaustive interior prior grid, the channel is
    2*alpha differentially private.
    """

    alpha: float
    dp_level: float
    direction1_applicable: bool
    direction1_violations: tuple[str, ...]
    grid_alpha: float
    direction2_applicable: bool
    direction2_holds: bool

    @property
    def holds(self) -> bool:
        if self.direction1_applicable and self.direction1_violations:
            return False
        if self.direction2_applicable and not self.direction2_holds:
            return False
        return True


def check_info_increase_bounds(
    channel: Channel,
    adj: AdjacencyRelation,
    priors: list[Distribution],
    alpha: float,
    grid_step: float = 0.1,
    ratio_tol: float = 1e-9,
) -> InfoIncreaseReport:
    """Audit the local-DP information-increase correspondence at level alpha."""
    if adj.mode != "all-pairs":
        raise ValidationError(
            "the information-increase bound is a local-DP statement; "
            "use an all-pairs adjacency"
        )
    if alpha < 0:
        raise ValidationError(f"alpha must be non-negative, got {alpha!r}")
    if not is_conforming(channel, adj):
        raise NonConforming("channel does not conform to all-pairs adjacency")
    eps = dp_level(channel, adj)

    direction1 = eps <= alpha + 1e-12
    violations = []
    if direction1:
        for p_idx, prior in enumerate(priors):
            if np.any(prior.weights <= 0):
                raise ValidationError("information-increase audit needs full-support priors")
            _, p_y = _posteriors(prior, channel)
            for y in range(len(channel.outputs)):
                if p_y[y] <= 0:
                    continue
                ratios = channel.matrix[:, y] / p_y[y]
                if np.any(ratios > math.exp(alpha) + ratio_tol) or np.any(
                    ratios < math.exp(-alpha) - ratio_tol
                ):
                    violations.append(
                        f"prior#{p_idx} output {channel.outputs[y]}: ratio outside "
                        f"[e^-{alpha}, e^{alpha}]"
                    )

    # Exhaustive interior prior grid for the converse direction.
    n = len(channel.inputs)
    grid = simplex_grid(n, grid_step)
    interior = grid[np.all(grid > 0, axis=1)]
    grid_alpha = 0.0
    for weights in interior:
        p_y = weights @ channel.matrix
        live = p_y > 0
        ratios = channel.matrix[:, live] / p_y[live]
        ratios = ratios[ratios > 0]
        if ratios.size:
            grid_alpha = max(grid_alpha, float(np.abs(np.log(ratios)).max()))
    direction2 = grid_alpha <= alpha + 1e-12
    direction2_holds = True
    if direction2:
        direction2_holds = check_dp(channel, adj, 2.0 * alpha)

    return InfoIncreaseReport(
        alpha=alpha,
        dp_level=eps,
        direction1_applicable=direction1,
        direction1_violations=tuple(violations),
        grid_alpha=grid_alpha,
        direction2_applicable=direction2,
        direction2_holds=direction2_holds,
    )


@dataclass(frozen=True)
class IndependenceWitness:
    """Preference reversal under 1/2-mixing, in both utility readings.

    ``first``/``second`` are the two comparable channels, ``mixer`` the
    channel whose hidden 1/2-mix reverses the strict preference between
    them, for Bayes vulnerability and for DP level alike.
    """

    noise: float
    first: Channel
    second: Channel
    mixer: Channel
    qif_before: tuple[float, float]
    qif_after: tuple[float, float]
    dp_before: tuple[float, float]
    dp_after: tuple[float, float]

    @property
    def reversal_holds(self) -> bool:
        return (
            self.qif_before[0] < self.qif_before[1]
            and self.qif_after[0] > self.qif_after[1]
            and self.dp_before[0] < self.dp_before[1]
            and self.dp_after[0] > self.dp_after[1]
        )


def vnm_independence_witness(d: float) -> IndependenceWitness:
    """Construct the three-channel independence counterexample at noise d.

    Requires 0 < d < 1/4.  Before mixing, the second channel is strictly
    preferred (more leakage) under both Bayes vulnerability and DP level;
    after a hidden 1/2-mix with the third channel the preference strictly
    reverses, because the second mix collapses to a constant channel.
    """
    if not (0.0 < d < 0.25):
        raise ParameterOutOfRange(f"noise must lie strictly in (0, 1/4), got {d!r}")
    inputs = ("0", "1")
    outputs = ("0", "1")
    c1 = channel_from_rows(inputs, outputs, [[1 - 2 * d, 2 * d], [2 * d, 1 - 2 * d]])
    c2 = channel_from_rows(inputs, outputs, [[1 - d, d], [d, 1 - d]])
    c3 = channel_from_rows(inputs, outputs, [[d, 1 - d], [1 - d, d]])
    prior = uniform(inputs)
    adj = AdjacencyRelation.all_pairs()
    half = np.array([0.5, 0.5])
    mix1 = hidden_choice(half, [c1, c3])
    mix2 = hidden_choice(half, [c2, c3])
    witness = IndependenceWitness(
        noise=d,
        first=c1,
        second=c2,
        mixer=c3,
        qif_before=(bayes_posterior(prior, c1), bayes_posterior(prior, c2)),
        qif_after=(bayes_posterior(prior, mix1), bayes_posterior(prior, mix2)),
        dp_before=(dp_level(c1, adj), dp_level(c2, adj)),
        dp_after=(dp_level(mix1, adj), dp_level(mix2, adj)),
    )
    if not witness.reversal_holds:
        raise NumericalFailure(f"independence reversal failed at noise {d!r}")
    return witness


def random_priors(labels, count: int, seed: int) -> list[Distribution]:
    """Reproducible full-support priors: flat Dirichlet draws."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        w = rng.dirichlet(np.ones(len(labels)))
        w = np.clip(w, 1e-12, None)
        out.append(Distribution(tuple(labels), w / w.sum()))
    return out


def audit_game(game: GameSpec, seed: int = 0, n_priors: int = 50) -> dict:
    """Run the theorem-shaped audits relevant to a game; JSON-friendly result."""
    rng = np.random.default_rng(seed)
    result: dict = {"seed": seed, "checks": {}, "violations": []}

    def record(name: str, ok: bool, detail: str = ""):
        result["checks"][name] = bool(ok)
        if not ok:
            result["violations"].append(f"{name}: {detail}" if detail else name)

    if game.is_qif():
        obj = QifObjective(game)
        n = len(game.defender_actions)
        ok = True
        worst = 0.0
        for _ in range(50):
            delta = rng.dirichlet(np.ones(n))
            delta2 = rng.dirichlet(np.ones(n))
            f1, h = obj.value_and_subgradient(delta)
            f2 = obj.value_batch(delta2[None, :])[0]
            gap = f2 - (f1 + h @ (delta2 - delta))
            worst = min(worst, float(gap))
            ok = ok and gap >= -1e-9
        record("subgradient_inequality", ok, f"worst margin {worst:.3e}")

        ok = True
        for _ in range(50):
            d1 = rng.dirichlet(np.ones(n))
            d2 = rng.dirichlet(np.ones(n))
            lam = rng.random()
            lhs = obj.value_batch((lam * d1 + (1 - lam) * d2)[None, :])[0]
            rhs = lam * obj.value_batch(d1[None, :])[0] + (1 - lam) * obj.value_batch(
                d2[None, :]
            )[0]
            ok = ok and lhs <= rhs + 1e-9
        record("objective_convexity", ok)
    else:
        adjacency = game.measure.adjacency
        levels = {
            (d, a): dp_level(game.channel(d, a), adjacency)
            for d in game.defender_actions
            for a in game.attacker_actions
        }
        result["pure_levels"] = {f"{d}|{a}": v for (d, a), v in levels.items()}

        n_d = len(game.defender_actions)
        n_a = len(game.attacker_actions)
        ok_q = ok_b = ok_full = True
        for _ in range(25):
            delta = rng.dirichlet(np.ones(n_d))
            alpha = rng.dirichlet(np.ones(n_a))
            hidden = dp_utility_hidden(game, delta, alpha)
            bound = hidden_upper_bound(game, delta, alpha)
            ok_b = ok_b and hidden <= bound + 1e-9
            full = dp_utility_hidden(game, delta, uniform(game.attacker_actions))
            ok_full = ok_full and full >= hidden - 1e-12
            for a in game.attacker_actions:
                mixed_level = dp_level(
                    hidden_choice(delta, game.channels_for_attack(a)), adjacency
                )
                cap = max(levels[(d, a)] for d in game.defender_actions)
                ok_q = ok_q and mixed_level <= cap + 1e-9
        record("quasi_convexity", ok_q)
        record("hidden_upper_bound", ok_b)
        record("full_support_attacker_optimal", ok_full)

        hidden_report = solve_dp_hidden(game)
        visible_report = solve_dp_visible(game)
        record(
            "visible_geq_hidden",
            visible_report.value >= hidden_report.value - 1e-6,
            f"visible {visible_report.value:.6f} vs hidden {hidden_report.value:.6f}",
        )
        result["hidden_value"] = hidden_report.value
        result["visible_value"] = visible_report.value

        priors = random_priors(game.inputs, n_priors, seed)
        ok = True
        worst_slack = -math.inf
        for a in game.attacker_actions:
            for d in game.defender_actions:
                rep = check_bayes_hypothesis_bound(game.channel(d, a), adjacency, priors)
                worst_slack = max(worst_slack, rep.max_slack)
                ok = ok and rep.holds
        record("bayes_hypothesis_bound", ok, f"max slack {worst_slack:.3e}")

    result["ok"] = not result["violations"]
    return result
