"""Two small QIF games, and why the defender should randomize.

Walks through the two-party comparison game (where mixing behaves like a
classic matching-pennies game) and the binary-sum game (where every pure
strategy is equally terrible but the even mixture leaks nothing at all).
"""

import numpy as np

from leakgames import (
    attacker_best_response,
    build_binary_sum,
    build_two_millionaires,
    posterior_vulnerability,
    qif_utility,
    solve_qif,
    worst_case_vulnerability,
)

np.set_printoptions(precision=4, suppress=True)


def pure_profile_table(game):
    prior, gain = game.measure.prior, game.measure.gain
    return np.array(
        [
            [posterior_vulnerability(gain, prior, game.channel(d, a))
             for a in game.attacker_actions]
            for d in game.defender_actions
        ]
    )


print("=" * 64)
print("Two-party comparison game")
print("=" * 64)
game = build_two_millionaires()
print("\nPure-profile posterior Bayes vulnerability (rows: defender):")
print(pure_profile_table(game))
print("\nOne action pair reveals the secret bit completely (value 1),")
print("the mirrored pair reveals nothing beyond the prior (value 1/2).")

report = solve_qif(game, tolerance=1e-3, max_iter=5000)
print(f"\nEquilibrium strategy: {np.round(report.defender_strategy.weights, 4)}")
print(f"Guaranteed worst-case vulnerability: {report.value:.4f}")
print(f"Utility at the (1/2, 1/2) profile: {qif_utility(game, [.5, .5], [.5, .5]):.4f}")

print()
print("=" * 64)
print("Binary-sum game")
print("=" * 64)
game = build_binary_sum()
print("\nPure-profile vulnerabilities:")
print(pure_profile_table(game))
print("\nEvery pure profile reveals everything -- in expectation-based game")
print("theory all strategies would then be equivalent. They are not:")

for p in (1.0, 0.75, 0.5):
    value, _ = worst_case_vulnerability(game, [p, 1 - p])
    print(f"  worst-case vulnerability at mixture ({p:.2f}, {1-p:.2f}): {value:.4f}")

report = solve_qif(game, tolerance=1e-3, max_iter=5000)
print(f"\nSolved equilibrium: {np.round(report.defender_strategy.weights, 4)}"
      f" with value {report.value:.4f}")
print(f"Attacker best response there: action {attacker_best_response(game, report.defender_strategy)}")
print("\nHidden choice makes the mixture strictly better than any pure plan:")
print("utility is convex, not linear, in the defender's distribution.")
