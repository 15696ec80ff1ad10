"""Channel algebra, Bayesian DP readings, and the independence reversal.

A tour of the compositional layer (hidden choice, visible choice,
cascade) and the executable audits: the posterior-odds bound, the
information-increase bound with its 2-alpha converse, and the
three-channel witness showing that information measures break the
expected-utility independence axiom.
"""

import math

import numpy as np

from leakgames import (
    AdjacencyRelation,
    bayes_posterior,
    cascade,
    channel_from_rows,
    check_bayes_hypothesis_bound,
    dp_level,
    hidden_choice,
    marginalize_tags,
    randomized_response,
    uniform,
    visible_choice,
    vnm_independence_witness,
)
from leakgames.audits import random_priors

np.set_printoptions(precision=4, suppress=True)
ALL = AdjacencyRelation.all_pairs()

print("-- composition operators " + "-" * 38)
c1 = channel_from_rows(["x1", "x2"], ["y1", "y2"], [[0.25, 0.75], [0.5, 0.5]])
c2 = channel_from_rows(["x1", "x2"], ["y1", "y3"], [[0.5, 0.5], [2 / 3, 1 / 3]])
v = visible_choice([1 / 3, 2 / 3], [c1, c2])
print(f"visible 1/3*C1 <> 2/3*C2 has outputs {v.outputs}")
print(v.matrix)

same_type = channel_from_rows(["x1", "x2"], ["y1", "y2"], [[0.5, 0.5], [2 / 3, 1 / 3]])
h = hidden_choice([1 / 3, 2 / 3], [c1, same_type])
recovered = marginalize_tags(visible_choice([1 / 3, 2 / 3], [c1, same_type]))
print(f"\ndropping tags and merging columns recovers the hidden mix exactly: "
      f"{np.allclose(h.matrix, recovered.matrix)}")

noise = randomized_response(math.log(3), ["y1", "y2"])
print(f"\ncascading with (ln 3)-randomized response lowers leakage:")
print(f"  Bayes posterior before: {bayes_posterior(uniform(['x1','x2']), c1):.4f}")
print(f"  after cascade:          {bayes_posterior(uniform(['x1','x2']), cascade(c1, noise)):.4f}")

print()
print("-- Bayesian reading of differential privacy " + "-" * 19)
mech = randomized_response(1.0, ["a", "b", "c"])
eps = dp_level(mech, ALL)
report = check_bayes_hypothesis_bound(mech, ALL, random_priors(mech.inputs, 25, seed=1))
print(f"randomized response at eps = {eps:.4f}:")
print(f"  posterior odds never exceed e^eps x prior odds "
      f"(max slack {report.max_slack:.2e}, holds = {report.holds})")

print()
print("-- independence-axiom reversal " + "-" * 32)
w = vnm_independence_witness(0.1)
print("channels C1 (noisier) and C2 (sharper), mixer C3, at noise 0.1:")
print(f"  Bayes vulnerability: C1 {w.qif_before[0]:.3f} < C2 {w.qif_before[1]:.3f}")
print(f"  after 1/2-mix with C3: {w.qif_after[0]:.3f} > {w.qif_after[1]:.3f}  (reversed)")
print(f"  DP level: C1 {w.dp_before[0]:.3f} < C2 {w.dp_before[1]:.3f}")
print(f"  after 1/2-mix with C3: {w.dp_after[0]:.3f} > {w.dp_after[1]:.3f}  (reversed)")
print("\nMixing with C3 turns the sharper channel into a constant one;")
print("no expected-utility representation can account for that, which is")
print("why these games need convex/quasi-convex utilities in the first place.")
