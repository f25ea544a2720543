"""Estimate contributor profiles on a synthetic campaign and check them
against the planted labels.

Run with ``python demos/02_profiling_a_crowd.py``.
"""

# %%
# 48 contributors (8 Expert, 16 Good, 16 Average, 8 Bad) answer 50 questions
# over a ten-label frame; three questions are asked twice to test attention.
from collections import Counter

import numpy as np

from beliefcrowd import AlphaWeights, ProfileLabel, default_synthetic_campaign, estimate_profiles
from beliefcrowd.fusion import contributor_crr

sim = default_synthetic_campaign(seed=42)
campaign, planted = sim.campaign, sim.planted
print(len(campaign.contributors), "contributors,", len(campaign.responses), "responses")

# %%
# Each profile leaves a trace in the raw answers.
for p in ProfileLabel:
    ids = [c for c, lab in planted.items() if lab == p]
    rs = [r for c in ids for r in campaign.by_contributor[c]]
    print(f"{p.value:<8} crr={np.mean([contributor_crr(campaign, c) for c in ids]):.2f} "
          f"labels/answer={np.mean([bin(r.selected).count('1') for r in rs]):.2f} "
          f"likert={np.mean([r.likert for r in rs]):.2f} "
          f"time={np.mean([r.response_time_s for r in rs]):.1f}s")

# %%
# Profiles from the four characteristics with the default weights.
w = AlphaWeights(1, 6, 2, 1)
results = estimate_profiles(campaign, w)
agree = np.mean([results[c].label == planted[c] for c in campaign.contributors])
print("\nagreement with planted labels:", round(float(agree), 3))
print("decided:", dict(Counter(r.label.value for r in results.values())))

# %%
# Learn the weights on half the crowd, score on the other half.
from beliefcrowd.experiments import learn_characteristic_alphas, split_contributors

train, test = split_contributors(campaign, 0.5, seed=7)
learned = learn_characteristic_alphas(campaign, train, test, test_reference=planted)
print("\nlearned weights (P, C, R, A):", learned.weights.weights)
print(f"train CCR {learned.train_ccr:.3f}, test CCR {learned.test_ccr:.3f} "
      f"over {learned.n_evaluated} candidate tuples")
