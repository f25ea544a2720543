"""A tour of mass functions on a three-bird frame.

Run with ``python demos/01_evidence_basics.py``.
"""

# %%
# One contributor picks "crow or raven" and is 70% sure. The answer becomes a
# simple support: 0.7 on the chosen set, the rest on the whole frame.
from beliefcrowd import Frame, MassFunction, discount, pignistic
from beliefcrowd.evidential import make_simple_support

birds = Frame(("crow", "raven", "sparrow"))
answer = make_simple_support(birds, birds.subset(["crow", "raven"]), 0.7)
print("answer      ", answer.to_text())

# Discounting by a reliability factor moves mass toward ignorance.
for alpha in (1.0, 0.5, 0.0):
    print(f"alpha={alpha:<4}   ", discount(answer, alpha).to_text())

# %%
# Three answers, three combination rules.
from beliefcrowd import combine_conjunctive, combine_dempster, combine_mean

second = MassFunction.from_labels(birds, {"raven": 0.6, "*": 0.4})
third = MassFunction.from_labels(birds, {"sparrow": 0.5, "*": 0.5})
crowd = [answer, second, third]

conj = combine_conjunctive(crowd)
# betP renormalizes away the empty-set mass, so conjunctive and Dempster decide alike
print("\nconflict between the three answers:", round(conj.conflict, 4))
for name, m in (("mean", combine_mean(crowd)), ("conjunctive", conj), ("dempster", combine_dempster(crowd))):
    bet = pignistic(m)
    print(f"{name:<12} betP =", {lab: round(float(v), 3) for lab, v in zip(birds.labels, bet)})

# %%
# Distances between answers and the canonical decomposition of a combined mass.
from beliefcrowd import canonical_decompose, jousselme_distance

print("\nd_J(answer, second) =", round(jousselme_distance(answer, second), 4))
print("d_J(answer, third)  =", round(jousselme_distance(answer, third), 4))

merged = combine_conjunctive([answer, second])
for s in canonical_decompose(merged):
    print("factor:", "|".join(birds.labels_of(s.focal)), "support", round(s.support, 4))
