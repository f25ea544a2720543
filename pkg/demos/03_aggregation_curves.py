"""Compare truth-inference methods as the crowd grows.

Run with ``python demos/03_aggregation_curves.py``; writes ``curves.dat``
for gnuplot in the working directory.
"""

# %%
# A crowd with 30% Bad contributors who answer at random.
from beliefcrowd import ExperimentConfig, ProfileLabel, bootstrap_curves, default_synthetic_campaign
from beliefcrowd.experiments import write_curves_dat

E, G, A, B = ProfileLabel
campaign = default_synthetic_campaign(counts={E: 7, G: 14, A: 14, B: 15}, seed=42).campaign

# %%
# Draw 20 random sub-crowds per size and aggregate their answers with each method.
cfg = ExperimentConfig(sizes=(2, 4, 6, 10, 15, 20, 30, 40), repetitions=20, seed=7,
                       methods=("mv", "em", "monitor", "mean09"))
points = bootstrap_curves(campaign, cfg)

print(f"{'n':>3} " + " ".join(f"{m:>19}" for m in cfg.methods))
for n in cfg.sizes:
    row = {p.method: p for p in points if p.n == n}
    print(f"{n:>3} " + " ".join(f"{row[m].mean:.3f} [{row[m].ci_low:.3f},{row[m].ci_high:.3f}]"
                                for m in cfg.methods))

# %%
# Discounting by profile keeps the random answers from dragging small crowds down.
write_curves_dat(points, "curves.dat")
print("\nwrote curves.dat; plot with: plot for [i=0:3] 'curves.dat' index i using 1:2 with lines")
