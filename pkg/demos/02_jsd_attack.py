# # Classifying a victim's RB output with Jensen-Shannon distance

# %%
import numpy as np

from qsense import collect_references, preset, run_attack_experiment

dev = preset("linear5")
refs = collect_references(dev, victims=1, adversary=2, repetitions=37, shots=8192, seed=0)
report = run_attack_experiment(dev, refs, n_tests=200, depth_range=(1, 10), shots=8192, seed=0)
print(f"accuracy: {report.accuracy:.3f} over {report.n_tests} RB circuits")

# %% [markdown]
# Positive delta JSD means the observation is closer to the victim-1 reference.

# %%
for r in report.results[:10]:
    print(f"depth {r.depth:2d}  truth {r.truth}  predicted {r.predicted}  dJSD {r.delta_jsd:+.4f}")

# %% [markdown]
# Per-test data in the layout of a delta-JSD scatter plot:

# %%
print(report.to_csv().splitlines()[:4])

# %% [markdown]
# ## Crosstalk strength sweep

# %%
for gamma in (0.0, 0.0025, 0.005, 0.01, 0.02):
    d = preset("linear5", gamma_adjacent=gamma)
    r = run_attack_experiment(d, collect_references(d, 1, 2, 37, 8192, seed=0), 200, shots=8192, seed=0)
    print(f"gamma={gamma:<7} accuracy={r.accuracy:.3f} "
          f"mean|dJSD|={np.mean([abs(x.delta_jsd) for x in r.results]):.4f}")
