# # How many victims can one adversary qubit sense?
#
# The adversary sits at Q2 in the middle of linear5. Two victims at distances
# 1 and 2 give four distinct shifts. A third victim is necessarily
# equidistant with one of the others, and their labels collapse.

# %%
import numpy as np

from qsense import collect_references, preset, separability

dev = preset("linear5")
np.set_printoptions(precision=4, suppress=True)

for victims in ([1], [1, 0], [1, 0, 3]):
    refs = collect_references(dev, victims, adversary=2, repetitions=37, shots=8192, seed=0)
    rep = separability(refs, seed=0)
    a, b, d = rep.closest_pair()
    print(f"victims {victims}: {rep.verdict}; closest {a} vs {b} at JSD {d:.5f}, floor {rep.floor:.5f}")
    if len(victims) == 2:
        print(rep.matrix)

# %% [markdown]
# Sensing depends on the calibration. An asymmetric override restores the
# three-victim case.

# %%
tuned = dev.replace(crosstalk={**dev.crosstalk, (2, 3): 0.0025})
refs = collect_references(tuned, [1, 0, 3], 2, 37, 8192, seed=0)
print("with gamma(2<-3)=0.0025:", separability(refs, seed=0).verdict)
