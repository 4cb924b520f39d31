# # Random output inversion as a countermeasure

# %%
from qsense import (attack_under_defense, collect_references, fidelity_overhead, preset,
                    run_attack_experiment)
from qsense.defense import fidelity_test_circuits

dev = preset("linear5")

for victims in ([1], [1, 0]):
    refs = collect_references(dev, victims, adversary=2, repetitions=37, shots=8192, seed=0)
    plain = run_attack_experiment(dev, refs, 400, shots=8192, seed=0).accuracy
    defended = attack_under_defense(dev, refs, 400, shots=8192, seed=0).accuracy
    print(f"{len(victims)} victim(s): undefended {plain:.3f} -> defended {defended:.3f} "
          f"(chance {2 ** -len(victims)})")

# %% [markdown]
# ## Fidelity cost of the extra X gate

# %%
for eps in (1e-4, 5e-4, 1e-3):
    d = preset("linear5", gate_error=eps)
    rep = fidelity_overhead(d, fidelity_test_circuits(d, [1], 2, 40, seed=0), 8192, seed=0)
    parts = ", ".join(f"{k} {100 * v:.4f}%" for k, v in rep.components.items())
    print(f"eps={eps:g}: loss {100 * rep.loss:.4f}%  (exact: {parts})")
