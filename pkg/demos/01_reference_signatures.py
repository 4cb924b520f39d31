# # Reference signatures on a simulated device
#
# The adversary's qubit is set to 1 at the last timestep while a neighbouring
# victim is prepared in 0 or 1 with an X-chain. Readout crosstalk makes the
# adversary's one-count depend on the victim's state.

# %%
from qsense import build_reference_circuit, collect_references, exact_distribution, marginal, preset
from qsense.simulator import run

dev = preset("linear5")
print(dev.name, sorted(dev.edges))
print("crosstalk 2<-1:", dev.gamma(2, 1), " 2<-0:", dev.gamma(2, 0), " 0<-4:", dev.gamma(0, 4))

# %% [markdown]
# ## The two reference circuits

# %%
for state in (1, 0):
    c = build_reference_circuit(dev, victim=1, adversary=2, victim_state=state)
    print(f"victim={state}: depth {c.depth}, victim X count {c.count(1, 'X')}")
    print("   ", c.to_json())

# %% [markdown]
# ## Exact vs sampled adversary marginals

# %%
for state in (0, 1):
    c = build_reference_circuit(dev, 1, 2, state)
    exact = marginal(exact_distribution(c, dev), 2)
    table = run(c, dev, shots=8192, seed=state)
    print(f"V{state}: exact p1={exact.p1:.5f}  one run p1={marginal(table, 2).p1:.5f}")

# %% [markdown]
# ## Pooled signatures (37 repetitions x 8192 shots per label)

# %%
refs = collect_references(dev, victims=1, adversary=2, repetitions=37, shots=8192, seed=0)
for label, sig in refs.items():
    print(f"V{label}: p1={sig.distribution.p1:.5f} over {sig.shots} shots")

# %% [markdown]
# Non-adjacent pairs still separate, only more weakly (Q0 sensed from Q4).

# %%
far = collect_references(dev, victims=0, adversary=4, repetitions=37, shots=8192, seed=1)
print({lab: round(s.distribution.p1, 5) for lab, s in far.items()})
