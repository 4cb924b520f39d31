"""Victim side: random output inversion and what it costs in fidelity.

Each job gets a fresh uniform mask over the protected qubits. Every masked
qubit receives an X on a new final timestep, and every unmasked protected
qubit idles there. The victim knows the mask and XORs it back out of the
results. The adversary's gates are never touched.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attack import derive_seed, rb_tests, run_attack_experiment
from .circuit import Circuit, Gate, RBSpec, build_multi_rb_circuit
from .device import noiseless
from .simulator import ShotTable, exact_distribution, ideal_bits, run

__all__ = ["FlipMask", "FidelityReport", "apply_countermeasure", "unflip",
           "fidelity_overhead", "fidelity_test_circuits", "attack_under_defense"]


@dataclass(frozen=True)
class FlipMask:
    qubits: tuple
    bits: tuple
    seed: int | None = None

    def __post_init__(self):
        if len(self.qubits) != len(self.bits):
            raise ValueError(f"mask has {len(self.bits)} bits for {len(self.qubits)} qubits")

    @property
    def label(self) -> str:
        return "".join(map(str, self.bits))


@dataclass
class FidelityReport:
    fidelity_with_flip: float
    fidelity_without_flip: float
    components: dict = field(default_factory=dict)

    @property
    def loss(self) -> float:
        return self.fidelity_without_flip - self.fidelity_with_flip

    def to_dict(self) -> dict:
        return {"fidelity_with": self.fidelity_with_flip,
                "fidelity_without": self.fidelity_without_flip,
                "loss": self.loss, "loss_components": self.components}


def apply_countermeasure(circuit: Circuit, protected, seed: int | None = None,
                         mask=None) -> tuple:
    """Append a random inversion layer to the protected qubits.

    ``mask`` (a bit sequence) overrides the random draw.

    Returns
    -------
    (Circuit, FlipMask)
    """
    protected = tuple(int(q) for q in protected)
    for q in protected:
        if q not in circuit.qubits:
            raise ValueError(f"protected qubit {q} is not in the circuit")
    if mask is None:
        rng = np.random.default_rng(seed)
        bits = tuple(int(b) for b in rng.integers(0, 2, size=len(protected)))
    else:
        bits = tuple(int(b) for b in mask)
    flip = FlipMask(protected, bits, seed)
    t = circuit.depth
    extra = [Gate("X" if b else "I", q, t) for q, b in zip(protected, bits)]
    return Circuit(circuit.qubits, circuit.gates + tuple(extra), circuit.measured), flip


def unflip(shots: ShotTable, mask: FlipMask) -> ShotTable:
    """Undo the inversion on the masked columns."""
    rows = shots.rows.copy()
    for q, b in zip(mask.qubits, mask.bits):
        if q not in shots.qubits:
            raise ValueError(f"mask qubit {q} was not measured")
        if b:
            rows[:, shots.qubits.index(q)] ^= 1
    return ShotTable(shots.circuit_id, shots.qubits, rows, shots.seed)


def _fidelity(table: ShotTable, victims, ideal) -> float:
    cols = [table.qubits.index(q) for q in victims]
    return float(np.mean(np.all(table.rows[:, cols] == np.asarray(ideal), axis=1)))


def _exact_fidelity(circuit, device, victims, ideal, mask=None) -> float:
    dist = exact_distribution(circuit, device)
    cols = [circuit.measured.index(q) for q in victims]
    want = dict(zip(victims, ideal))
    if mask is not None:
        for q, b in zip(mask.qubits, mask.bits):
            want[q] ^= b
    return sum(p for s, p in dist.probabilities.items()
               if all(int(s[c]) == want[q] for c, q in zip(cols, victims)))


def fidelity_test_circuits(device, victims, adversary: int, n: int = 20, depth_range=(1, 10),
                           seed: int = 0) -> list:
    """RB circuits whose victims alternate between ideal outputs 0 and 1."""
    victims = tuple(victims)
    circuits = []
    for i, test in enumerate(rb_tests(n, len(victims), depth_range, seed)):
        specs = [RBSpec(s.m, i % 2, s.seed) for s in test.specs]
        circuits.append(build_multi_rb_circuit(specs, victims, adversary, device))
    return circuits


def fidelity_overhead(device, circuits, shots: int = 8192, seed: int = 0, victims=None,
                      flip: str = "all") -> FidelityReport:
    """Mean fidelity with and without the inversion layer.

    Fidelity is the fraction of shots whose victim bits, after unflipping,
    equal the ideal output. Both runs of a circuit share one seed.
    ``flip="all"`` inverts every protected qubit. ``flip="random"`` draws
    masks the way a deployed victim would. ``victims`` defaults to all
    measured qubits except the last one, which every builder reserves for
    the adversary.

    ``components`` holds the exact expected loss when only gate error,
    only relaxation, or only readout noise is enabled.
    """
    circuits = list(circuits)
    if not circuits:
        raise ValueError("empty test set")
    if flip not in ("all", "random"):
        raise ValueError(f"flip must be 'all' or 'random', got {flip!r}")
    only = {
        "gate": noiseless(device, gates=False),
        "relaxation": noiseless(device, relaxation=False),
        "readout": noiseless(device, readout=False, crosstalk=False),
    }
    f_with, f_without = [], []
    comps = dict.fromkeys(only, 0.0)
    for i, circuit in enumerate(circuits):
        vics = tuple(victims) if victims is not None else circuit.measured[:-1]
        ideal = [b for q, b in zip(circuit.measured, ideal_bits(circuit)) if q in vics]
        s = derive_seed(seed, "fidelity", i)
        mask = [1] * len(vics) if flip == "all" else None
        protected, fm = apply_countermeasure(circuit, vics, derive_seed(s, "mask"), mask)
        f_without.append(_fidelity(run(circuit, device, shots, s), vics, ideal))
        f_with.append(_fidelity(unflip(run(protected, device, shots, s), fm), vics, ideal))
        for name, dev in only.items():
            comps[name] += (_exact_fidelity(circuit, dev, vics, ideal)
                            - _exact_fidelity(protected, dev, vics, ideal, fm))
    n = len(circuits)
    return FidelityReport(float(np.mean(f_with)), float(np.mean(f_without)),
                          {k: v / n for k, v in comps.items()})


def attack_under_defense(device, references: dict, n_tests: int = 400, shots: int = 8192,
                         seed: int = 0, depth_range=(1, 10), enabled: bool = True,
                         force_mask=None, workers: int = 1):
    """Run the JSD attack against victims that randomly invert their outputs.

    The adversary's references carry no knowledge of the masks, and
    predictions are scored against the ideal (unflipped) output.
    ``enabled=False`` leaves circuits untouched. ``force_mask`` pins every
    job's mask.
    """
    victims = next(iter(references.values())).victims

    def protect(circuit, test):
        if enabled:
            circuit, _ = apply_countermeasure(circuit, victims, derive_seed(test.seed, "mask"),
                                              force_mask)
        return circuit, test.truth

    return run_attack_experiment(device, references, n_tests, depth_range, shots, seed,
                                 workers, transform=protect)
