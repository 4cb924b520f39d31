"""Timestep-gridded single-qubit circuits and the builders used by the attack.

Every qubit in a circuit is measured after the last timestep. A qubit
with no gate at a timestep sits idle for that timestep.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clifford import IDENTITY, N_CLIFFORD, UNITARIES, clifford_compose, clifford_inverse

__all__ = ["Gate", "Circuit", "RBSpec", "CircuitError",
           "build_reference_circuit", "build_multi_victim_reference",
           "build_rb_circuit", "build_multi_rb_circuit",
           "ONE_CHAIN", "ZERO_CHAIN"]

# X-chain lengths that prepare 1 (odd) and 0 (even)
ONE_CHAIN = 5
ZERO_CHAIN = 4

_KINDS = ("I", "X", "CLIFFORD")
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_I = np.eye(2, dtype=complex)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubit: int
    timestep: int
    index: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.timestep < 0:
            raise CircuitError(f"negative timestep {self.timestep}")
        if self.kind == "CLIFFORD":
            if self.index is None or not 0 <= self.index < N_CLIFFORD:
                raise CircuitError(f"Clifford index must be in [0, {N_CLIFFORD}), got {self.index!r}")
        elif self.index is not None:
            raise CircuitError(f"{self.kind} gate takes no index")

    @property
    def unitary(self) -> np.ndarray:
        if self.kind == "X":
            return _X
        if self.kind == "I":
            return _I
        return UNITARIES[self.index]

    @property
    def is_idle(self) -> bool:
        return self.kind == "I"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubit": self.qubit, "t": self.timestep}
        if self.kind == "CLIFFORD":
            d["index"] = self.index
        return d


@dataclass(frozen=True)
class Circuit:
    """Gates on a grid of (qubit, timestep); all ``qubits`` are measured.

    ``qubits`` fixes the bit order of every outcome string.
    """

    qubits: tuple
    gates: tuple
    measured: tuple = None
    depth: int = field(init=False)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"duplicate qubit ids in {qubits}")
        object.__setattr__(self, "qubits", qubits)
        for g in self.gates:
            if g.qubit not in qubits:
                raise CircuitError(f"gate on undeclared qubit {g.qubit}")
        gates = tuple(sorted(self.gates, key=lambda g: (g.timestep, qubits.index(g.qubit))))
        seen = set()
        for g in gates:
            if (g.qubit, g.timestep) in seen:
                raise CircuitError(f"two gates on qubit {g.qubit} at timestep {g.timestep}")
            seen.add((g.qubit, g.timestep))
        if not gates:
            raise CircuitError("circuit has no gates")
        object.__setattr__(self, "gates", gates)
        measured = qubits if self.measured is None else tuple(int(q) for q in self.measured)
        if not set(measured) <= set(qubits):
            raise CircuitError(f"measured qubits {measured} not all declared")
        # keep declaration order
        object.__setattr__(self, "measured", tuple(q for q in qubits if q in set(measured)))
        object.__setattr__(self, "depth", max(g.timestep for g in gates) + 1)

    def track(self, qubit: int) -> list:
        """Gate (or None when idle) at each timestep for ``qubit``."""
        col = [None] * self.depth
        for g in self.gates:
            if g.qubit == qubit:
                col[g.timestep] = g
        return col

    def count(self, qubit: int, kind: str) -> int:
        return sum(1 for g in self.gates if g.qubit == qubit and g.kind == kind)

    def to_dict(self) -> dict:
        return {"qubits": list(self.qubits),
                "gates": [g.to_dict() for g in self.gates],
                "measured": list(self.measured)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        gates = [Gate(g["kind"], int(g["qubit"]), int(g["t"]), g.get("index"))
                 for g in data["gates"]]
        return cls(tuple(data["qubits"]), tuple(gates), tuple(data["measured"]))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))

    @property
    def circuit_id(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RBSpec:
    """Randomized-benchmarking sequence of ``m`` Cliffords (last one inverts)."""

    m: int
    initial_state: int
    seed: int

    def __post_init__(self):
        if self.m < 1:
            raise CircuitError(f"RB length m must be >= 1, got {self.m}")
        if self.initial_state not in (0, 1):
            raise CircuitError(f"initial_state must be 0 or 1, got {self.initial_state!r}")

    def sequence(self) -> list:
        """Clifford indices: ``m - 1`` uniform draws plus the inverse of their product."""
        rng = np.random.default_rng(self.seed)
        draws = [int(i) for i in rng.integers(0, N_CLIFFORD, size=self.m - 1)]
        total = IDENTITY
        for c in draws:
            total = clifford_compose(total, c)
        return draws + [clifford_inverse(total)]


def _check_devices_qubits(device, qubits):
    if device is None:
        return
    for q in qubits:
        if q not in device.qubits:
            raise CircuitError(f"qubit {q} is not on device {device.name!r}")


def _check_distinct(victims, adversary):
    allq = list(victims) + [adversary]
    if len(set(allq)) != len(allq):
        raise CircuitError(f"victim and adversary qubits must be distinct, got victims={list(victims)} adversary={adversary}")


def _assemble(tracks: dict, adversary: int) -> Circuit:
    """Left-align victim tracks, pad with I, put the adversary X on the last timestep."""
    depth = max(len(t) for t in tracks.values())
    gates = []
    for q, kinds in tracks.items():
        padded = list(kinds) + [("I", None)] * (depth - len(kinds))
        gates.extend(Gate(kind, q, t, idx) for t, (kind, idx) in enumerate(padded))
    gates.append(Gate("X", adversary, depth - 1))
    return Circuit(tuple(tracks) + (adversary,), tuple(gates))


def build_multi_victim_reference(device, victims: Sequence[int], adversary: int,
                                 victim_states: Sequence[int]) -> Circuit:
    """Reference circuit preparing each victim with an odd (1) or even (0) X-chain."""
    victims = [int(v) for v in victims]
    if len(victims) != len(victim_states):
        raise CircuitError(f"{len(victims)} victims but {len(victim_states)} states")
    _check_distinct(victims, adversary)
    _check_devices_qubits(device, victims + [adversary])
    tracks = {}
    for v, s in zip(victims, victim_states):
        if s not in (0, 1):
            raise CircuitError(f"victim state must be 0 or 1, got {s!r}")
        tracks[v] = [("X", None)] * (ONE_CHAIN if s else ZERO_CHAIN)
    return _assemble(tracks, adversary)


def build_reference_circuit(device, victim: int, adversary: int, victim_state: int) -> Circuit:
    return build_multi_victim_reference(device, [victim], adversary, [victim_state])


def build_multi_rb_circuit(specs: Sequence[RBSpec], victims: Sequence[int], adversary: int,
                           device=None) -> Circuit:
    """One RB track per victim (state prep, then the Clifford sequence)."""
    victims = [int(v) for v in victims]
    if len(specs) != len(victims):
        raise CircuitError(f"{len(victims)} victims but {len(specs)} RB specs")
    _check_distinct(victims, adversary)
    _check_devices_qubits(device, victims + [adversary])
    tracks = {}
    for v, spec in zip(victims, specs):
        prep = ("X", None) if spec.initial_state else ("I", None)
        tracks[v] = [prep] + [("CLIFFORD", c) for c in spec.sequence()]
    return _assemble(tracks, adversary)


def build_rb_circuit(spec: RBSpec, victim: int, adversary: int, device=None) -> Circuit:
    return build_multi_rb_circuit([spec], [victim], adversary, device)
