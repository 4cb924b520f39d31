"""Shot sampling and exact outcome distributions for single-qubit circuits.

Each qubit evolves on its own 2x2 density matrix. Every timestep applies
the gate unitary, then depolarizing noise (non-identity gates only), then
amplitude damping. Idle timesteps only damp. Readout noise is applied last.
Each measured qubit's flip probabilities are shifted by crosstalk from the
*pre-readout* bits of the other measured qubits.

Shots are drawn in fixed-size blocks. Each block has its own random stream
seeded from ``(seed, block_index)``. The result does not depend on how many
workers share the blocks.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .device import DeviceError, DeviceModel
from .stats import BinaryDistribution

__all__ = ["ShotTable", "OutcomeDistribution", "SimulationError", "populations",
           "ideal_bits", "run", "exact_distribution", "marginal", "crosstalk_matrix",
           "BLOCK_SIZE", "MAX_EXACT_QUBITS"]

BLOCK_SIZE = 4096
MAX_EXACT_QUBITS = 12

_RHO0 = np.array([[1, 0], [0, 0]], dtype=complex)
_MIXED = np.eye(2, dtype=complex) / 2


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class ShotTable:
    """Raw per-shot readout; column ``i`` of ``rows`` belongs to ``qubits[i]``."""

    circuit_id: str
    qubits: tuple
    rows: np.ndarray
    seed: int

    @property
    def shots(self) -> int:
        return int(self.rows.shape[0])

    def bitstrings(self) -> list:
        return ["".join(map(str, r)) for r in self.rows.tolist()]

    def counts(self) -> dict:
        weights = 1 << np.arange(len(self.qubits) - 1, -1, -1)
        codes = self.rows.astype(np.int64) @ weights
        hist = np.bincount(codes, minlength=2 ** len(self.qubits))
        width = len(self.qubits)
        return {format(i, f"0{width}b"): int(c) for i, c in enumerate(hist) if c}

    def ones(self, qubit: int) -> int:
        return int(self.rows[:, self._column(qubit)].sum())

    def _column(self, qubit: int) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise SimulationError(f"qubit {qubit} was not measured") from None

    def to_summary(self) -> dict:
        return {"circuit_id": self.circuit_id, "seed": self.seed, "shots": self.shots,
                "qubits": list(self.qubits), "counts": self.counts()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["circuit_id", "seed", "shot"] + [f"q{q}" for q in self.qubits])
        for i, row in enumerate(self.rows.tolist()):
            w.writerow([self.circuit_id, self.seed, i] + row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ShotTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        qubits = tuple(int(h[1:]) for h in header[3:])
        body = list(reader)
        if not body:
            raise SimulationError("shot CSV has no rows")
        rows = np.array([[int(x) for x in r[3:]] for r in body], dtype=np.uint8)
        return cls(body[0][0], qubits, rows, int(body[0][1]))

    def to_json(self) -> str:
        return json.dumps(self.to_summary(), sort_keys=True)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact joint readout distribution, keyed by bitstring over ``qubits``."""

    qubits: tuple
    probabilities: dict

    def __post_init__(self):
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > 1e-12 or min(self.probabilities.values()) < 0:
            raise SimulationError(f"probabilities do not form a distribution (sum={total!r})")

    def vector(self) -> np.ndarray:
        width = len(self.qubits)
        return np.array([self.probabilities.get(format(i, f"0{width}b"), 0.0)
                         for i in range(2 ** width)])


def _evolve(track, eps: float, p_decay: float) -> np.ndarray:
    rho = _RHO0.copy()
    keep = np.sqrt(1.0 - p_decay)
    for gate in track:
        if gate is not None and not gate.is_idle:
            u = gate.unitary
            rho = u @ rho @ u.conj().T
            if eps:
                rho = (1.0 - eps) * rho + eps * _MIXED
        if p_decay:
            rho = np.array([[rho[0, 0] + p_decay * rho[1, 1], keep * rho[0, 1]],
                            [keep * rho[1, 0], (1.0 - p_decay) * rho[1, 1]]])
    return rho


def _check(circuit: Circuit, device: DeviceModel):
    for q in circuit.qubits:
        if q not in device.qubits:
            raise DeviceError(f"unknown qubit {q} for device {device.name!r}")


def populations(circuit: Circuit, device: DeviceModel) -> np.ndarray:
    """P(pre-readout bit = 1) for each measured qubit."""
    _check(circuit, device)
    p1 = []
    for q in circuit.measured:
        rho = _evolve(circuit.track(q), device.gate_error[q], device.decay_probability(q))
        p1.append(min(max(rho[1, 1].real, 0.0), 1.0))
    return np.array(p1)


def ideal_bits(circuit: Circuit) -> tuple:
    """Noiseless computational-basis output of each measured qubit."""
    bits = []
    for q in circuit.measured:
        psi = np.array([1, 0], dtype=complex)
        for g in circuit.track(q):
            if g is not None:
                psi = g.unitary @ psi
        p1 = abs(psi[1]) ** 2
        if min(p1, 1 - p1) > 1e-9:
            raise SimulationError(f"qubit {q} does not end in a basis state (P1={p1:.3f})")
        bits.append(int(round(p1)))
    return tuple(bits)


def crosstalk_matrix(device: DeviceModel, qubits) -> np.ndarray:
    """``G[i, j] = gamma(qubits[i], qubits[j])``, zero on the diagonal."""
    return np.array([[device.gamma(a, b) if a != b else 0.0 for b in qubits] for a in qubits])


def _readout_params(device, qubits):
    p01 = np.array([device.readout[q].p01 for q in qubits])
    p10 = np.array([device.readout[q].p10 for q in qubits])
    return p01, p10, crosstalk_matrix(device, qubits)


def _sample_block(seed, block, n, p1, p01, p10, gamma):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    k = p1.size
    pre = rng.random((n, k)) < p1
    shift = pre.astype(float) @ gamma.T
    flip_p = np.where(pre, np.clip(p10 + shift, 0.0, 1.0), np.clip(p01 + shift, 0.0, 1.0))
    flips = rng.random((n, k)) < flip_p
    return (pre ^ flips).astype(np.uint8)


def run(circuit: Circuit, device: DeviceModel, shots: int, seed: int,
        workers: int = 1) -> ShotTable:
    """Sample ``shots`` readouts of ``circuit`` on ``device``."""
    if shots < 1:
        raise SimulationError(f"shots must be >= 1, got {shots}")
    seed = int(seed)
    p1 = populations(circuit, device)
    p01, p10, gamma = _readout_params(device, circuit.measured)
    sizes = [min(BLOCK_SIZE, shots - start) for start in range(0, shots, BLOCK_SIZE)]
    args = [(seed, b, n, p1, p01, p10, gamma) for b, n in enumerate(sizes)]
    if workers > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _sample_block(*a), args))
    else:
        blocks = [_sample_block(*a) for a in args]
    return ShotTable(circuit.circuit_id, circuit.measured, np.concatenate(blocks), seed)


def exact_distribution(circuit: Circuit, device: DeviceModel) -> OutcomeDistribution:
    """Exact joint readout distribution, enumerating pre-readout bitstrings."""
    k = len(circuit.measured)
    if k > MAX_EXACT_QUBITS:
        raise SimulationError(f"exact distribution limited to {MAX_EXACT_QUBITS} measured qubits, got {k}")
    p1 = populations(circuit, device)
    p01, p10, gamma = _readout_params(device, circuit.measured)
    out = np.zeros(2 ** k)
    for bits in itertools.product((0, 1), repeat=k):
        b = np.array(bits)
        weight = float(np.prod(np.where(b == 1, p1, 1.0 - p1)))
        if weight == 0.0:
            continue
        shift = gamma @ b
        flip = np.where(b == 1, np.clip(p10 + shift, 0, 1), np.clip(p01 + shift, 0, 1))
        # per-qubit observed (P(read 0), P(read 1))
        joint = np.ones(1)
        for bi, f in zip(bits, flip):
            col = np.array([f, 1.0 - f]) if bi else np.array([1.0 - f, f])
            joint = np.kron(joint, col)
        out += weight * joint
    out /= out.sum()
    probs = {format(i, f"0{k}b"): float(v) for i, v in enumerate(out)}
    return OutcomeDistribution(circuit.measured, probs)


def marginal(data, qubit: int) -> BinaryDistribution:
    """Single-qubit outcome frequencies from a ShotTable or OutcomeDistribution."""
    if isinstance(data, ShotTable):
        return BinaryDistribution.from_counts(data.ones(qubit), data.shots)
    if isinstance(data, OutcomeDistribution):
        if qubit not in data.qubits:
            raise SimulationError(f"qubit {qubit} was not measured")
        i = data.qubits.index(qubit)
        p1 = sum(p for s, p in data.probabilities.items() if s[i] == "1")
        p1 = min(max(p1, 0.0), 1.0)
        return BinaryDistribution(1.0 - p1, p1)
    raise TypeError(f"cannot take a marginal of {type(data).__name__}")
