"""Simulated device: qubits, coupling graph and every noise parameter.

Readout crosstalk follows a pairwise additive model. When a source qubit is
in state 1 it raises both flip probabilities of the observer by
``crosstalk[(observer, source)]``. Preset devices set that coefficient to
``gamma_adjacent * decay ** (d - 1)``, where ``d`` is the graph distance.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import networkx as nx

__all__ = [
    "ConfusionPair",
    "DeviceModel",
    "DeviceError",
    "load_device",
    "preset",
    "PRESETS",
    "effective_confusion",
    "decay_crosstalk",
    "noiseless",
]

PRESETS = ("linear5", "tee5")

DEFAULT_P01 = 0.015
DEFAULT_P10 = 0.04
DEFAULT_GAMMA = 0.010
DEFAULT_DECAY = 0.5
DEFAULT_GATE_ERROR = 5e-4
DEFAULT_GATE_TIME_NS = 50.0
DEFAULT_T1_US = 100.0

_FILE_FIELDS = {"name", "qubits", "edges", "readout", "crosstalk",
                "gate_error", "gate_time_ns", "t1_us"}


class DeviceError(ValueError):
    """Invalid device description (bad file, out-of-range value, bad topology)."""


def _check_prob(value: float, what: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise DeviceError(f"probability out of range: {what} = {value!r}")
    return value


@dataclass(frozen=True)
class ConfusionPair:
    """Single-qubit readout error.

    ``p01`` is P(read 1 | true 0), ``p10`` is P(read 0 | true 1).
    """

    p01: float
    p10: float

    def __post_init__(self):
        _check_prob(self.p01, "p01")
        _check_prob(self.p10, "p10")

    @property
    def matrix(self):
        """Column-stochastic assignment matrix ``A[observed, true]``."""
        import numpy as np

        return np.array([[1.0 - self.p01, self.p10],
                         [self.p01, 1.0 - self.p10]])


@dataclass(frozen=True)
class DeviceModel:
    """Topology plus noise parameters of a simulated device.

    Treat instances as immutable. Use :meth:`replace` or the helpers in this
    module to derive variants for sweeps.

    Attributes
    ----------
    name : str
    qubits : tuple of int
    edges : frozenset of (int, int)
        Unordered coupling pairs, stored as sorted tuples.
    readout : dict int -> ConfusionPair
    crosstalk : dict (observer, source) -> float
        Missing pairs mean zero crosstalk.
    gate_error : dict int -> float
        Depolarizing probability per non-identity single-qubit gate.
    gate_time_ns : float
        Duration of one timestep.
    t1_us : dict int -> float
        Relaxation constant; ``math.inf`` disables relaxation.
    """

    name: str
    qubits: tuple
    edges: frozenset
    readout: Mapping[int, ConfusionPair]
    crosstalk: Mapping[tuple, float] = field(default_factory=dict)
    gate_error: Mapping[int, float] = field(default_factory=dict)
    gate_time_ns: float = DEFAULT_GATE_TIME_NS
    t1_us: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(set(qubits)) != len(qubits) or not qubits:
            raise DeviceError(f"qubits must be a non-empty list of unique ids, got {self.qubits!r}")
        object.__setattr__(self, "qubits", qubits)
        edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        qset = set(qubits)
        for a, b in edges:
            if a not in qset or b not in qset:
                raise DeviceError(f"edge ({a}, {b}) references an undeclared qubit")
            if a == b:
                raise DeviceError(f"self-loop edge ({a}, {b})")
        if not nx.is_connected(self.graph):
            raise DeviceError("coupling graph not connected")

        readout = {int(q): c for q, c in self.readout.items()}
        missing = qset - set(readout)
        if missing:
            raise DeviceError(f"readout missing for qubits {sorted(missing)}")
        object.__setattr__(self, "readout", readout)

        crosstalk = {}
        for (obs, src), g in self.crosstalk.items():
            obs, src = int(obs), int(src)
            if obs not in qset or src not in qset or obs == src:
                raise DeviceError(f"crosstalk pair {obs}->{src} invalid")
            crosstalk[(obs, src)] = _check_prob(g, f"crosstalk[{obs}->{src}]")
        object.__setattr__(self, "crosstalk", crosstalk)

        gate_error = {q: _check_prob(self.gate_error.get(q, 0.0), f"gate_error[{q}]")
                      for q in qubits}
        object.__setattr__(self, "gate_error", gate_error)

        if not self.gate_time_ns > 0:
            raise DeviceError(f"gate_time_ns must be > 0, got {self.gate_time_ns!r}")
        object.__setattr__(self, "gate_time_ns", float(self.gate_time_ns))

        t1 = {}
        for q in qubits:
            value = float(self.t1_us.get(q, math.inf))
            if not value > 0:
                raise DeviceError(f"t1_us[{q}] must be > 0, got {value!r}")
            t1[q] = value
        object.__setattr__(self, "t1_us", t1)

    @property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.qubits)
        g.add_edges_from(self.edges)
        return g

    def distance(self, a: int, b: int) -> int:
        return nx.shortest_path_length(self.graph, a, b)

    def gamma(self, observer: int, source: int) -> float:
        return self.crosstalk.get((observer, source), 0.0)

    def decay_probability(self, qubit: int) -> float:
        """Amplitude-damping probability for one timestep on ``qubit``."""
        return -math.expm1(-self.gate_time_ns * 1e-3 / self.t1_us[qubit])

    def replace(self, **changes) -> "DeviceModel":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "DeviceModel":
        """Check that worst-case crosstalk shifts keep flips within [0, 1].

        Construction only checks individual values. Loaders call this, but
        parameter sweeps skip it and clamp at runtime instead.
        """
        for obs in self.qubits:
            total = sum(self.gamma(obs, src) for src in self.qubits if src != obs)
            c = self.readout[obs]
            for label, p in (("p01", c.p01), ("p10", c.p10)):
                if p + total > 1.0:
                    raise DeviceError(
                        f"probability out of range: readout[{obs}].{label} + crosstalk "
                        f"= {p + total!r} with all sources in state 1")
        return self

    def to_dict(self) -> dict:
        """Calibration-file representation (see :func:`load_device`)."""
        return {
            "name": self.name,
            "qubits": list(self.qubits),
            "edges": sorted([list(e) for e in self.edges]),
            "readout": {str(q): {"p01": c.p01, "p10": c.p10}
                        for q, c in sorted(self.readout.items())},
            "crosstalk": {f"{o}->{s}": g for (o, s), g in sorted(self.crosstalk.items())},
            "gate_error": {str(q): e for q, e in sorted(self.gate_error.items())},
            "gate_time_ns": self.gate_time_ns,
            "t1_us": {str(q): (t if math.isfinite(t) else None)
                      for q, t in sorted(self.t1_us.items())},
        }

    def fingerprint(self) -> str:
        """Stable SHA-256 over the canonical calibration JSON."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def decay_crosstalk(qubits, edges, gamma_adjacent=DEFAULT_GAMMA, decay=DEFAULT_DECAY):
    """Crosstalk map with ``gamma_adjacent * decay**(d-1)`` for every ordered pair."""
    g = nx.Graph()
    g.add_nodes_from(qubits)
    g.add_edges_from(edges)
    dist = dict(nx.all_pairs_shortest_path_length(g))
    return {(a, b): gamma_adjacent * decay ** (dist[a][b] - 1)
            for a in qubits for b in qubits if a != b and b in dist[a]}


_TOPOLOGIES = {
    "linear5": [(0, 1), (1, 2), (2, 3), (3, 4)],
    # Approximation of a T-shaped 5-qubit layout
    "tee5": [(0, 1), (1, 2), (1, 3), (3, 4)],
}


def preset(name: str, *, p01=DEFAULT_P01, p10=DEFAULT_P10, gamma_adjacent=DEFAULT_GAMMA,
           decay=DEFAULT_DECAY, gate_error=DEFAULT_GATE_ERROR,
           gate_time_ns=DEFAULT_GATE_TIME_NS, t1_us=DEFAULT_T1_US) -> DeviceModel:
    """Build a preset 5-qubit device.

    ``linear5`` is the path Q0-Q1-Q2-Q3-Q4. ``tee5`` has edges Q0-Q1, Q1-Q2,
    Q1-Q3 and Q3-Q4. It only approximates the published T-shaped layout. The
    keyword arguments override the default noise levels.
    """
    if name not in _TOPOLOGIES:
        raise DeviceError(f"unknown preset {name!r}; choose from {PRESETS}")
    edges = _TOPOLOGIES[name]
    qubits = tuple(range(5))
    return DeviceModel(
        name=name,
        qubits=qubits,
        edges=frozenset(edges),
        readout={q: ConfusionPair(p01, p10) for q in qubits},
        crosstalk=decay_crosstalk(qubits, edges, gamma_adjacent, decay),
        gate_error={q: gate_error for q in qubits},
        gate_time_ns=gate_time_ns,
        t1_us={q: t1_us for q in qubits},
    ).validate()


def noiseless(device: DeviceModel, *, readout=True, crosstalk=True, gates=True,
              relaxation=True) -> DeviceModel:
    """Copy of ``device`` with the selected noise sources switched off."""
    changes = {}
    if readout:
        changes["readout"] = {q: ConfusionPair(0.0, 0.0) for q in device.qubits}
    if crosstalk:
        changes["crosstalk"] = {}
    if gates:
        changes["gate_error"] = {q: 0.0 for q in device.qubits}
    if relaxation:
        changes["t1_us"] = {q: math.inf for q in device.qubits}
    return device.replace(**changes)


def effective_confusion(device: DeviceModel, observer: int,
                        source_states: Mapping[int, int]) -> ConfusionPair:
    """Readout error of ``observer`` given the true states of other qubits.

    Both flip probabilities are raised by ``sum(gamma(observer, j) * s_j)``
    and clamped to [0, 1].
    """
    if observer not in device.readout:
        raise DeviceError(f"unknown qubit {observer!r}")
    if observer in source_states:
        raise DeviceError(f"observer {observer} must not appear in source_states")
    shift = 0.0
    for q, s in source_states.items():
        if q not in device.readout:
            raise DeviceError(f"unknown qubit {q!r}")
        if s:
            shift += device.gamma(observer, q)
    base = device.readout[observer]
    if shift == 0.0:
        return base
    return ConfusionPair(min(max(base.p01 + shift, 0.0), 1.0),
                         min(max(base.p10 + shift, 0.0), 1.0))


def _parse_pair(key: str) -> tuple:
    try:
        a, b = key.split("->")
        return int(a), int(b)
    except ValueError:
        raise DeviceError(f"crosstalk key {key!r} is not of the form 'a->b'") from None


def _per_qubit(value, qubits, what):
    if isinstance(value, Mapping):
        return {int(k): (math.inf if v is None else v) for k, v in value.items()}
    if isinstance(value, (int, float)):
        return {q: value for q in qubits}
    raise DeviceError(f"{what} must be a number or a per-qubit object")


def device_from_dict(data: Mapping) -> DeviceModel:
    """Build and validate a device from the calibration-file structure."""
    if not isinstance(data, Mapping):
        raise DeviceError("calibration document must be a JSON object")
    unknown = set(data) - _FILE_FIELDS
    if unknown:
        raise DeviceError(f"unknown fields: {sorted(unknown)}")
    missing = {"name", "qubits", "edges", "readout"} - set(data)
    if missing:
        raise DeviceError(f"missing fields: {sorted(missing)}")
    qubits = [int(q) for q in data["qubits"]]
    edges = [tuple(e) for e in data["edges"]]
    for e in edges:
        if len(e) != 2:
            raise DeviceError(f"edge {list(e)!r} must have two endpoints")

    readout = {}
    for q, entry in data["readout"].items():
        if set(entry) != {"p01", "p10"}:
            raise DeviceError(f"readout[{q}] must have exactly p01 and p10")
        p01 = _check_prob(entry["p01"], f"readout[{q}].p01")
        p10 = _check_prob(entry["p10"], f"readout[{q}].p10")
        readout[int(q)] = ConfusionPair(p01, p10)

    # Either explicit pairs, or {"adjacent", "decay", "overrides"}.
    raw = data.get("crosstalk", {})
    if "adjacent" in raw:
        extra = set(raw) - {"adjacent", "decay", "overrides"}
        if extra:
            raise DeviceError(f"unknown crosstalk fields: {sorted(extra)}")
        crosstalk = decay_crosstalk(qubits, edges, raw["adjacent"], raw.get("decay", DEFAULT_DECAY))
        crosstalk.update({_parse_pair(k): v for k, v in raw.get("overrides", {}).items()})
    else:
        crosstalk = {_parse_pair(k): v for k, v in raw.items()}

    return DeviceModel(
        name=str(data["name"]),
        qubits=tuple(qubits),
        edges=frozenset(edges),
        readout=readout,
        crosstalk=crosstalk,
        gate_error=_per_qubit(data.get("gate_error", 0.0), qubits, "gate_error"),
        gate_time_ns=data.get("gate_time_ns", DEFAULT_GATE_TIME_NS),
        t1_us=_per_qubit(data.get("t1_us", math.inf), qubits, "t1_us"),
    ).validate()


def load_device(path) -> DeviceModel:
    """Load a calibration JSON file.

    A bare preset file name such as ``"linear5.json"`` that does not exist on
    disk resolves to the bundled copy.
    """
    path = Path(path)
    if path.exists():
        text = path.read_text()
    else:
        bundled = resources.files("qsense.presets").joinpath(path.name)
        if path.parent != Path(".") or not bundled.is_file():
            raise DeviceError(f"calibration file not found: {path}")
        text = bundled.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DeviceError(f"cannot parse {path}: {exc}") from exc
    return device_from_dict(data)
