"""Adversary side: reference signatures, JSD classification, separability.

The adversary sees only its own qubit. For every possible victim output it
records a pooled reference distribution of that qubit. An unknown run is
assigned to the reference at the smallest Jensen-Shannon distance.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import RBSpec, build_multi_rb_circuit, build_multi_victim_reference
from .simulator import marginal, run
from .stats import BinaryDistribution, accuracy, jsd

logger = logging.getLogger(__name__)

__all__ = ["Signature", "ClassificationResult", "AttackReport", "SeparabilityReport",
           "RBTest", "results_csv", "derive_seed", "victim_labels", "plan_batches", "collect_references",
           "classify", "rb_tests", "run_attack_experiment", "noise_floor_constant",
           "separability", "QUEUE_LIMIT"]

QUEUE_LIMIT = 75


def derive_seed(seed: int, *labels) -> int:
    """Independent 64-bit seed for the substream named by ``labels``."""
    words = [int(seed)] + [zlib.crc32(str(lab).encode()) for lab in labels]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def victim_labels(k: int) -> list:
    return ["".join(bits) for bits in itertools.product("01", repeat=k)]


def plan_batches(n_circuits: int, cap: int = QUEUE_LIMIT) -> list:
    """Split ``n_circuits`` submissions into queue-sized batches."""
    return [min(cap, n_circuits - i) for i in range(0, n_circuits, cap)]


@dataclass(frozen=True)
class Signature:
    """Pooled adversary outcome distribution for one victim label."""

    adversary: int
    victims: tuple
    label: str
    ones: int
    repetitions: int
    shots_per_rep: int

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if len(self.label) != len(self.victims):
            raise ValueError(f"label {self.label!r} does not match {len(self.victims)} victims")

    @property
    def shots(self) -> int:
        return self.repetitions * self.shots_per_rep

    @property
    def distribution(self) -> BinaryDistribution:
        return BinaryDistribution.from_counts(self.ones, self.shots)

    def to_dict(self) -> dict:
        d = self.distribution
        return {"adversary": self.adversary, "victims": list(self.victims), "label": self.label,
                "ones": self.ones, "repetitions": self.repetitions,
                "shots_per_rep": self.shots_per_rep, "p0": d.p0, "p1": d.p1}

    @classmethod
    def from_dict(cls, d: dict) -> "Signature":
        return cls(int(d["adversary"]), tuple(d["victims"]), d["label"], int(d["ones"]),
                   int(d["repetitions"]), int(d["shots_per_rep"]))


def _as_victims(victims) -> tuple:
    if isinstance(victims, (int, np.integer)):
        return (int(victims),)
    return tuple(int(v) for v in victims)


def collect_references(device, victims, adversary: int, repetitions: int = 37,
                       shots: int = 8192, seed: int = 0, workers: int = 1) -> dict:
    """Run every victim-label reference circuit and pool the adversary marginal."""
    victims = _as_victims(victims)
    labels = victim_labels(len(victims))
    batches = plan_batches(len(labels) * repetitions)
    logger.debug("reference collection: %d circuits in %d batches", sum(batches), len(batches))
    jobs = []
    for label in labels:
        circuit = build_multi_victim_reference(device, victims, adversary, [int(b) for b in label])
        jobs.extend((label, circuit, derive_seed(seed, "reference", label, rep))
                    for rep in range(repetitions))

    def one(job):
        label, circuit, s = job
        return label, run(circuit, device, shots, s).ones(adversary)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(one, jobs))
    else:
        counts = [one(j) for j in jobs]
    ones = dict.fromkeys(labels, 0)
    for label, n in counts:
        ones[label] += n
    return {lab: Signature(adversary, victims, lab, ones[lab], repetitions, shots)
            for lab in labels}


@dataclass
class ClassificationResult:
    scores: dict
    predicted: str
    delta_jsd: float | None = None
    truth: str | None = None
    depth: int | None = None
    circuit_seed: int | None = None

    @property
    def correct(self) -> bool:
        return self.truth is not None and self.predicted == self.truth

    def to_dict(self) -> dict:
        return {"circuit_seed": self.circuit_seed, "depth": self.depth, "truth": self.truth,
                "predicted": self.predicted, "scores": self.scores, "delta_jsd": self.delta_jsd}


def classify(references: dict, observed, truth: str | None = None) -> ClassificationResult:
    """Pick the reference label with the smallest JSD to ``observed``.

    References may be Signatures or plain distributions. Exact ties go to the
    lexicographically smallest label. With labels ``"0"``/``"1"``,
    ``delta_jsd = JSD0 - JSD1`` and the prediction is ``"1"`` iff it is positive.
    """
    if len(references) < 2:
        raise ValueError(f"need at least 2 reference labels, got {sorted(references)}")
    scores = {}
    for label in sorted(references):
        ref = references[label]
        dist = ref.distribution if isinstance(ref, Signature) else ref
        scores[label] = jsd(dist, observed)
    best = min(scores.values())
    tied = [lab for lab, s in scores.items() if s == best]
    if len(tied) > 1:
        logger.info("JSD tie between %s; choosing %s", tied, tied[0])
    delta = scores["0"] - scores["1"] if set(scores) == {"0", "1"} else None
    return ClassificationResult(scores, tied[0], delta, truth)


@dataclass(frozen=True)
class RBTest:
    """One RB test: the same length ``m`` on every victim, independent sequences."""

    specs: tuple
    seed: int

    @property
    def depth(self) -> int:
        return self.specs[0].m

    @property
    def truth(self) -> str:
        return "".join(str(s.initial_state) for s in self.specs)


def rb_tests(n_tests: int, n_victims: int = 1, depth_range=(1, 10), seed: int = 0) -> list:
    """Random RB test cases with uniform initial states and depths."""
    lo, hi = depth_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid depth range {depth_range!r}")
    tests = []
    for i in range(n_tests):
        s = derive_seed(seed, "test", i)
        rng = np.random.default_rng(s)
        m = int(rng.integers(lo, hi + 1))
        specs = tuple(RBSpec(m, int(rng.integers(0, 2)), derive_seed(s, "rb", v))
                      for v in range(n_victims))
        tests.append(RBTest(specs, s))
    return tests


@dataclass
class AttackReport:
    results: list
    accuracy: float
    meta: dict = field(default_factory=dict)

    @property
    def n_tests(self) -> int:
        return len(self.results)

    def to_dict(self) -> dict:
        return {"summary": {"accuracy": self.accuracy, "n_tests": self.n_tests, **self.meta},
                "tests": [r.to_dict() for r in self.results]}

    def to_csv(self) -> str:
        return results_csv([r.to_dict() for r in self.results])


def results_csv(rows) -> str:
    """Per-test CSV (delta JSD, truth, prediction) from ``to_dict`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["test", "circuit_seed", "depth", "truth", "predicted", "delta_jsd", "correct"])
    for i, row in enumerate(rows):
        d = row["delta_jsd"]
        w.writerow([i, row["circuit_seed"], row["depth"], row["truth"], row["predicted"],
                    "" if d is None else repr(d), int(row["truth"] == row["predicted"])])
    return buf.getvalue()


def run_attack_experiment(device, references: dict, n_tests: int = 200, depth_range=(1, 10),
                          shots: int = 8192, seed: int = 0, workers: int = 1,
                          transform=None) -> AttackReport:
    """Classify the victim output of ``n_tests`` random RB circuits.

    Ground truth is each victim's prepared initial state, which an ideal RB
    sequence returns. ``transform(circuit, test)`` can rewrite the victim
    circuit before execution. The countermeasure uses it, and it must return
    ``(circuit, truth)``.
    """
    sig = next(iter(references.values()))
    victims, adversary = sig.victims, sig.adversary
    tests = rb_tests(n_tests, len(victims), depth_range, seed)

    def one(test: RBTest) -> ClassificationResult:
        circuit = build_multi_rb_circuit(test.specs, victims, adversary, device)
        truth = test.truth
        if transform is not None:
            circuit, truth = transform(circuit, test)
        table = run(circuit, device, shots, derive_seed(test.seed, "shots"))
        res = classify(references, marginal(table, adversary), truth)
        res.depth, res.circuit_seed = test.depth, test.seed
        return res

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, tests))
    else:
        results = [one(t) for t in tests]
    return AttackReport(results, accuracy(results),
                        {"victims": list(victims), "adversary": adversary, "shots": shots,
                         "depth_range": list(depth_range), "seed": seed})


def noise_floor_constant(distributions, shots: int, n_pairs: int = 2000,
                         quantile: float = 0.99, seed: int = 0) -> float:
    """Constant ``c`` such that ``c / sqrt(shots)`` bounds same-label JSD.

    For each distribution, pairs of independent ``shots``-sample estimates
    are drawn. ``c`` is the ``quantile`` of their pooled JSD times
    ``sqrt(shots)``.
    """
    rng = np.random.default_rng(derive_seed(seed, "noise-floor"))
    values = []
    for dist in distributions:
        p1 = float(np.asarray(dist)[1])
        a = rng.binomial(shots, p1, size=n_pairs) / shots
        b = rng.binomial(shots, p1, size=n_pairs) / shots
        values.extend(jsd((1 - x, x), (1 - y, y)) for x, y in zip(a, b))
    return float(np.quantile(values, quantile)) * np.sqrt(shots)


@dataclass
class SeparabilityReport:
    labels: list
    matrix: np.ndarray
    floor: float
    c: float
    shots: int

    @property
    def feasible(self) -> bool:
        off = self.matrix[~np.eye(len(self.labels), dtype=bool)]
        return bool(np.all(off > self.floor))

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def closest_pair(self) -> tuple:
        m = self.matrix + np.diag(np.full(len(self.labels), np.inf))
        i, j = np.unravel_index(np.argmin(m), m.shape)
        return self.labels[i], self.labels[j], float(self.matrix[i, j])


def separability(references: dict, shots: int | None = None, n_pairs: int = 2000,
                 quantile: float = 0.99, seed: int = 0) -> SeparabilityReport:
    """Pairwise JSD between references against the sampling-noise floor.

    ``shots`` is the sample size that each compared distribution is
    estimated from. It defaults to the references' pooled shot count.
    Sensing is infeasible when some pair sits at or below ``c / sqrt(shots)``.
    """
    labels = sorted(references)
    if len(labels) < 2:
        raise ValueError("separability needs at least 2 labels")
    dists = [references[lab].distribution if isinstance(references[lab], Signature)
             else references[lab] for lab in labels]
    if shots is None:
        shots = min(references[lab].shots for lab in labels)
    matrix = np.array([[jsd(a, b) for b in dists] for a in dists])
    c = noise_floor_constant(dists, shots, n_pairs, quantile, seed)
    return SeparabilityReport(labels, matrix, c / np.sqrt(shots), c, shots)
