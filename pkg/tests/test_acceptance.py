"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line. The lines are printed in the pytest
terminal summary. Run ``pytest tests/test_acceptance.py`` to see only these.
"""
import time

import numpy as np
import pytest

from qsense.attack import collect_references, run_attack_experiment, separability
from qsense.circuit import RBSpec, build_rb_circuit
from qsense.cli import main
from qsense.clifford import N_CLIFFORD, UNITARIES, clifford_compose, clifford_inverse
from qsense.defense import attack_under_defense, fidelity_overhead, fidelity_test_circuits
from qsense.device import noiseless, preset
from qsense.simulator import exact_distribution, run
from qsense.stats import jsd, tvd

from test_simulator import random_circuit

SHOTS = 8192
REPS = 37
VICTIM, ADVERSARY = 1, 2

CRITERIA = []


def record(number, name, ok, detail):
    CRITERIA.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def device():
    return preset("linear5")


def test_1_attack_accuracy(device):
    start = time.perf_counter()
    refs = collect_references(device, VICTIM, ADVERSARY, REPS, SHOTS, seed=0)
    report = run_attack_experiment(device, refs, 200, (1, 10), SHOTS, seed=0)
    elapsed = time.perf_counter() - start
    record(1, "attack accuracy", report.accuracy >= 0.90 and elapsed < 60,
           f"accuracy {report.accuracy:.3f} (>= 0.90) in {elapsed:.1f} s (< 60 s)")


def test_2_chance_level_without_crosstalk(device):
    flat = device.replace(crosstalk={})
    refs = collect_references(flat, VICTIM, ADVERSARY, REPS, SHOTS, seed=0)
    acc = run_attack_experiment(flat, refs, 200, (1, 10), SHOTS, seed=0).accuracy
    record(2, "chance-level control", 0.40 <= acc <= 0.60, f"accuracy {acc:.3f} in [0.40, 0.60]")


def test_3_defense_efficacy(device):
    one = attack_under_defense(device, collect_references(device, [VICTIM], ADVERSARY, REPS, SHOTS, 0),
                               400, SHOTS, seed=0).accuracy
    two = attack_under_defense(device, collect_references(device, [VICTIM, 0], ADVERSARY, REPS, SHOTS, 0),
                               400, SHOTS, seed=0).accuracy
    record(3, "defense efficacy", 0.40 <= one <= 0.60 and 0.15 <= two <= 0.35,
           f"1 qubit {one:.3f} in [0.40, 0.60]; 2 qubits {two:.3f} in [0.15, 0.35]")


def test_4_fidelity_overhead(device):
    assert device.gate_error[VICTIM] == 5e-4
    losses = []
    for seed in range(20):
        circuits = fidelity_test_circuits(device, [VICTIM], ADVERSARY, 20, seed=seed)
        losses.append(fidelity_overhead(device, circuits, SHOTS, seed=seed).loss)
    mean = float(np.mean(losses))
    circuits = fidelity_test_circuits(device, [VICTIM], ADVERSARY, 20, seed=0)
    quiet = fidelity_overhead(noiseless(device), circuits, SHOTS, seed=0).loss
    record(4, "fidelity overhead", mean <= 0.002 and quiet == 0.0,
           f"mean loss {100 * mean:.4f}% over 20 seeds (<= 0.2%, target ~0.05%); "
           f"noise-free loss {quiet!r}")


def test_5_jsd_metric_suite():
    rng = np.random.default_rng(0)
    triples = rng.dirichlet(np.ones(4), size=(10_000, 3))
    identity = all(jsd(p, p) == 0.0 for p, _, _ in triples[:1000])
    symmetry = max(abs(jsd(p, q) - jsd(q, p)) for p, q, _ in triples)
    in_range = all(0.0 <= jsd(p, q) <= 1.0 for p, q, _ in triples)
    triangle = all(jsd(p, r) <= jsd(p, q) + jsd(q, r) + 1e-12 for p, q, r in triples)
    value = jsd((0.5, 0.5), (1, 0))
    ok = identity and symmetry <= 1e-15 and in_range and triangle and abs(value - 0.557923) <= 1e-6
    record(5, "JSD metric suite", ok,
           f"identity={identity} max asymmetry={symmetry:.1e} range={in_range} "
           f"triangle={triangle} jsd((.5,.5),(1,0))={value:.7f}")


def test_6_oracle_equivalence(device):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(50):
        c = random_circuit(rng, max_qubits=3, max_depth=10)
        exact = exact_distribution(c, device).vector()
        emp = np.zeros_like(exact)
        for s, n in run(c, device, SHOTS, seed=i).counts().items():
            emp[int(s, 2)] = n / SHOTS
        worst = max(worst, tvd(emp, exact))
    record(6, "oracle equivalence", worst <= 0.03, f"max TVD {worst:.4f} over 50 circuits (<= 0.03)")


def test_7_rb_correctness(device):
    quiet = noiseless(device)
    rng = np.random.default_rng(7)
    failures = 0
    for i in range(100):
        spec = RBSpec(int(rng.integers(1, 11)), int(rng.integers(0, 2)), seed=i)
        table = run(build_rb_circuit(spec, VICTIM, ADVERSARY, quiet), quiet, 256, seed=i)
        failures += int((table.rows[:, 0] != spec.initial_state).any())
    table_ok = True
    for a in range(N_CLIFFORD):
        for b in range(N_CLIFFORD):
            prod = UNITARIES[b] @ UNITARIES[a]
            overlap = abs(np.trace(UNITARIES[clifford_compose(a, b)].conj().T @ prod))
            table_ok &= abs(overlap - 2) < 1e-9
        table_ok &= clifford_compose(a, clifford_inverse(a)) == 0
    record(7, "RB correctness", failures == 0 and table_ok,
           f"{100 - failures}/100 noiseless RB circuits return initial state every shot; "
           f"24x24 table verified={table_ok}")


def test_8_multi_victim_separability(device):
    two = separability(collect_references(device, [VICTIM, 0], ADVERSARY, REPS, SHOTS, 0), seed=0)
    three = separability(collect_references(device, [VICTIM, 0, 3], ADVERSARY, REPS, SHOTS, 0), seed=0)
    a, b, d = three.closest_pair()
    record(8, "multi-victim separability", two.feasible and not three.feasible,
           f"2 victims {two.verdict} (min JSD {two.closest_pair()[2]:.4f} > floor {two.floor:.4f}); "
           f"3 victims {three.verdict} ({a} vs {b}: {d:.5f} <= floor {three.floor:.4f})")


def test_9_cli_determinism(tmp_path):
    args = ["--reps", "6", "--shots", "4096", "--tests", "40", "--seed", "3"]
    snapshots = []
    for i, workers in enumerate((1, 4, 1)):
        out = tmp_path / f"run{i}"
        for cmd in ("collect", "attack", "defend"):
            assert main([cmd, "--out", str(out), "--workers", str(workers), *args]) == 0
        snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = snapshots[0] == snapshots[1] == snapshots[2]
    record(9, "determinism", same,
           f"{len(snapshots[0])} result files byte-identical across 3 runs (workers 1/4/1)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
