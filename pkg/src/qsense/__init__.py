"""Readout-crosstalk qubit sensing: simulation, JSD attack and output-flip defense."""

from .attack import (
    ClassificationResult,
    Signature,
    classify,
    collect_references,
    run_attack_experiment,
    separability,
)
from .circuit import (
    Circuit,
    Gate,
    RBSpec,
    build_multi_rb_circuit,
    build_multi_victim_reference,
    build_rb_circuit,
    build_reference_circuit,
)
from .clifford import clifford_compose, clifford_inverse
from .defense import (
    FidelityReport,
    FlipMask,
    apply_countermeasure,
    attack_under_defense,
    fidelity_overhead,
    unflip,
)
from .device import ConfusionPair, DeviceModel, effective_confusion, load_device, noiseless, preset
from .simulator import exact_distribution, marginal, run
from .stats import BinaryDistribution, accuracy, jsd, kl

__version__ = "0.1.0"
