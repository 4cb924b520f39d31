"""``qsense`` command line: collect, attack, defend, report.

Settings come from defaults, then an optional JSON ``--config`` file, then
flags, with later sources taking precedence. Every output file records the
resolved config, the seed, the device fingerprint and the toolkit version.
Outputs contain no timestamps, so reruns produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .attack import (Signature, collect_references, plan_batches, results_csv,
                     run_attack_experiment, separability, victim_labels)
from .defense import attack_under_defense, fidelity_overhead, fidelity_test_circuits
from .device import PRESETS, DeviceError, load_device, preset

logger = logging.getLogger("qsense")

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_RUNTIME = 0, 2, 3, 4

REFERENCES_FILE = "references.json"
ATTACK_SUMMARY_FILE = "attack_summary.json"
ATTACK_CSV_FILE = "attack_tests.csv"
DEFENSE_FILE = "defense_report.json"


class ConfigError(ValueError):
    pass


class MismatchError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    device: str = "linear5"
    victims: list = field(default_factory=lambda: [1])
    adversary: int = 2
    shots: int = 8192
    reps: int = 37
    tests: int = 200
    depth_range: list = field(default_factory=lambda: [1, 10])
    seed: int = 0
    defense: bool = True
    fidelity_circuits: int = 20
    workers: int = 1
    out: str = "results"

    def load_device(self):
        try:
            if self.device in PRESETS:
                return preset(self.device)
            return load_device(self.device)
        except DeviceError as exc:
            raise ConfigError(f"device: {exc}") from exc

    def validate(self, device) -> None:
        if not self.victims:
            raise ConfigError("victims: at least one victim qubit is required")
        for q in list(self.victims) + [self.adversary]:
            if q not in device.qubits:
                name = "adversary" if q == self.adversary else "victims"
                raise ConfigError(f"{name}: qubit {q} is not on device {device.name!r} "
                                  f"(qubits {list(device.qubits)})")
        if self.adversary in self.victims or len(set(self.victims)) != len(self.victims):
            raise ConfigError(f"victims/adversary: qubits must be distinct, got victims="
                              f"{self.victims} adversary={self.adversary}")
        for name in ("shots", "reps", "tests", "fidelity_circuits", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1, got {getattr(self, name)}")
        lo, hi = self.depth_range
        if not 1 <= lo <= hi:
            raise ConfigError(f"depth_range: need 1 <= lo <= hi, got {self.depth_range}")

    def provenance(self) -> dict:
        d = asdict(self)
        # neither affects the results
        d.pop("workers")
        d.pop("out")
        return d


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "true", "1", "yes"):
        return True
    if text.lower() in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qsense {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config file")
    common.add_argument("--device", help=f"preset ({', '.join(PRESETS)}) or calibration JSON path")
    common.add_argument("--seed", type=int)
    common.add_argument("--shots", type=int)
    common.add_argument("--reps", type=int, help="reference repetitions per label")
    common.add_argument("--tests", type=int, help="number of RB test circuits")
    common.add_argument("--victims", type=_int_list, help="comma-separated victim qubits")
    common.add_argument("--adversary", type=int)
    common.add_argument("--defense", type=_on_off, help="on/off")
    common.add_argument("--depth-range", dest="depth_range", type=_int_list, help="lo,hi")
    common.add_argument("--workers", type=int, help="threads for simulation")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("collect", parents=[common], help="collect reference signatures")
    sub.add_parser("attack", parents=[common], help="classify RB victims against references")
    sub.add_parser("defend", parents=[common], help="fidelity overhead and defended accuracy")
    sub.add_parser("report", parents=[common], help="re-render summaries from stored results")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for name in known:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if len(cfg.depth_range) != 2:
        raise ConfigError(f"depth_range: expected two values, got {cfg.depth_range}")
    return cfg


def _header(cfg: ExperimentConfig, device) -> dict:
    return {"toolkit": {"name": "qsense", "version": __version__},
            "config": cfg.provenance(), "seed": cfg.seed,
            "device_hash": device.fingerprint()}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_collect(cfg: ExperimentConfig, device) -> Path:
    refs = collect_references(device, cfg.victims, cfg.adversary, cfg.reps, cfg.shots,
                              cfg.seed, cfg.workers)
    sep = separability(refs, seed=cfg.seed)
    doc = _header(cfg, device)
    doc.update({
        "device": device.to_dict(),
        "victims": list(cfg.victims),
        "adversary": cfg.adversary,
        "batches": plan_batches(len(refs) * cfg.reps),
        "signatures": {lab: s.to_dict() for lab, s in refs.items()},
        "separability": {"labels": sep.labels, "jsd": sep.matrix.tolist(),
                         "noise_floor": sep.floor, "verdict": sep.verdict},
    })
    path = Path(cfg.out) / REFERENCES_FILE
    _write(path, _dump(doc))
    return path


def load_references(cfg: ExperimentConfig, device) -> dict:
    path = Path(cfg.out) / REFERENCES_FILE
    if not path.exists():
        raise MismatchError(f"no references at {path}; run `qsense collect` first")
    doc = json.loads(path.read_text())
    if doc["device_hash"] != device.fingerprint():
        raise MismatchError(f"reference/device mismatch: {path} was collected on device "
                            f"{doc['device_hash'][:12]}, config device is {device.fingerprint()[:12]}")
    if doc["victims"] != list(cfg.victims) or doc["adversary"] != cfg.adversary:
        raise MismatchError(f"reference/device mismatch: references are for victims "
                            f"{doc['victims']} adversary {doc['adversary']}")
    refs = {lab: Signature.from_dict(s) for lab, s in doc["signatures"].items()}
    if sorted(refs) != victim_labels(len(cfg.victims)):
        raise MismatchError(f"references are missing labels: have {sorted(refs)}")
    return refs


def cmd_attack(cfg: ExperimentConfig, device) -> tuple:
    refs = load_references(cfg, device)
    report = run_attack_experiment(device, refs, cfg.tests, tuple(cfg.depth_range), cfg.shots,
                                   cfg.seed, cfg.workers)
    doc = _header(cfg, device)
    doc.update(report.to_dict())
    out = Path(cfg.out)
    _write(out / ATTACK_SUMMARY_FILE, _dump(doc))
    _write(out / ATTACK_CSV_FILE, report.to_csv())
    return out / ATTACK_SUMMARY_FILE, out / ATTACK_CSV_FILE


def cmd_defend(cfg: ExperimentConfig, device) -> Path:
    refs = collect_references(device, cfg.victims, cfg.adversary, cfg.reps, cfg.shots,
                              cfg.seed, cfg.workers)
    depth = tuple(cfg.depth_range)
    undefended = run_attack_experiment(device, refs, cfg.tests, depth, cfg.shots, cfg.seed,
                                       cfg.workers)
    defended = attack_under_defense(device, refs, cfg.tests, cfg.shots, cfg.seed, depth,
                                    enabled=cfg.defense, workers=cfg.workers)
    circuits = fidelity_test_circuits(device, cfg.victims, cfg.adversary,
                                      cfg.fidelity_circuits, depth, cfg.seed)
    fid = fidelity_overhead(device, circuits, cfg.shots, cfg.seed, victims=cfg.victims)
    doc = _header(cfg, device)
    doc.update(fid.to_dict())
    doc.update({"adversary_accuracy_defended": defended.accuracy,
                "adversary_accuracy_undefended": undefended.accuracy,
                "n_tests": cfg.tests, "chance_level": 2.0 ** -len(cfg.victims)})
    path = Path(cfg.out) / DEFENSE_FILE
    _write(path, _dump(doc))
    return path


def cmd_report(cfg: ExperimentConfig, stream=None) -> list:
    stream = stream or sys.stdout
    out = Path(cfg.out)
    found = []
    ref_path = out / REFERENCES_FILE
    if ref_path.exists():
        doc = json.loads(ref_path.read_text())
        found.append(ref_path)
        print(f"references ({ref_path}): victims {doc['victims']} adversary {doc['adversary']}",
              file=stream)
        for lab, s in sorted(doc["signatures"].items()):
            print(f"  V{lab}: p1={s['p1']:.5f} over {s['repetitions'] * s['shots_per_rep']} shots",
                  file=stream)
        print(f"  separability: {doc['separability']['verdict']}", file=stream)
    summary_path = out / ATTACK_SUMMARY_FILE
    if summary_path.exists():
        doc = json.loads(summary_path.read_text())
        found.append(summary_path)
        _write(out / ATTACK_CSV_FILE, results_csv(doc["tests"]))
        s = doc["summary"]
        print(f"attack ({summary_path}): accuracy {s['accuracy']:.4f} over {s['n_tests']} tests",
              file=stream)
    defense_path = out / DEFENSE_FILE
    if defense_path.exists():
        doc = json.loads(defense_path.read_text())
        found.append(defense_path)
        print(f"defense ({defense_path}): fidelity loss {100 * doc['loss']:.4f}%, accuracy "
              f"{doc['adversary_accuracy_undefended']:.4f} -> {doc['adversary_accuracy_defended']:.4f}",
              file=stream)
    if not found:
        raise MismatchError(f"no stored results in {out}")
    return found


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "report":
            cmd_report(cfg)
            return EXIT_OK
        device = cfg.load_device()
        cfg.validate(device)
        if args.command == "collect":
            print(cmd_collect(cfg, device))
        elif args.command == "attack":
            for p in cmd_attack(cfg, device):
                print(p)
        elif args.command == "defend":
            print(cmd_defend(cfg, device))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except Exception as exc:  # noqa: BLE001
        logger.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
