import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsense.device import (ConfusionPair, DeviceError, DeviceModel, device_from_dict,
                           effective_confusion, load_device, noiseless, preset)


def _calib(**over):
    doc = preset("linear5").to_dict()
    doc.update(over)
    return doc


def test_linear5_file_is_path_graph():
    dev = load_device("linear5.json")
    assert dev.qubits == (0, 1, 2, 3, 4)
    assert dev.edges == {(0, 1), (1, 2), (2, 3), (3, 4)}
    assert dev.distance(0, 4) == 4


def test_bundled_files_match_presets():
    for name in ("linear5", "tee5"):
        assert load_device(f"{name}.json").fingerprint() == preset(name).fingerprint()


def test_preset_shapes():
    assert preset("linear5").edges == {(0, 1), (1, 2), (2, 3), (3, 4)}
    tee = preset("tee5")
    assert len(tee.qubits) == 5
    assert tee.edges == {(0, 1), (1, 2), (1, 3), (3, 4)}


def test_preset_crosstalk_decay():
    dev = preset("linear5")
    assert dev.crosstalk[(0, 4)] == pytest.approx(0.010 * 0.5 ** 3)
    assert dev.crosstalk[(0, 4)] == pytest.approx(0.00125)
    assert dev.crosstalk[(1, 2)] == pytest.approx(0.010)
    assert dev.crosstalk[(2, 0)] == pytest.approx(0.005)


def test_preset_defaults():
    dev = preset("tee5")
    assert dev.readout[3] == ConfusionPair(0.015, 0.04)
    assert dev.gate_error[0] == 5e-4
    assert dev.gate_time_ns == 50.0
    assert dev.t1_us[4] == 100.0
    assert dev.decay_probability(0) == pytest.approx(1 - math.exp(-0.05 / 100))


def test_unknown_preset():
    with pytest.raises(DeviceError, match="unknown preset"):
        preset("falcon27")


def test_probability_out_of_range(tmp_path):
    doc = _calib()
    doc["readout"]["0"]["p01"] = 1.3
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DeviceError, match=r"probability out of range.*readout\[0\]\.p01.*1\.3"):
        load_device(path)


def test_disconnected_graph(tmp_path):
    path = tmp_path / "split.json"
    path.write_text(json.dumps(_calib(edges=[[0, 1], [1, 2], [3, 4]])))
    with pytest.raises(DeviceError, match="coupling graph not connected"):
        load_device(path)


def test_unknown_field_rejected():
    with pytest.raises(DeviceError, match="unknown fields"):
        device_from_dict(_calib(vendor="ibm"))


def test_edge_to_undeclared_qubit():
    with pytest.raises(DeviceError, match="undeclared"):
        device_from_dict(_calib(edges=[[0, 1], [1, 2], [2, 3], [3, 4], [4, 7]]))


def test_parse_failure(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(DeviceError, match="cannot parse"):
        load_device(path)


def test_missing_file():
    with pytest.raises(DeviceError, match="not found"):
        load_device("/nonexistent/dev.json")


def test_explicit_crosstalk_pairs_and_overrides():
    doc = _calib(crosstalk={"0->1": 0.02, "1->0": 0.001})
    dev = device_from_dict(doc)
    assert dev.gamma(0, 1) == 0.02 and dev.gamma(1, 0) == 0.001
    assert dev.gamma(0, 4) == 0.0
    dev = device_from_dict(_calib(crosstalk={"adjacent": 0.01, "decay": 0.5,
                                             "overrides": {"4->0": 0.03}}))
    assert dev.gamma(4, 0) == 0.03
    assert dev.gamma(0, 4) == pytest.approx(0.00125)


def test_worst_case_crosstalk_validated():
    doc = _calib(crosstalk={"adjacent": 0.5})
    with pytest.raises(DeviceError, match="all sources in state 1"):
        device_from_dict(doc)


def test_round_trip_through_dict():
    dev = preset("tee5")
    assert device_from_dict(dev.to_dict()).fingerprint() == dev.fingerprint()


def test_nonpositive_t1_rejected():
    dev = preset("linear5")
    with pytest.raises(DeviceError, match="t1_us"):
        dev.replace(t1_us={q: 0.0 for q in dev.qubits})


class TestEffectiveConfusion:
    def test_victim_one_shifts_p10(self):
        c = effective_confusion(preset("linear5"), 2, {1: 1})
        assert c.p10 == pytest.approx(0.05)
        assert c.p01 == pytest.approx(0.025)

    def test_all_sources_zero_is_base(self):
        dev = preset("linear5")
        assert effective_confusion(dev, 2, {0: 0, 1: 0, 3: 0, 4: 0}) == dev.readout[2]
        assert effective_confusion(dev, 2, {}) == dev.readout[2]

    def test_two_sources_add(self):
        dev = preset("linear5")
        assert effective_confusion(dev, 2, {1: 1, 3: 1}).p10 == pytest.approx(0.06)

    def test_unknown_qubit(self):
        with pytest.raises(DeviceError, match="unknown qubit"):
            effective_confusion(preset("linear5"), 9, {})
        with pytest.raises(DeviceError, match="unknown qubit"):
            effective_confusion(preset("linear5"), 0, {9: 1})

    def test_observer_in_sources(self):
        with pytest.raises(DeviceError):
            effective_confusion(preset("linear5"), 0, {0: 1})

    def test_clamps_at_runtime(self):
        dev = preset("linear5")
        hot = dev.replace(crosstalk={(0, 1): 0.99})
        c = effective_confusion(hot, 0, {1: 1})
        assert c.p01 == 1.0 and c.p10 == 1.0


@settings(max_examples=200, deadline=None)
@given(p01=st.floats(0, 1), p10=st.floats(0, 1),
       gammas=st.lists(st.floats(0, 1), min_size=4, max_size=4),
       states=st.lists(st.integers(0, 1), min_size=4, max_size=4),
       extra=st.integers(1, 4))
def test_effective_confusion_clamped_and_monotone(p01, p10, gammas, states, extra):
    qubits = tuple(range(5))
    dev = DeviceModel("t", qubits, frozenset({(0, 1), (1, 2), (2, 3), (3, 4)}),
                      {q: ConfusionPair(p01, p10) for q in qubits},
                      {(0, j): g for j, g in zip(range(1, 5), gammas)})
    sources = dict(zip(range(1, 5), states))
    c = effective_confusion(dev, 0, sources)
    assert 0 <= c.p01 <= 1 and 0 <= c.p10 <= 1
    more = dict(sources)
    more[extra] = 1
    c2 = effective_confusion(dev, 0, more)
    assert c2.p01 >= c.p01 and c2.p10 >= c.p10


def test_confusion_matrix_columns_sum_to_one():
    m = ConfusionPair(0.013, 0.071).matrix
    assert (m.sum(axis=0) == 1.0).all()


def test_noiseless_switches():
    dev = noiseless(preset("linear5"))
    assert all(c == ConfusionPair(0, 0) for c in dev.readout.values())
    assert dev.crosstalk == {}
    assert set(dev.gate_error.values()) == {0.0}
    assert dev.decay_probability(0) == 0.0
