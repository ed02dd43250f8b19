"""End-to-end smoke tests for the python bindings."""

import json
import math

import pytest

import slimnet

SPEC = json.dumps(
    {
        "input_shape": [6],
        "layers": [
            {"kind": "dense", "neurons": 8},
            {"kind": "relu"},
            {"kind": "classifier", "neurons": 3},
        ],
        "loss": "cross_entropy",
    }
)


def test_soft_threshold_matches_fixture():
    out = slimnet.soft_threshold([3.0, -0.5, -2.0], 1.0)
    assert list(out) == [2.0, 0.0, -1.0]


def test_prox_group_shrinks_by_the_closed_form():
    lam = 2.5 / math.sqrt(2.0)
    out = slimnet.prox_group([3.0, 4.0], 1.0, lam, 0.0)
    assert out[0] == pytest.approx(1.5, abs=1e-12)
    assert out[1] == pytest.approx(2.0, abs=1e-12)

    killed = slimnet.prox_group([0.6, 0.8], 1.0, 2.0 / math.sqrt(2.0), 0.0)
    assert killed == [0.0, 0.0]


def test_network_roundtrip_and_predict():
    spec = slimnet.NetworkSpec.from_json(SPEC)
    net = slimnet.Network.random_init(spec, 7)
    again = slimnet.Network.random_init(spec, 7)
    assert net.flat_params() == again.flat_params()
    assert net.param_count() == 8 * 7 + 3 * 9

    logits = net.predict([0.1, -0.2, 0.3, 0.0, 1.0, -1.0])
    assert len(logits) == 3

    flat = net.flat_params()
    other = slimnet.Network.zeros(spec)
    other.set_flat_params(flat)
    assert other.flat_params() == flat


def test_checkpoint_roundtrip(tmp_path):
    net = slimnet.Network.random_init(slimnet.NetworkSpec.from_json(SPEC), 11)
    path = str(tmp_path / "net.bin")
    slimnet.save_checkpoint(net, path)
    back = slimnet.load_checkpoint(path)
    assert back.flat_params() == net.flat_params()


def test_missing_checkpoint_maps_to_value_error():
    with pytest.raises(ValueError):
        slimnet.load_checkpoint("/nonexistent/net.bin")


def test_synthetic_teacher_labels_its_own_data_perfectly():
    inputs, labels, teacher = slimnet.synth_teacher_student(
        input_dim=6, teacher_hidden=4, classes=3, count=60, seed=2
    )
    assert inputs.shape == (60, 6)
    assert len(labels) == 60
    assert set(labels) == {0, 1, 2}
    assert slimnet.evaluate(teacher, inputs, labels) == 1.0


def test_dead_detection_and_compaction():
    net = slimnet.Network.random_init(slimnet.NetworkSpec.from_json(SPEC), 13)
    flat = net.flat_params()
    flat[0:7] = [0.0] * 7  # first hidden group: 6 weights and the bias
    net.set_flat_params(flat)
    per_layer, total = slimnet.detect_dead(net)
    assert total == 1
    assert per_layer[0] == [0]

    compacted, kept = slimnet.compact(net)
    assert kept[0] == list(range(1, 8))
    assert compacted.param_count() == 7 * 7 + 3 * 8

    report = json.loads(slimnet.report_json(net, compacted, 0.9, 0.9))
    assert report["per_layer_neuron_counts"] == [[8, 7]]
    assert report["accuracy_gap"] == 0.0


def test_regularizer_value_known_case():
    spec = slimnet.NetworkSpec.from_json(
        json.dumps(
            {
                "input_shape": [2],
                "layers": [
                    {"kind": "dense", "neurons": 1},
                    {"kind": "relu"},
                    {"kind": "classifier", "neurons": 2},
                ],
            }
        )
    )
    net = slimnet.Network.zeros(spec)
    flat = net.flat_params()
    flat[0], flat[1] = 3.0, 4.0
    net.set_flat_params(flat)
    value = slimnet.regularizer_value(net, 0.0, [2.0])
    assert value == pytest.approx(2.0 * math.sqrt(3.0) * 5.0, rel=1e-12)


def test_run_experiment_json_end_to_end():
    config = {
        "network": json.loads(SPEC),
        "data": {
            "source": "synthetic",
            "teacher_hidden": 3,
            "train_count": 50,
            "val_count": 30,
            "seed": 5,
        },
        "training": {"epochs": 2, "batch_size": 10, "initial_lr": 0.05, "momentum": 0.9, "seed": 3},
        "regularizer": {"lambda": 0.05},
        "paired_baseline": True,
    }
    result = slimnet.run_experiment_json(json.dumps(config))
    assert result["epochs"] == 2
    assert 0.0 <= result["val_accuracy"] <= 1.0
    assert 0.0 <= result["baseline_val_accuracy"] <= 1.0
    report = json.loads(result["report_json"])
    assert set(report) >= {"neurons_pct", "total_induced_pct", "accuracy_gap"}

    with pytest.raises(ValueError):
        slimnet.run_experiment_json("{}")


def test_prox_trials_agree_with_oracle():
    summary = slimnet.run_prox_trials(100, 2026)
    assert summary["trials"] == 100
    assert summary["ok"]
    assert summary["max_param_err"] <= 1e-6
