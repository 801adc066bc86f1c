import numpy as np
import pytest

from camsel.errors import ProtocolError
from camsel.model.config import ModelConfig
from camsel.model.network import CameraSelector
from camsel.training.evaluation import (
    build_report,
    config_fingerprint,
    evaluate_model,
    evaluate_predictions,
    predict_sequence,
    report_from_dict,
)
from tests.conftest import small_scenario, windowed_batches


def test_oracle_predictor_scores_one():
    _, batches = windowed_batches(small_scenario(length=120))
    test = batches["test"]
    result = evaluate_predictions(test.targets, test.targets)
    assert result.accuracy == 1.0
    assert result.total == test.targets.size


def test_constant_predictor_scores_class_frequency():
    _, batches = windowed_batches(small_scenario(length=150))
    targets = batches["test"].targets
    constant = np.zeros_like(targets)
    result = evaluate_predictions(constant, targets)
    # independent recount of camera 0's share of the horizon labels
    expected = float((targets == 0).sum()) / targets.size
    assert result.accuracy == pytest.approx(expected)


def test_random_uniform_predictor_within_3_sigma(rng):
    n = 10_000
    targets = rng.integers(0, 6, size=(n // 4, 4))
    predictions = rng.integers(0, 6, size=targets.shape)
    result = evaluate_predictions(predictions, targets)
    sigma = np.sqrt((1 / 6) * (5 / 6) / n)
    assert abs(result.accuracy - 1 / 6) <= 3 * sigma


def test_empty_test_set_rejected():
    with pytest.raises(ProtocolError):
        evaluate_predictions(np.zeros((0, 6)), np.zeros((0, 6)))


def test_chance_rate_reported_from_same_labels():
    _, batches = windowed_batches(small_scenario(length=150))
    targets = batches["test"].targets
    result = evaluate_predictions(np.zeros_like(targets), targets)
    counts = np.bincount(targets.reshape(-1), minlength=6)
    assert result.chance_rate == pytest.approx(counts.max() / targets.size)


def test_evaluate_model_runs(rng):
    _, batches = windowed_batches(small_scenario(length=120, visual_dim=4))
    width = batches["test"].inputs.shape[2]
    cfg = ModelConfig(input_dim=width, d_model=8, num_blocks=1, top_k=2,
                      lookback=12, horizon=6, cameras=6, conv_channels=4,
                      kernel_sizes=(1,))
    model = CameraSelector(cfg, seed=0)
    result = evaluate_model(model, batches["test"])
    assert 0.0 <= result.accuracy <= 1.0


def test_predict_sequence_tiles_horizon_blocks(rng):
    cfg = ModelConfig(input_dim=5, d_model=8, num_blocks=1, top_k=2,
                      lookback=12, horizon=6, cameras=6, conv_channels=4,
                      kernel_sizes=(1,))
    model = CameraSelector(cfg, seed=0)
    feats = rng.normal(size=(40, 5))
    steps, labels = predict_sequence(model, feats)
    # starts 0, 6, 12, ... while start+18 <= 40 -> starts {0,6,12,18}
    assert steps.tolist() == list(range(12, 36))
    assert labels.shape == (24,)
    # each tile must match a direct window forward
    probs = model.predict_proba(feats[6:18][None])
    assert labels[6:12].tolist() == probs[0].argmax(axis=-1).tolist()


def test_predict_sequence_too_short():
    cfg = ModelConfig(input_dim=3, d_model=4, num_blocks=1, top_k=2,
                      lookback=12, horizon=6, cameras=6, conv_channels=4,
                      kernel_sizes=(1,))
    model = CameraSelector(cfg, seed=0)
    with pytest.raises(ProtocolError):
        predict_sequence(model, np.zeros((10, 3)))


def test_report_roundtrip_and_fingerprint():
    from camsel.training.evaluation import SurgeryRow

    rows = [
        SurgeryRow("s1", 0.9, 0.5, 10, 60),
        SurgeryRow("s2", 0.8, 0.4, 12, 72),
    ]
    config = {"protocol": "sequence_out", "seed": 3}
    report = build_report("sequence_out", "temporal", rows, config)
    assert report.average_accuracy == pytest.approx(0.85)
    assert report.fingerprint == config_fingerprint(config)
    back = report_from_dict(report.to_dict())
    assert back == report

    other = build_report("sequence_out", "temporal", rows, {"protocol": "x", "seed": 4})
    assert other.fingerprint != report.fingerprint
