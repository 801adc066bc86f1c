import numpy as np
import pytest

from camsel.errors import ConfigError, TrainingError
from camsel.features.synth import MarkovOcclusion
from camsel.model.config import ModelConfig
from camsel.model.losses import class_weights
from camsel.model.network import CameraSelector
from camsel.training.loop import TrainConfig, lr_on_plateau, train
from tests.conftest import small_scenario, windowed_batches


def small_model(input_dim, **over):
    base = dict(
        input_dim=input_dim,
        d_model=16,
        num_blocks=1,
        top_k=2,
        dropout=0.1,
        lookback=12,
        horizon=6,
        cameras=6,
        conv_channels=8,
        kernel_sizes=(1, 3),
    )
    base.update(over)
    return ModelConfig(**base)


def clean_scenario(**over):
    return small_scenario(
        length=240,
        visual_dim=4,
        noise_sigma=0.0,
        feature_noise=0.0,
        detection_jitter=0.0,
        distractor_rate=0.0,
        markov=MarkovOcclusion(amplitude=0.0),
        **over,
    )


class TestLrOnPlateau:
    def test_improving_history_unchanged(self):
        losses = [1.0, 0.8, 0.6, 0.4]
        assert lr_on_plateau(losses, 1e-3, 0.5, 2) == 1e-3

    def test_two_epoch_plateau_halves(self):
        losses = [1.0, 1.0, 1.0]
        assert lr_on_plateau(losses, 1e-3, 0.5, 2) == pytest.approx(5e-4)

    def test_repeated_plateaus_clamp_at_floor(self):
        losses = [1.0] * 100
        lr = lr_on_plateau(losses, 1e-3, 0.5, 2, floor=1e-6)
        assert lr == 1e-6
        assert lr > 0.0

    def test_counter_resets_after_decay(self):
        # epochs 2-3 plateau -> one decay; 4 improves; 5-6 plateau -> second
        losses = [1.0, 1.0, 1.0, 0.5, 0.5, 0.5]
        assert lr_on_plateau(losses, 1e-3, 0.5, 2) == pytest.approx(2.5e-4)

    def test_bad_factor_rejected(self):
        with pytest.raises(ConfigError):
            lr_on_plateau([1.0], 1e-3, 1.5, 2)


def _quick_setup(scenario=None, **model_over):
    _, batches = windowed_batches(scenario or clean_scenario())
    cfg = small_model(batches["train"].inputs.shape[2], **model_over)
    model = CameraSelector(cfg, seed=0)
    hist = np.bincount(batches["train"].flat_targets, minlength=6)
    weights = class_weights(np.maximum(hist, 0))
    return model, batches, weights


def test_separable_pattern_reaches_high_training_accuracy():
    model, batches, weights = _quick_setup()
    config = TrainConfig(max_epochs=30, patience=30, lr=3e-3, seed=0)
    result = train(model, batches["train"], batches["train"], config, weights)
    best_acc = max(r.val_accuracy for r in result.history)
    assert best_acc >= 0.95


def test_patience_one_with_flat_loss_stops_after_epoch_two():
    model, batches, weights = _quick_setup()
    config = TrainConfig(max_epochs=10, patience=1, lr=1e-13, seed=0)
    result = train(model, batches["train"], batches["validation"], config, weights)
    assert len(result.history) == 2
    assert result.stopped_early


def test_same_seed_identical_history():
    runs = []
    for _ in range(2):
        model, batches, weights = _quick_setup()
        config = TrainConfig(max_epochs=3, patience=3, seed=7)
        result = train(model, batches["train"], batches["validation"], config, weights)
        runs.append([(r.train_loss, r.val_loss, r.val_accuracy, r.lr) for r in result.history])
    assert runs[0] == runs[1]


def test_divergent_loss_reports_context():
    model, batches, weights = _quick_setup()
    batches["train"].inputs[0, 0, 0] = np.nan
    config = TrainConfig(max_epochs=2, patience=2, seed=0)
    with pytest.raises(TrainingError) as err:
        train(model, batches["train"], batches["validation"], config, weights)
    assert "epoch 1" in str(err.value)


def test_returned_checkpoint_is_best_recorded():
    model, batches, weights = _quick_setup()
    config = TrainConfig(max_epochs=6, patience=6, lr=5e-3, seed=1)
    result = train(model, batches["train"], batches["validation"], config, weights)
    from camsel.training.loop import _eval_loss

    final_loss, _ = _eval_loss(result.model, batches["validation"], weights)
    recorded = [r.val_loss for r in result.history]
    assert final_loss <= min(recorded) + 1e-12


def test_empty_windows_rejected():
    model, batches, weights = _quick_setup()
    from camsel.training.datasets import WindowBatch

    empty = WindowBatch(
        inputs=np.zeros((0, 12, batches["train"].inputs.shape[2])),
        targets=np.zeros((0, 6), dtype=np.int64),
        target_inputs=np.zeros((0, 6, batches["train"].inputs.shape[2])),
    )
    with pytest.raises(ConfigError):
        train(model, empty, batches["validation"], TrainConfig(), weights)


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(patience=20, max_epochs=10).validate()
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(lr_decay_factor=1.0).validate()
