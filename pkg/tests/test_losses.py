import math

import numpy as np
import pytest
import torch

from camsel.errors import CamselError, ShapeError
from camsel.model.losses import class_weights, one_hot, weighted_cross_entropy


class TestClassWeights:
    def test_balanced_all_ones(self):
        w = class_weights(np.array([25, 25, 25, 25]))
        assert np.allclose(w, 1.0)

    def test_90_10_example(self):
        w = class_weights(np.array([90, 10]))
        # raw weights total/(C*count) = (5/9, 5); normalized to mean 1
        assert np.allclose(w, [0.2, 1.8])
        assert abs(w.mean() - 1.0) < 1e-9

    def test_absent_class_gets_max(self):
        w = class_weights(np.array([50, 50, 0]))
        assert w[2] == pytest.approx(w.max())
        assert abs(w.mean() - 1.0) < 1e-9

    def test_minority_gets_larger_weight(self):
        w = class_weights(np.array([100, 10, 1]))
        assert w[2] > w[1] > w[0]

    def test_all_zero_rejected(self):
        with pytest.raises(CamselError):
            class_weights(np.zeros(4))

    def test_mean_one_property(self, rng):
        for _ in range(50):
            counts = rng.integers(0, 200, size=int(rng.integers(2, 8)))
            if counts.sum() == 0:
                continue
            assert abs(class_weights(counts).mean() - 1.0) < 1e-9


class TestWeightedCrossEntropy:
    def test_uniform_six_class_is_ln6(self):
        probs = torch.full((4, 3, 6), 1 / 6, dtype=torch.float64)
        labels = torch.zeros(4, 3, dtype=torch.long)
        loss = weighted_cross_entropy(probs, labels.numpy(), np.ones(6))
        assert abs(loss.item() - math.log(6)) < 1e-9

    def test_perfect_prediction_zero_loss(self):
        probs = torch.tensor([[0.0, 1.0, 0.0]], dtype=torch.float64)
        loss = weighted_cross_entropy(probs, np.array([1]), np.ones(3))
        assert loss.item() == 0.0

    def test_two_sample_hand_computed(self):
        probs = torch.tensor([[0.7, 0.3], [0.2, 0.8]], dtype=torch.float64)
        labels = np.array([0, 1])
        weights = np.array([1.5, 0.5])
        loss = weighted_cross_entropy(probs, labels, weights)
        expected = (-1.5 * math.log(0.7) + -0.5 * math.log(0.8)) / 2
        assert abs(loss.item() - expected) < 1e-12

    def test_unit_weights_equal_unweighted_bitwise(self, rng):
        probs = torch.from_numpy(rng.dirichlet(np.ones(6), size=40)).clamp_min(1e-12)
        labels = rng.integers(0, 6, size=40)
        weighted = weighted_cross_entropy(probs, labels, np.ones(6))
        # independent unweighted formulation under the same clamping
        logp = torch.log(probs.clamp_min(1e-12))
        unweighted = -logp.gather(1, torch.from_numpy(labels).view(-1, 1)).mean()
        assert weighted.item() == unweighted.item()

    def test_floor_prevents_infinite_loss(self):
        probs = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
        loss = weighted_cross_entropy(probs, np.array([1]), np.ones(2))
        assert torch.isfinite(loss)
        assert loss.item() == pytest.approx(-math.log(1e-12))

    def test_weight_scales_term(self):
        probs = torch.tensor([[0.5, 0.5]], dtype=torch.float64)
        base = weighted_cross_entropy(probs, np.array([0]), np.array([1.0, 1.0]))
        double = weighted_cross_entropy(probs, np.array([0]), np.array([2.0, 0.0]))
        assert double.item() == pytest.approx(2 * base.item())

    def test_shape_mismatch_rejected(self):
        probs = torch.full((2, 3), 1 / 3, dtype=torch.float64)
        with pytest.raises(ShapeError):
            weighted_cross_entropy(probs, np.zeros((5,), dtype=int), np.ones(3))
        with pytest.raises(ShapeError):
            weighted_cross_entropy(probs, np.zeros(2, dtype=int), np.ones(4))

    def test_one_hot_targets_accepted(self):
        probs = torch.tensor([[0.9, 0.1]], dtype=torch.float64)
        via_int = weighted_cross_entropy(probs, np.array([0]), np.ones(2))
        via_onehot = weighted_cross_entropy(probs, one_hot(np.array([0]), 2), np.ones(2))
        assert via_int.item() == via_onehot.item()


def test_ten_case_oracle_suite():
    """Frozen expected values, computed with the scalar reference below."""

    def reference(prob_rows, labels, weights):
        total = 0.0
        for row, lab in zip(prob_rows, labels):
            p = max(row[lab], 1e-12)
            total += -weights[lab] * math.log(p)
        return total / len(prob_rows)

    cases = [
        ([[0.25, 0.75]], [1], [1.0, 1.0]),
        ([[0.25, 0.75]], [0], [1.0, 1.0]),
        ([[0.1, 0.9]], [1], [0.5, 1.5]),
        ([[1 / 3] * 3], [2], [1.0, 1.0, 1.0]),
        ([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3]], [0, 1], [1.2, 0.9, 0.9]),
        ([[0.05, 0.95], [0.95, 0.05]], [0, 1], [1.0, 1.0]),
        ([[0.5, 0.25, 0.25]], [0], [3.0, 0.0, 0.0]),
        ([[1 / 6] * 6] * 4, [0, 1, 2, 3], [1.0] * 6),
        ([[0.9, 0.1], [0.8, 0.2], [0.7, 0.3]], [0, 0, 1], [0.4, 1.6]),
        ([[0.999, 0.001]], [1], [1.0, 1.0]),
    ]
    for rows, labels, weights in cases:
        probs = torch.tensor(rows, dtype=torch.float64)
        got = weighted_cross_entropy(probs, np.array(labels), np.array(weights)).item()
        assert got == pytest.approx(reference(rows, labels, weights), abs=1e-9)
