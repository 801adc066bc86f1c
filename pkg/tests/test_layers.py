import math

import numpy as np
import pytest
import torch

from camsel.errors import ShapeError
from camsel.model.config import ModelConfig
from camsel.model.layers import FeatureEmbedding, TimesBlock, sinusoidal_encoding
from camsel.model.network import init_parameters
from camsel.model.periods import PeriodSet


def tiny_config(**over):
    base = dict(
        input_dim=4,
        d_model=2,
        num_blocks=1,
        top_k=1,
        dropout=0.0,
        lookback=2,
        horizon=1,
        cameras=2,
        conv_channels=2,
        kernel_sizes=(1,),
    )
    base.update(over)
    return ModelConfig(**base)


class TestEmbedding:
    def test_zero_input_zero_bias_gives_temporal_encoding(self):
        cfg = tiny_config(lookback=3, input_dim=5, d_model=4)
        emb = FeatureEmbedding(cfg)
        init_parameters(emb, seed=0)  # biases zero
        emb.eval()
        x = torch.zeros(2, 3, 5, dtype=torch.float64)
        out = emb(x)
        expected = sinusoidal_encoding(3, 4).expand(2, 3, 4)
        assert torch.equal(out, expected)

    def test_eval_mode_deterministic_despite_dropout(self):
        cfg = tiny_config(dropout=0.5, lookback=4, input_dim=6, d_model=4, top_k=2)
        emb = FeatureEmbedding(cfg)
        emb.eval()
        x = torch.randn(3, 4, 6, dtype=torch.float64)
        assert torch.equal(emb(x), emb(x))

    def test_one_timestep_toy_matches_hand_computation(self):
        cfg = tiny_config(lookback=1, input_dim=4, d_model=2)
        emb = FeatureEmbedding(cfg)
        with torch.no_grad():
            emb.linear.weight.copy_(torch.tensor(
                [[1.0, 0.0, -1.0, 2.0], [0.5, 0.5, 0.5, 0.5]], dtype=torch.float64))
            emb.linear.bias.copy_(torch.tensor([0.1, -0.2], dtype=torch.float64))
        emb.eval()
        x = torch.tensor([[[1.0, 2.0, 3.0, 4.0]]], dtype=torch.float64)
        with torch.no_grad():
            out = emb(x).squeeze().numpy()
        # affine map, tanh, plus the t=0 temporal encoding [sin 0, cos 0]
        z = np.array([1 - 3 + 8 + 0.1, 0.5 * (1 + 2 + 3 + 4) - 0.2])
        expected = np.tanh(z) + np.array([0.0, 1.0])
        assert np.allclose(out, expected, atol=1e-15)

    def test_shape_error_names_expected_and_actual(self):
        cfg = tiny_config(lookback=2, input_dim=4)
        emb = FeatureEmbedding(cfg)
        with pytest.raises(ShapeError) as err:
            emb(torch.zeros(1, 2, 5, dtype=torch.float64))
        assert "(2, 4)" in str(err.value).replace("'B', ", "")


class TestTimesBlock:
    def test_identity_conv_doubles_input(self):
        cfg = tiny_config(lookback=12, d_model=3, top_k=3, conv_channels=3)
        block = TimesBlock(cfg)
        block.conv = torch.nn.Identity()
        x = torch.randn(2, 12, 3, dtype=torch.float64)
        out = block(x)
        # branches fold/unfold to x exactly; amplitude-softmax weights sum to
        # one, so aggregation returns x and the residual doubles it
        assert torch.allclose(out, 2 * x, atol=1e-12)

    def test_zero_input_zero_output(self):
        cfg = tiny_config(lookback=6, d_model=2, top_k=2)
        block = TimesBlock(cfg)
        init_parameters(block, seed=1)
        x = torch.zeros(1, 6, 2, dtype=torch.float64)
        assert torch.equal(block(x), x)

    def test_handset_1x1_conv_scaling(self):
        cfg = tiny_config(lookback=6, d_model=2, top_k=1)
        block = TimesBlock(cfg)
        conv = torch.nn.Conv2d(2, 2, kernel_size=1).double()
        with torch.no_grad():
            conv.weight.copy_(2.0 * torch.eye(2, dtype=torch.float64).reshape(2, 2, 1, 1))
            conv.bias.zero_()
        block.conv = conv
        x = torch.randn(3, 6, 2, dtype=torch.float64)
        out = block(x, periods=PeriodSet(((3, 1.0),)))
        assert torch.allclose(out, 3 * x, atol=1e-12)

    @pytest.mark.parametrize("length", [5, 6, 12])
    @pytest.mark.parametrize("d_model", [2, 4])
    def test_shape_preserved_for_all_periods(self, length, d_model):
        cfg = tiny_config(lookback=length, d_model=d_model, top_k=2,
                          conv_channels=3, kernel_sizes=(1, 3))
        block = TimesBlock(cfg)
        init_parameters(block, seed=0)
        x = torch.randn(2, length, d_model, dtype=torch.float64)
        for period in range(1, length + 1):
            out = block(x, periods=PeriodSet(((period, 1.0),)))
            assert out.shape == x.shape
            assert torch.isfinite(out).all()

    def test_padding_path_consistency(self):
        # period 5 over L=12 pads to 15 and truncates back; with identity
        # conv the round trip must be exact despite the padding
        cfg = tiny_config(lookback=12, d_model=2, top_k=1)
        block = TimesBlock(cfg)
        block.conv = torch.nn.Identity()
        x = torch.randn(1, 12, 2, dtype=torch.float64)
        out = block(x, periods=PeriodSet(((5, 1.0),)))
        assert torch.allclose(out, 2 * x, atol=1e-15)

    def test_branch_weights_follow_amplitudes(self):
        cfg = tiny_config(lookback=12, d_model=2, top_k=2)
        block = TimesBlock(cfg)
        block.conv = torch.nn.Identity()
        x = torch.randn(1, 12, 2, dtype=torch.float64)
        # identical branches: any weight vector summing to one gives x back
        out = block(x, periods=PeriodSet(((4, 2.0), (3, 1.0))))
        assert torch.allclose(out, 2 * x, atol=1e-12)


def test_sinusoidal_encoding_values():
    enc = sinusoidal_encoding(3, 4).numpy()
    div0 = 1.0
    div1 = math.exp(2 * (-math.log(10000.0) / 4))
    for t in range(3):
        assert enc[t, 0] == pytest.approx(math.sin(t * div0))
        assert enc[t, 1] == pytest.approx(math.cos(t * div0))
        assert enc[t, 2] == pytest.approx(math.sin(t * div1))
        assert enc[t, 3] == pytest.approx(math.cos(t * div1))
