import numpy as np
import pytest

from camsel.data.types import FrameSet, LabelRecord, SurgerySequence
from camsel.features.synth import (
    MarkovOcclusion,
    PeriodicOcclusion,
    ScenarioConfig,
    synth_generate,
)


def build_sequence(
    n_frames: int,
    cameras: int = 6,
    seq_id: str = "seq",
    labels: list[int] | None = None,
    annotator: str = "alice",
) -> SurgerySequence:
    frame_sets = [
        FrameSet(
            timestamp=float(t),
            images=tuple(f"frames/t{t:04d}_c{c}.png" for c in range(cameras)),
        )
        for t in range(n_frames)
    ]
    records = []
    if labels is not None:
        records = [
            LabelRecord(float(t), cam, annotator, resolved=True)
            for t, cam in enumerate(labels)
        ]
    seq = SurgerySequence(id=seq_id, frame_sets=frame_sets, labels=records, cameras=cameras)
    seq.validate()
    return seq


def small_scenario(**over) -> ScenarioConfig:
    base = dict(
        name="toy",
        cameras=6,
        length=120,
        visual_dim=6,
        seed=11,
        periodic=PeriodicOcclusion(period=4, amplitude=1.0),
        markov=MarkovOcclusion(amplitude=0.5, states=6, self_prob=0.9),
        noise_sigma=0.02,
        feature_noise=0.05,
        distractor_rate=0.3,
    )
    base.update(over)
    return ScenarioConfig(**base)


@pytest.fixture()
def toy_synth():
    return synth_generate(small_scenario())


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def bundle_from_synth(result):
    from camsel.training.datasets import SequenceBundle

    return SequenceBundle(
        sequence=result.sequence,
        features=result.store.vectors.astype(np.float64),
        layout=result.store.layout,
        detections=result.detections,
    )


def windowed_batches(
    scenario: ScenarioConfig,
    lookback: int = 12,
    horizon: int = 6,
    stride: int = 1,
    split_seed: int = 0,
):
    """Synthesize one sequence and assemble train/validation/test batches."""
    from camsel.data.windows import build_windows
    from camsel.training.datasets import assemble, split_bundles

    bundle = bundle_from_synth(synth_generate(scenario))
    split_bundles([bundle], seed=split_seed, block_size=lookback + horizon)
    batches = {}
    for name in ("train", "validation", "test"):
        windows = build_windows(
            bundle.sequence, list(bundle.split.partition(name)), lookback, horizon, stride
        )
        batches[name] = assemble(bundle, windows)
    return bundle, batches
