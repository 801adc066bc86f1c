"""Synthetic multi-camera sequences with planted occlusion dynamics.

The generator simulates a per-camera occlusion fraction as the sum of a
periodic component (staggered sinusoids, the "rotor"), a Markov occluder
parked on one camera at a time, a static per-camera bias, and Gaussian
noise. The ground-truth label at each timestep is the camera with minimal
occlusion (ties to the lowest index); that rule is recorded in the sequence
metadata. Features are derived from the same occlusion values — visual
vectors darken along a per-camera signature direction, semantic detections
shrink the surgical-field boxes and grow occluder boxes — so both halves
carry learnable signal whose strength the scenario controls per camera.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from camsel.data.manifest import write_manifest
from camsel.data.types import FrameSet, LabelRecord, SurgerySequence
from camsel.errors import ConfigError
from camsel.features.fusion import FusedLayout, fuse_frame
from camsel.features.semantic import SemanticDetection, detections_to_lines, extract_semantic
from camsel.features.store import FeatureStore, cache_features
from camsel.features.vocabulary import CLASS_INDEX

SYNTH_ANNOTATOR = "synthetic"
LABEL_RULE = "argmin-occlusion"


@dataclass
class PeriodicOcclusion:
    """Periodic component of the occlusion field.

    ``sinusoid``: per-camera staggered sine waves (smooth drift of the best
    view). ``rotor``: a hard occluder that fully clears exactly one camera
    per phase, cycling through ``schedule`` (default cameras 0..period-1),
    which guarantees a unique least-occluded camera at every step.
    """

    period: int = 4
    amplitude: float = 1.0
    phases: list[float] | str = "stagger"  # radians per camera, or "stagger"
    kind: str = "sinusoid"  # or "rotor"
    schedule: list[int] | None = None
    # rotor only: the next camera in the schedule is cleared to this fraction
    # of the amplitude, giving every phase a deterministic runner-up view
    secondary_level: float = 1.0

    def phase_for(self, camera: int, cameras: int) -> float:
        if self.phases == "stagger":
            return 2.0 * np.pi * camera / cameras
        return float(self.phases[camera])

    def rotor_schedule(self, cameras: int) -> list[int]:
        if self.schedule is not None:
            return [int(c) % cameras for c in self.schedule]
        return [k % cameras for k in range(self.period)]


@dataclass
class MarkovOcclusion:
    amplitude: float = 0.6
    states: int = 6
    self_prob: float = 0.9
    matrix: list[list[float]] | None = None  # explicit row-stochastic override

    def transition_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            mat = np.asarray(self.matrix, dtype=np.float64)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ConfigError(f"switching matrix must be square, got {mat.shape}")
            rows = mat.sum(axis=1)
            if np.any(np.abs(rows - 1.0) > 1e-9) or np.any(mat < -1e-12):
                raise ConfigError("switching matrix rows must be nonnegative and sum to 1")
            return mat
        k = self.states
        if k < 1:
            raise ConfigError(f"markov states must be >= 1, got {k}")
        if not (0.0 <= self.self_prob <= 1.0):
            raise ConfigError(f"self_prob must be in [0, 1], got {self.self_prob}")
        off = (1.0 - self.self_prob) / max(k - 1, 1)
        mat = np.full((k, k), off)
        np.fill_diagonal(mat, self.self_prob if k > 1 else 1.0)
        return mat


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    cameras: int = 6
    length: int = 600
    visual_dim: int = 16
    seed: int = 0
    periodic: PeriodicOcclusion = field(default_factory=PeriodicOcclusion)
    markov: MarkovOcclusion = field(default_factory=MarkovOcclusion)
    noise_sigma: float = 0.05       # occlusion-level noise
    static_bias: list[float] | None = None
    feature_noise: float = 0.1      # additive sigma on visual vectors
    detection_jitter: float = 0.02  # box center/area jitter
    distractor_rate: float = 0.5    # mean spurious detections per camera-frame
    visual_gain: float = 0.8        # how strongly occlusion darkens visual features
    semantic_gain: float = 0.9      # how strongly occlusion shrinks field boxes
    visual_informative: list[int] | str = "all"
    semantic_informative: list[int] | str = "all"

    def informative(self, which: str) -> set[int]:
        sel = self.visual_informative if which == "visual" else self.semantic_informative
        if sel == "all":
            return set(range(self.cameras))
        return set(int(c) for c in sel)

    def validate(self) -> None:
        if self.cameras < 2:
            raise ConfigError(f"need at least 2 cameras, got {self.cameras}")
        if self.length < 1:
            raise ConfigError(f"length must be >= 1, got {self.length}")
        if self.periodic.period < 1:
            raise ConfigError(f"period must be >= 1, got {self.periodic.period}")
        if self.periodic.kind not in ("sinusoid", "rotor"):
            raise ConfigError(f"periodic kind must be sinusoid or rotor, got {self.periodic.kind!r}")
        self.markov.transition_matrix()
        if self.static_bias is not None and len(self.static_bias) != self.cameras:
            raise ConfigError("static_bias must list one value per camera")

    def digest(self) -> str:
        blob = repr(sorted(self.__dict__.items(), key=lambda kv: kv[0])).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def load_scenario(path: str | os.PathLike) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    raw = dict(raw)
    periodic = PeriodicOcclusion(**raw.pop("periodic", {}))
    markov = MarkovOcclusion(**raw.pop("markov", {}))
    try:
        cfg = ScenarioConfig(periodic=periodic, markov=markov, **raw)
    except TypeError as exc:
        raise ConfigError(f"bad scenario field: {exc}") from None
    cfg.validate()
    return cfg


@dataclass
class SynthResult:
    sequence: SurgerySequence
    store: FeatureStore
    detections: dict[tuple[float, int], list[SemanticDetection]]
    occlusion: np.ndarray  # (T, N) simulated occlusion fractions

    def write(self, root: str | os.PathLike) -> Path:
        """Emit manifest + labels + detections + feature cache under ``root``."""
        root = Path(root)
        seq_dir = root / self.sequence.id
        seq_dir.mkdir(parents=True, exist_ok=True)
        self.sequence.meta["detections_path"] = "detections.txt"
        self.sequence.meta["features_path"] = "features.bin"
        lines = ["camsel-detections 1"]
        for (t, cam) in sorted(self.detections):
            lines.extend(detections_to_lines(t, cam, self.detections[(t, cam)]))
        (seq_dir / "detections.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        cache_features(self.store, seq_dir / "features.bin")
        return write_manifest([self.sequence], root)


def simulate_occlusion(scenario: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Simulated occlusion fractions, one row per timestep, one column per camera."""
    T, N = scenario.length, scenario.cameras
    periodic = scenario.periodic
    if periodic.kind == "rotor":
        schedule = periodic.rotor_schedule(N)
        occ = np.full((T, N), periodic.amplitude, dtype=np.float64)
        for step in range(T):
            phase = step % periodic.period
            occ[step, schedule[phase]] = 0.0
            if periodic.secondary_level < 1.0:
                runner_up = schedule[(phase + 1) % periodic.period]
                if runner_up != schedule[phase]:
                    occ[step, runner_up] = periodic.amplitude * periodic.secondary_level
    else:
        # phase computed mod period so the component is exactly periodic,
        # free of the argument growth that would let rounding noise break
        # label ties
        t = np.arange(T, dtype=np.float64)[:, None] % periodic.period
        phases = np.array([periodic.phase_for(n, N) for n in range(N)])[None, :]
        occ = 0.5 * periodic.amplitude * (
            1.0 + np.sin(2.0 * np.pi * t / periodic.period + phases)
        )

    if scenario.markov.amplitude > 0.0:
        mat = scenario.markov.transition_matrix()
        k = mat.shape[0]
        state = int(rng.integers(k))
        for step in range(T):
            occ[step, state % N] += scenario.markov.amplitude
            state = int(rng.choice(k, p=mat[state]))

    if scenario.static_bias is not None:
        occ += np.asarray(scenario.static_bias, dtype=np.float64)[None, :]
    if scenario.noise_sigma > 0.0:
        occ += rng.normal(0.0, scenario.noise_sigma, size=(T, N))
    return occ


def _field_detections(
    scenario: ScenarioConfig, occ_frac: float, informative: bool, rng: np.random.Generator
) -> list[SemanticDetection]:
    """Boxes for one camera-frame: field classes shrink, occluders grow."""
    o = occ_frac if informative else 0.5
    jitter = scenario.detection_jitter
    dets: list[SemanticDetection] = []

    wound_area = max(0.02, 0.30 * (1.0 - scenario.semantic_gain * o) + rng.normal(0.0, jitter))
    side = min(np.sqrt(wound_area), 0.72)
    cx = 0.5 + rng.uniform(-0.1, 0.1) * (1.0 - side)
    cy = 0.5 + rng.uniform(-0.1, 0.1) * (1.0 - side)
    dets.append(SemanticDetection(CLASS_INDEX["wound"], cx, cy, side, side, 0.95))

    tissue_side = side * 0.6
    dets.append(SemanticDetection(CLASS_INDEX["thyroid tissue"], cx, cy,
                                  tissue_side, tissue_side, 0.9))

    # Occluder boxes are emitted probabilistically: a single frame carries
    # only partial evidence of the occlusion state, so per-frame readout
    # stays imperfect while a window of frames disambiguates.
    if rng.random() < np.clip(0.25 + 0.5 * o, 0.0, 1.0):
        head_side = min(np.sqrt(max(0.02, 0.25 * max(o, 0.2))), 0.6)
        dets.append(
            SemanticDetection(
                CLASS_INDEX["head"],
                0.5 + rng.uniform(-0.05, 0.05),
                0.35,
                head_side,
                head_side,
                min(1.0, 0.6 + 0.4 * o),
            )
        )
    if rng.random() < np.clip(0.6 * o - 0.1, 0.0, 1.0):
        hand_side = min(np.sqrt(max(0.01, 0.12 * max(o, 0.2))), 0.4)
        dets.append(
            SemanticDetection(CLASS_INDEX["hand"], 0.4, 0.6, hand_side, hand_side, 0.8)
        )

    n_extra = rng.poisson(scenario.distractor_rate)
    for _ in range(n_extra):
        cls = int(rng.integers(len(CLASS_INDEX)))
        side = float(rng.uniform(0.03, 0.12))
        dets.append(
            SemanticDetection(
                cls,
                float(rng.uniform(side / 2, 1 - side / 2)),
                float(rng.uniform(side / 2, 1 - side / 2)),
                side,
                side,
                float(rng.uniform(0.05, 0.9)),
            )
        )
    return dets


def synth_generate(scenario: ScenarioConfig, seed: int | None = None) -> SynthResult:
    """Generate one fully labeled synthetic surgery with cached features."""
    scenario.validate()
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    T, N, Dv = scenario.length, scenario.cameras, scenario.visual_dim
    layout = FusedLayout(cameras=N, visual_dim=Dv,
                         semantic_dim=extract_semantic([]).shape[0])

    occlusion = simulate_occlusion(scenario, rng)
    labels = occlusion.argmin(axis=1)  # ties resolve to the lowest camera index
    occ_frac = np.clip(occlusion, 0.0, 1.0)

    signatures = rng.normal(0.0, 1.0, size=(N, Dv))
    vis_info = scenario.informative("visual")
    sem_info = scenario.informative("semantic")

    fused_rows = np.empty((T, layout.width), dtype=np.float64)
    detections: dict[tuple[float, int], list[SemanticDetection]] = {}
    frame_sets: list[FrameSet] = []
    records: list[LabelRecord] = []
    for t in range(T):
        visual = []
        semantic = []
        for n in range(N):
            o_vis = occ_frac[t, n] if n in vis_info else 0.5
            vec = signatures[n] * (1.0 - scenario.visual_gain * o_vis)
            if scenario.feature_noise > 0.0:
                vec = vec + rng.normal(0.0, scenario.feature_noise, size=Dv)
            visual.append(vec)
            dets = _field_detections(scenario, occ_frac[t, n], n in sem_info, rng)
            detections[(float(t), n)] = dets
            semantic.append(extract_semantic(dets))
        fused_rows[t] = fuse_frame(visual, semantic, layout)
        images = tuple(f"synth://{scenario.name}/t{t:05d}/c{n}" for n in range(N))
        frame_sets.append(FrameSet(timestamp=float(t), images=images))
        records.append(LabelRecord(float(t), int(labels[t]), SYNTH_ANNOTATOR, resolved=True))

    sequence = SurgerySequence(
        id=scenario.name,
        frame_sets=frame_sets,
        labels=records,
        cameras=N,
        source_fps=30.0,
        synthetic=True,
        meta={
            "label_rule": LABEL_RULE,
            "scenario_digest": scenario.digest(),
            "scenario_seed": str(seed),
        },
    )
    sequence.validate()
    store = FeatureStore(
        sequence_id=sequence.id,
        layout=layout,
        extractor=f"synthetic:{scenario.digest()}",
        vectors=fused_rows.astype("<f4"),
    )
    return SynthResult(sequence=sequence, store=store, detections=detections,
                       occlusion=occlusion)


def synth_dataset(
    scenario: ScenarioConfig, n_sequences: int, seed: int | None = None
) -> list[SynthResult]:
    """Generate ``n_sequences`` independent surgeries from one scenario.

    Each sequence gets its own sub-seed and id suffix so surgeries differ
    while the whole dataset stays reproducible from one seed.
    """
    base = scenario.seed if seed is None else seed
    results = []
    for k in range(n_sequences):
        import copy

        sub = copy.deepcopy(scenario)
        sub.name = f"{scenario.name}-{k + 1:02d}" if n_sequences > 1 else scenario.name
        sub.seed = base + 1000 * k
        results.append(synth_generate(sub))
    return results


def write_dataset(results: list[SynthResult], root: str | os.PathLike) -> Path:
    root = Path(root)
    for res in results:
        res.sequence.meta["detections_path"] = "detections.txt"
        res.sequence.meta["features_path"] = "features.bin"
        seq_dir = root / res.sequence.id
        seq_dir.mkdir(parents=True, exist_ok=True)
        lines = ["camsel-detections 1"]
        for (t, cam) in sorted(res.detections):
            lines.extend(detections_to_lines(t, cam, res.detections[(t, cam)]))
        (seq_dir / "detections.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        cache_features(res.store, seq_dir / "features.bin")
    return write_manifest([r.sequence for r in results], root)
