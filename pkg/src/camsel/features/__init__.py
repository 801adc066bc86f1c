from camsel.features.fusion import FusedLayout, fuse_frame
from camsel.features.semantic import (
    DEFAULT_CONFIDENCE_THRESHOLD,
    SemanticDetection,
    extract_semantic,
    parse_detections,
)
from camsel.features.store import FeatureStore, cache_features, load_features
from camsel.features.synth import (
    ScenarioConfig,
    SynthResult,
    load_scenario,
    scenario_from_dict,
    synth_dataset,
    synth_generate,
    write_dataset,
)
from camsel.features.visual import (
    DEFAULT_VISUAL_DIM,
    MeanPixelExtractor,
    extract_visual,
    get_extractor,
)
from camsel.features.vocabulary import (
    CLASS_INDEX,
    NUM_CLASSES,
    OBJECT_CLASSES,
    SEMANTIC_DIM,
    SURGICAL_FIELD_CLASSES,
)

__all__ = [
    "CLASS_INDEX",
    "DEFAULT_CONFIDENCE_THRESHOLD",
    "DEFAULT_VISUAL_DIM",
    "FeatureStore",
    "FusedLayout",
    "MeanPixelExtractor",
    "NUM_CLASSES",
    "OBJECT_CLASSES",
    "SEMANTIC_DIM",
    "SURGICAL_FIELD_CLASSES",
    "ScenarioConfig",
    "SemanticDetection",
    "SynthResult",
    "cache_features",
    "extract_semantic",
    "extract_visual",
    "fuse_frame",
    "get_extractor",
    "load_features",
    "load_scenario",
    "parse_detections",
    "scenario_from_dict",
    "synth_dataset",
    "synth_generate",
    "write_dataset",
]
