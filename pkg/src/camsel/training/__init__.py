from camsel.training.baselines import (
    PerFrameClassifier,
    PerFrameConfig,
    area_scores_from_detections,
    baseline_area_dijkstra,
    path_cost,
    perframe_window_predictions,
    train_perframe,
)
from camsel.training.datasets import (
    Normalizer,
    SequenceBundle,
    WindowBatch,
    assemble,
    concat_batches,
    load_bundles,
    split_bundles,
)
from camsel.training.evaluation import (
    EvalResult,
    MetricsReport,
    SurgeryRow,
    build_report,
    config_fingerprint,
    evaluate_model,
    evaluate_predictions,
    predict_sequence,
)
from camsel.training.experiments import (
    ExperimentConfig,
    evaluate_checkpoint,
    load_experiment,
    parse_overrides,
    run_experiment,
    train_pooled,
)
from camsel.training.loop import EpochRecord, TrainConfig, TrainResult, lr_on_plateau, train
from camsel.training.protocols import (
    ProtocolConfig,
    assert_no_leakage,
    collect_protocol_data,
    run_protocol,
    run_sequence_out,
    run_surgery_out,
)
from camsel.training.reporting import (
    read_records,
    render_comparison,
    render_report,
    write_records,
)

__all__ = [
    "EpochRecord",
    "EvalResult",
    "ExperimentConfig",
    "MetricsReport",
    "Normalizer",
    "PerFrameClassifier",
    "PerFrameConfig",
    "ProtocolConfig",
    "SequenceBundle",
    "SurgeryRow",
    "TrainConfig",
    "TrainResult",
    "WindowBatch",
    "area_scores_from_detections",
    "assemble",
    "assert_no_leakage",
    "baseline_area_dijkstra",
    "build_report",
    "collect_protocol_data",
    "concat_batches",
    "config_fingerprint",
    "evaluate_checkpoint",
    "evaluate_model",
    "evaluate_predictions",
    "load_bundles",
    "load_experiment",
    "lr_on_plateau",
    "parse_overrides",
    "path_cost",
    "perframe_window_predictions",
    "predict_sequence",
    "read_records",
    "render_comparison",
    "render_report",
    "run_experiment",
    "run_protocol",
    "run_sequence_out",
    "run_surgery_out",
    "split_bundles",
    "train",
    "train_perframe",
    "train_pooled",
    "write_records",
]
