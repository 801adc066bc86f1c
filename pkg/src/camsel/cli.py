"""Operator command surface.

Verbs map one-to-one onto module entry points: ingest (manifest loading),
synth (scenario generation), extract (feature pipeline), train (pooled
training), eval (protocol scoring), predict (label forecasts over a
sequence), report (table rendering), serve (annotation service). Every verb
exits nonzero with a structured one-line error on failure.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click
import numpy as np

from camsel.data.manifest import load_manifest, write_sequence
from camsel.data.splits import chance_rate
from camsel.errors import CamselError
from camsel.features.fusion import FusedLayout, fuse_frame
from camsel.features.semantic import extract_semantic, parse_detections
from camsel.features.store import FeatureStore, cache_features
from camsel.features.synth import load_scenario, scenario_from_dict, synth_dataset, write_dataset
from camsel.features.visual import extract_visual, get_extractor
from camsel.model.checkpoint import load_checkpoint, model_from_checkpoint
from camsel.training.datasets import Normalizer, load_bundles
from camsel.training.evaluation import predict_sequence, report_from_dict
from camsel.training.experiments import (
    evaluate_checkpoint,
    load_experiment,
    parse_overrides,
    run_experiment,
    train_pooled,
)
from camsel.training.reporting import read_records, render_comparison, render_report, write_records


def _structured_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CamselError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


@click.group()
@click.version_option(package_name="camsel")
def main():
    """Best-view camera selection: datasets, training, evaluation, annotation."""


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@_structured_errors
def ingest(data_dir):
    """Validate a dataset manifest and print per-sequence statistics."""
    sequences = load_manifest(data_dir)
    for seq in sequences:
        labeled = seq.resolved_labels()
        line = (
            f"{seq.id}: {len(seq)} frames, {seq.cameras} cameras, "
            f"{len(labeled)} labeled"
        )
        if seq.is_fully_labeled():
            line += f", chance rate {chance_rate(seq.label_vector()):.3f}"
        click.echo(line)
    click.echo(f"ok: {len(sequences)} sequences")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--sequences", "n_sequences", type=int, default=1, show_default=True)
@click.option("--set", "overrides", multiple=True, help="Scenario override key=value.")
@_structured_errors
def synth(config_path, out_dir, seed, n_sequences, overrides):
    """Generate a synthetic dataset (manifest, labels, detections, features)."""
    import yaml

    with open(config_path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    for pair in overrides:
        key, _, value = pair.partition("=")
        raw[key] = yaml.safe_load(value)
    scenario = scenario_from_dict(raw)
    results = synth_dataset(scenario, n_sequences, seed=seed)
    manifest = write_dataset(results, out_dir)
    for res in results:
        labels = res.sequence.label_vector()
        click.echo(
            f"{res.sequence.id}: {len(res.sequence)} frames, "
            f"chance rate {chance_rate(labels):.3f}"
        )
    click.echo(f"wrote {manifest}")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--extractor", "extractor_name", default="stub-mean", show_default=True)
@click.option("--visual-dim", type=int, default=512, show_default=True)
@_structured_errors
def extract(data_dir, extractor_name, visual_dim):
    """Compute and cache fused features for every sequence with image files."""
    root = Path(data_dir)
    extractor = get_extractor(extractor_name, dim=visual_dim)
    sequences = load_manifest(root)
    for seq in sequences:
        seq_dir = root / seq.id
        det_rel = seq.meta.get("detections_path")
        detections = (
            parse_detections((seq_dir / det_rel).read_text(encoding="utf-8"))
            if det_rel and (seq_dir / det_rel).exists()
            else {}
        )
        layout = FusedLayout(seq.cameras, extractor.dim, extract_semantic([]).shape[0])
        rows = np.empty((len(seq), layout.width), dtype=np.float64)
        for i, fs in enumerate(seq.frame_sets):
            visual = []
            semantic = []
            for cam, ref in enumerate(fs.images):
                path = ref if Path(ref).is_absolute() else str(seq_dir / ref)
                visual.append(extract_visual(path, extractor))
                semantic.append(extract_semantic(detections.get((fs.timestamp, cam), [])))
            rows[i] = fuse_frame(visual, semantic, layout)
        store = FeatureStore(seq.id, layout, extractor.name, rows.astype("<f4"))
        cache_features(store, seq_dir / "features.bin")
        seq.meta["features_path"] = "features.bin"
        write_sequence(seq, seq_dir)
        click.echo(f"{seq.id}: cached {len(seq)} x {layout.width} features")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--set", "overrides", multiple=True, help="Config override a.b=value.")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", default=None, type=click.Path())
@click.option("--holdout", default=None, help="Exclude one surgery entirely (Surgery-Out).")
@click.option("--ablation", default=None, type=click.Choice(["full", "no_visual", "no_semantic"]))
@_structured_errors
def train(config_path, overrides, seed, out_dir, holdout, ablation):
    """Train a pooled model and write a versioned checkpoint."""
    exp = load_experiment(config_path, parse_overrides(list(overrides)))
    bundles = load_bundles(_dataset_root(exp, config_path))
    run = train_pooled(bundles, exp, seed=seed, ablation=ablation, holdout=holdout,
                       out_dir=_out_root(exp, config_path, out_dir))
    last = run.result.history[-1]
    click.echo(
        f"trained {len(run.result.history)} epochs "
        f"(best epoch {run.result.best_epoch}, val loss {run.result.best_val_loss:.4f}, "
        f"val accuracy {last.val_accuracy:.3f})"
    )
    click.echo(f"checkpoint: {run.checkpoint_path}")
    click.echo(f"fingerprint: {run.fingerprint}")


@main.command(name="eval")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path())
@click.option("--protocol", "protocols", multiple=True,
              type=click.Choice(["sequence_out", "surgery_out"]))
@click.option("--retrain", is_flag=True,
              help="Run the full per-target protocol training instead of scoring a checkpoint.")
@click.option("--sequence", "targets", multiple=True)
@click.option("--set", "overrides", multiple=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
@_structured_errors
def eval_cmd(config_path, checkpoint_path, protocols, retrain, targets, overrides, out_dir):
    """Score a checkpoint (or rerun protocols) and emit a metrics report."""
    exp = load_experiment(config_path, parse_overrides(list(overrides)))
    bundles = load_bundles(_dataset_root(exp, config_path))
    wanted = list(protocols) or exp.protocols
    if retrain:
        exp.protocols = wanted
        reports = run_experiment(bundles, exp)
    else:
        if checkpoint_path is None:
            raise click.ClickException(
                "missing checkpoint: pass --checkpoint <path> or --retrain"
            )
        ckpt = load_checkpoint(checkpoint_path)
        reports = [
            evaluate_checkpoint(bundles, ckpt, protocol, exp, list(targets) or None)
            for protocol in wanted
        ]
    out = _out_root(exp, config_path, out_dir)
    records = write_records(reports, out / "records.jsonl")
    for report in reports:
        click.echo(render_report(report))
        click.echo("")
    click.echo(f"records: {records}")


@main.command()
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--sequence", "sequence_id", required=True)
@click.option("--out", "out_path", default=None, type=click.Path())
@_structured_errors
def predict(checkpoint_path, data_dir, sequence_id, out_path):
    """Forecast best-camera labels over one sequence (horizon-tiled)."""
    ckpt = load_checkpoint(checkpoint_path)
    model = model_from_checkpoint(ckpt)
    normalizer = Normalizer.from_state(ckpt.extras["normalizer"])
    bundles = {b.id: b for b in load_bundles(data_dir)}
    if sequence_id not in bundles:
        raise click.ClickException(f"unknown sequence {sequence_id!r}")
    bundle = bundles[sequence_id]
    feats = bundle.layout.ablate(bundle.features, ckpt.extras.get("ablation", "full"))
    steps, labels = predict_sequence(model, feats, normalizer)
    lines = ["camsel-predictions 1"]
    timeline = bundle.sequence.timestamps
    lines += [f"pred {timeline[i]:g} {int(c)}" for i, c in zip(steps, labels)]
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(steps)} predictions to {out_path}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@_structured_errors
def report(records_path, out_path):
    """Render the accuracy tables from a records stream."""
    reports = [report_from_dict(d) for d in read_records(records_path)]
    if not reports:
        raise click.ClickException("no records found")
    text = render_comparison(reports)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text)


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="Static directory with the built annotation UI.")
@_structured_errors
def serve(data_dir, checkpoint_path, host, port, seed, ui_dir):
    """Run the annotation and review service."""
    import uvicorn

    from camsel.service.app import create_app

    app = create_app(data_dir, checkpoint=checkpoint_path, seed=seed, ui_dir=ui_dir)
    click.echo(f"serving {data_dir} on http://{host}:{port}/api/v1")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _dataset_root(exp, config_path) -> Path:
    root = Path(exp.dataset)
    if not root.is_absolute():
        root = Path(config_path).parent / root
    return root


def _out_root(exp, config_path, out_dir) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    out = Path(exp.out)
    if not out.is_absolute():
        out = Path(config_path).parent / out
    return out


if __name__ == "__main__":
    main()
