"""The annotation and review service.

Versioned JSON API under ``/api/v1`` backing the browser annotation UI:
sequence listing, per-timestamp frame views with a seeded display
permutation, label submission with last-write-wins per annotator and an
audit trail, conflict review, label export, and model-prediction overlays
when a checkpoint is supplied. The server never mutates feature stores or
checkpoints; label writes are serialized per sequence.
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

import camsel
from camsel.data.splits import chance_rate
from camsel.errors import CamselError, ConflictError
from camsel.model.network import predict_labels
from camsel.service import schemas
from camsel.service.state import ServiceState
from camsel.training.evaluation import evaluate_predictions, predict_sequence


def _http(exc: CamselError) -> HTTPException:
    message = str(exc)
    if isinstance(exc, ConflictError):
        return HTTPException(status_code=409, detail=message)
    if "unknown sequence" in message or "no frame at" in message:
        return HTTPException(status_code=404, detail=message)
    return HTTPException(status_code=422, detail=message)


def create_app(
    dataset_root: str | Path,
    checkpoint: str | Path | None = None,
    seed: int = 0,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(dataset_root, checkpoint_path=checkpoint, seed=seed)
    app = FastAPI(title="camsel annotation service", version=camsel.__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.camsel = state
    prefix = f"/api/{schemas.API_VERSION}"

    @app.get(f"{prefix}/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(
            status="ok", api_version=schemas.API_VERSION, package_version=camsel.__version__
        )

    @app.get(f"{prefix}/sequences", response_model=list[schemas.SequenceInfo])
    def list_sequences():
        out = []
        for sid, st in sorted(state.sequences.items()):
            seq = st.sequence
            out.append(
                schemas.SequenceInfo(
                    id=sid,
                    frames=len(seq),
                    cameras=seq.cameras,
                    labeled=len(seq.resolved_labels()),
                    conflicts=len(state.conflicts(sid)),
                    synthetic=seq.synthetic,
                    fps=seq.source_fps,
                    first_timestamp=seq.frame_sets[0].timestamp,
                    last_timestamp=seq.frame_sets[-1].timestamp,
                )
            )
        return out

    @app.get(f"{prefix}/sequences/{{sid}}/frames/{{timestamp}}",
             response_model=schemas.FrameView)
    def frame_view(sid: str, timestamp: float, annotator: str = Query(default="anonymous")):
        try:
            st = state.get(sid)
            index = state.frame_index(st, timestamp)
        except CamselError as exc:
            raise _http(exc) from exc
        seq = st.sequence
        perm = state.permutation(sid, timestamp, annotator)
        tiles = [
            schemas.Tile(
                slot=slot,
                camera=cam,
                image_url=f"{prefix}/sequences/{sid}/frames/{timestamp:g}/images/{cam}",
            )
            for slot, cam in enumerate(perm)
        ]
        votes = [
            schemas.Vote(annotator=r.annotator, camera=r.camera, resolved=r.resolved)
            for r in seq.labels
            if abs(r.timestamp - timestamp) < 1e-9
        ]
        resolved = seq.resolved_labels().get(timestamp)
        return schemas.FrameView(
            sequence_id=sid,
            timestamp=timestamp,
            index=index,
            total=len(seq),
            tiles=tiles,
            permutation=",".join(str(c) for c in perm),
            resolved_camera=None if resolved is None else resolved.camera,
            votes=votes,
            prev_timestamp=seq.frame_sets[index - 1].timestamp if index > 0 else None,
            next_timestamp=(
                seq.frame_sets[index + 1].timestamp if index + 1 < len(seq) else None
            ),
            next_unlabeled=state.next_unlabeled(sid),
        )

    @app.get(f"{prefix}/sequences/{{sid}}/frames/{{timestamp}}/images/{{camera}}")
    def frame_image(sid: str, timestamp: float, camera: int):
        try:
            st = state.get(sid)
            index = state.frame_index(st, timestamp)
        except CamselError as exc:
            raise _http(exc) from exc
        seq = st.sequence
        if not (0 <= camera < seq.cameras):
            raise HTTPException(status_code=404, detail=f"camera {camera} out of range")
        ref = seq.frame_sets[index].images[camera]
        if ref.startswith("synth://"):
            return Response(content=_placeholder_png(sid, timestamp, camera),
                            media_type="image/png")
        path = Path(ref)
        if not path.is_absolute():
            path = st.directory / path
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"image file missing: {ref}")
        media = "image/png" if path.suffix.lower() == ".png" else "image/jpeg"
        return Response(content=path.read_bytes(), media_type=media)

    @app.post(f"{prefix}/sequences/{{sid}}/labels", response_model=schemas.LabelResponse)
    def submit_label(sid: str, body: schemas.LabelSubmission):
        try:
            seq = state.submit_label(
                sid, body.timestamp, body.camera, body.annotator, body.permutation
            )
        except CamselError as exc:
            raise _http(exc) from exc
        resolved = seq.resolved_labels().get(body.timestamp)
        conflicts = state.conflicts(sid)
        return schemas.LabelResponse(
            sequence_id=sid,
            stored=schemas.Vote(annotator=body.annotator, camera=body.camera, resolved=False),
            resolved_camera=None if resolved is None else resolved.camera,
            conflict=body.timestamp in conflicts,
            next_unlabeled=state.next_unlabeled(sid),
        )

    @app.get(f"{prefix}/sequences/{{sid}}/conflicts",
             response_model=list[schemas.ConflictInfo])
    def list_conflicts(sid: str):
        try:
            conflicts = state.conflicts(sid)
        except CamselError as exc:
            raise _http(exc) from exc
        return [
            schemas.ConflictInfo(
                timestamp=t,
                votes=[
                    schemas.Vote(annotator=r.annotator, camera=r.camera, resolved=r.resolved)
                    for r in recs
                ],
            )
            for t, recs in conflicts.items()
        ]

    @app.post(f"{prefix}/sequences/{{sid}}/conflicts/{{timestamp}}/resolve",
              response_model=schemas.ResolveResponse)
    def resolve_conflict(sid: str, timestamp: float, body: schemas.ResolveRequest):
        try:
            state.resolve(sid, timestamp, body.camera, body.reviewer)
        except CamselError as exc:
            raise _http(exc) from exc
        return schemas.ResolveResponse(
            sequence_id=sid,
            timestamp=timestamp,
            resolved_camera=body.camera,
            remaining_conflicts=len(state.conflicts(sid)),
        )

    @app.get(f"{prefix}/sequences/{{sid}}/export")
    def export_labels(sid: str):
        try:
            st = state.get(sid)
        except CamselError as exc:
            raise _http(exc) from exc
        text = st.labels_path.read_text(encoding="utf-8") if st.labels_path.exists() else ""
        if not text:
            from camsel.data.labels import export_annotations
            import tempfile

            with tempfile.NamedTemporaryFile("r", suffix=".txt", delete=False) as fh:
                tmp = Path(fh.name)
            export_annotations(st.sequence, tmp)
            text = tmp.read_text(encoding="utf-8")
            tmp.unlink()
        return Response(content=text, media_type="text/plain; charset=utf-8")

    @app.get(f"{prefix}/sequences/{{sid}}/progress/{{annotator}}",
             response_model=schemas.ProgressInfo)
    def progress(sid: str, annotator: str):
        try:
            st = state.get(sid)
        except CamselError as exc:
            raise _http(exc) from exc
        seq = st.sequence
        labeled = {
            r.timestamp for r in seq.labels if r.annotator == annotator
        }
        return schemas.ProgressInfo(
            sequence_id=sid,
            annotator=annotator,
            labeled=len(labeled),
            total=len(seq),
            cursor=next(
                (fs.timestamp for fs in seq.frame_sets if fs.timestamp not in labeled), None
            ),
        )

    @app.get(f"{prefix}/sequences/{{sid}}/predictions",
             response_model=schemas.PredictionsResponse)
    def predictions(
        sid: str,
        source: str = Query(default="checkpoint"),
        constant_camera: int = Query(default=0),
        lookback: int = Query(default=0, description="0 = use the checkpoint's lookback"),
        horizon: int = Query(default=0, description="0 = use the checkpoint's horizon"),
    ):
        try:
            st = state.get(sid)
        except CamselError as exc:
            raise _http(exc) from exc
        seq = st.sequence
        resolved = {t: r.camera for t, r in seq.resolved_labels().items()}
        timeline = [fs.timestamp for fs in seq.frame_sets]

        if source == "checkpoint":
            if state.model is None:
                raise HTTPException(
                    status_code=409,
                    detail="no checkpoint loaded; start the service with --checkpoint",
                )
            try:
                feats = state.features_for(sid)
                ablation = state.checkpoint.extras.get("ablation", "full")
                if ablation != "full":
                    from camsel.features.fusion import FusedLayout
                    # feature store layout reconstructed from the checkpoint config
                    width = feats.shape[1]
                    feats = _ablate_raw(feats, width, state, ablation)
                steps, labels = predict_sequence(state.model, feats, state.normalizer)
            except CamselError as exc:
                raise _http(exc) from exc
            covered = [int(i) for i in steps]
        else:
            L = lookback or (state.model.config.lookback if state.model else 12)
            H = horizon or (state.model.config.horizon if state.model else 6)
            T = len(timeline)
            starts = list(range(0, T - L - H + 1, H))
            if not starts:
                raise HTTPException(status_code=422, detail="sequence too short for the window")
            covered = [s + L + h for s in starts for h in range(H)]
            if source == "oracle":
                missing = [i for i in covered if timeline[i] not in resolved]
                if missing:
                    raise HTTPException(
                        status_code=409,
                        detail="oracle predictions need resolved labels on every covered frame",
                    )
                labels = np.array([resolved[timeline[i]] for i in covered])
            elif source == "constant":
                labels = np.full(len(covered), constant_camera, dtype=np.int64)
            else:
                raise HTTPException(status_code=422, detail=f"unknown source {source!r}")

        items = []
        pred_list: list[int] = []
        human_list: list[int] = []
        for idx, pred in zip(covered, np.asarray(labels).reshape(-1)):
            t = timeline[idx]
            human = resolved.get(t)
            items.append(
                schemas.PredictionItem(timestamp=t, predicted=int(pred), human=human)
            )
            if human is not None:
                pred_list.append(int(pred))
                human_list.append(int(human))
        agreement = None
        eval_accuracy = None
        if human_list:
            ev = evaluate_predictions(np.array(pred_list), np.array(human_list))
            agreement = float(np.mean(np.array(pred_list) == np.array(human_list)))
            eval_accuracy = ev.accuracy
        return schemas.PredictionsResponse(
            sequence_id=sid,
            source=source,
            items=items,
            agreement=agreement,
            evaluate_accuracy=eval_accuracy,
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _ablate_raw(feats: np.ndarray, width: int, state: ServiceState, mode: str) -> np.ndarray:
    """Cut a raw fused matrix down to the checkpoint's ablation mode."""
    cfg = state.model.config
    if mode == "no_visual":
        return feats[:, width - cfg.input_dim:]
    if mode == "no_semantic":
        return feats[:, :cfg.input_dim]
    return feats


def _placeholder_png(sid: str, timestamp: float, camera: int, size: int = 96) -> bytes:
    """Deterministic stand-in tile for synthetic image URIs."""
    from PIL import Image, ImageDraw

    digest = hashlib.sha256(f"{sid}:{timestamp:g}:{camera}".encode()).digest()
    base = tuple(64 + b % 128 for b in digest[:3])
    img = Image.new("RGB", (size, size), base)
    draw = ImageDraw.Draw(img)
    draw.rectangle([4, 4, size - 5, size - 5], outline=(255, 255, 255))
    draw.text((10, 10), f"c{camera}", fill=(255, 255, 255))
    draw.text((10, size - 24), f"t={timestamp:g}", fill=(255, 255, 255))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
