"""Request/response models of the annotation and review API (v1)."""

from __future__ import annotations

from pydantic import BaseModel, Field

API_VERSION = "v1"


class HealthResponse(BaseModel):
    status: str
    api_version: str
    package_version: str


class SequenceInfo(BaseModel):
    id: str
    frames: int
    cameras: int
    labeled: int
    conflicts: int
    synthetic: bool
    fps: float
    first_timestamp: float
    last_timestamp: float


class Tile(BaseModel):
    slot: int
    camera: int
    image_url: str


class Vote(BaseModel):
    annotator: str
    camera: int
    resolved: bool


class FrameView(BaseModel):
    sequence_id: str
    timestamp: float
    index: int
    total: int
    tiles: list[Tile]
    permutation: str = Field(description="slot->camera mapping token, e.g. '3,0,5,1,2,4'")
    resolved_camera: int | None
    votes: list[Vote]
    prev_timestamp: float | None
    next_timestamp: float | None
    next_unlabeled: float | None


class LabelSubmission(BaseModel):
    timestamp: float
    camera: int
    annotator: str
    permutation: str | None = None  # echoed display permutation, for the audit trail


class LabelResponse(BaseModel):
    sequence_id: str
    stored: Vote
    resolved_camera: int | None
    conflict: bool
    next_unlabeled: float | None


class ConflictInfo(BaseModel):
    timestamp: float
    votes: list[Vote]


class ResolveRequest(BaseModel):
    camera: int
    reviewer: str


class ResolveResponse(BaseModel):
    sequence_id: str
    timestamp: float
    resolved_camera: int
    remaining_conflicts: int


class ProgressInfo(BaseModel):
    sequence_id: str
    annotator: str
    labeled: int
    total: int
    cursor: float | None


class PredictionItem(BaseModel):
    timestamp: float
    predicted: int
    human: int | None


class PredictionsResponse(BaseModel):
    sequence_id: str
    source: str
    items: list[PredictionItem]
    agreement: float | None = Field(
        default=None, description="fraction of covered, human-labeled steps where model == human"
    )
    evaluate_accuracy: float | None = Field(
        default=None, description="the evaluation pipeline's accuracy on the same label set"
    )


class ErrorResponse(BaseModel):
    detail: str
