/** Typed client for the camsel annotation service (API v1). */

export interface SequenceInfo {
  id: string;
  frames: number;
  cameras: number;
  labeled: number;
  conflicts: number;
  synthetic: boolean;
  fps: number;
  first_timestamp: number;
  last_timestamp: number;
}

export interface Tile {
  slot: number;
  camera: number;
  image_url: string;
}

export interface Vote {
  annotator: string;
  camera: number;
  resolved: boolean;
}

export interface FrameView {
  sequence_id: string;
  timestamp: number;
  index: number;
  total: number;
  tiles: Tile[];
  permutation: string;
  resolved_camera: number | null;
  votes: Vote[];
  prev_timestamp: number | null;
  next_timestamp: number | null;
  next_unlabeled: number | null;
}

export interface LabelResponse {
  sequence_id: string;
  stored: Vote;
  resolved_camera: number | null;
  conflict: boolean;
  next_unlabeled: number | null;
}

export interface ConflictInfo {
  timestamp: number;
  votes: Vote[];
}

export interface ProgressInfo {
  sequence_id: string;
  annotator: string;
  labeled: number;
  total: number;
  cursor: number | null;
}

export interface PredictionItem {
  timestamp: number;
  predicted: number;
  human: number | null;
}

export interface PredictionsResponse {
  sequence_id: string;
  source: string;
  items: PredictionItem[];
  agreement: number | null;
  evaluate_accuracy: number | null;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class AnnotationApi {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return `${this.base}/api/v1${path}`;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.url(path), init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; api_version: string }> {
    return this.request("/health");
  }

  listSequences(): Promise<SequenceInfo[]> {
    return this.request("/sequences");
  }

  getFrame(sequenceId: string, timestamp: number, annotator: string): Promise<FrameView> {
    const query = new URLSearchParams({ annotator });
    return this.request(`/sequences/${sequenceId}/frames/${timestamp}?${query}`);
  }

  submitLabel(
    sequenceId: string,
    timestamp: number,
    camera: number,
    annotator: string,
    permutation?: string,
  ): Promise<LabelResponse> {
    return this.request(`/sequences/${sequenceId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ timestamp, camera, annotator, permutation }),
    });
  }

  getConflicts(sequenceId: string): Promise<ConflictInfo[]> {
    return this.request(`/sequences/${sequenceId}/conflicts`);
  }

  resolveConflict(
    sequenceId: string,
    timestamp: number,
    camera: number,
    reviewer: string,
  ): Promise<{ remaining_conflicts: number }> {
    return this.request(`/sequences/${sequenceId}/conflicts/${timestamp}/resolve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ camera, reviewer }),
    });
  }

  async exportLabels(sequenceId: string): Promise<string> {
    const resp = await fetch(this.url(`/sequences/${sequenceId}/export`));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }

  getProgress(sequenceId: string, annotator: string): Promise<ProgressInfo> {
    return this.request(`/sequences/${sequenceId}/progress/${annotator}`);
  }

  getPredictions(
    sequenceId: string,
    source: "checkpoint" | "oracle" | "constant",
    options: { constantCamera?: number; lookback?: number; horizon?: number } = {},
  ): Promise<PredictionsResponse> {
    const query = new URLSearchParams({ source });
    if (options.constantCamera !== undefined) {
      query.set("constant_camera", String(options.constantCamera));
    }
    if (options.lookback !== undefined) query.set("lookback", String(options.lookback));
    if (options.horizon !== undefined) query.set("horizon", String(options.horizon));
    return this.request(`/sequences/${sequenceId}/predictions?${query}`);
  }
}
