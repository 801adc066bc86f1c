/** One annotator's labeling pass over a sequence.
 *
 * Loads frames, maps clicked slots to cameras through the grid state, and
 * advances the cursor to the next unlabeled timestamp after every
 * submission. Progress lives on the server, so a reload resumes where the
 * annotator left off.
 */

import { AnnotationApi, FrameView, LabelResponse } from "./api.js";
import { GridState } from "./grid.js";

export class AnnotationSession {
  grid: GridState | null = null;
  finished = false;

  constructor(
    private api: AnnotationApi,
    readonly sequenceId: string,
    readonly annotator: string,
  ) {}

  get frame(): FrameView | null {
    return this.grid ? this.grid.frame : null;
  }

  /** Resume from the server-side cursor (next unlabeled frame). */
  async resume(): Promise<FrameView | null> {
    const progress = await this.api.getProgress(this.sequenceId, this.annotator);
    if (progress.cursor === null) {
      this.finished = true;
      this.grid = null;
      return null;
    }
    return this.goto(progress.cursor);
  }

  async goto(timestamp: number): Promise<FrameView> {
    const frame = await this.api.getFrame(this.sequenceId, timestamp, this.annotator);
    this.grid = new GridState(frame);
    this.finished = false;
    return frame;
  }

  /** Submit the tile at ``slot``; returns the server response and advances. */
  async submitSlot(slot: number): Promise<LabelResponse> {
    if (!this.grid) throw new Error("no frame loaded");
    const camera = this.grid.select(slot);
    return this.submitCamera(camera);
  }

  /** Submit a true camera id (already permutation-independent). */
  async submitCamera(camera: number): Promise<LabelResponse> {
    if (!this.grid) throw new Error("no frame loaded");
    const frame = this.grid.frame;
    const response = await this.api.submitLabel(
      this.sequenceId,
      frame.timestamp,
      camera,
      this.annotator,
      frame.permutation,
    );
    await this.advance(response);
    return response;
  }

  private async advance(response: LabelResponse): Promise<void> {
    const progress = await this.api.getProgress(this.sequenceId, this.annotator);
    const next = progress.cursor ?? response.next_unlabeled;
    if (next === null || next === undefined) {
      this.finished = true;
      this.grid = null;
      return;
    }
    await this.goto(next);
  }
}
