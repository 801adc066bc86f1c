/** Browser entry point: wires the grid, conflict review, and prediction
 * overlay against the serving API. */

import { AnnotationApi, ApiError, SequenceInfo } from "./api.js";
import { ConflictQueue } from "./conflicts.js";
import { agreementStats, formatAgreement, predictionByTimestamp } from "./overlay.js";
import { AnnotationSession } from "./session.js";

const api = new AnnotationApi("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

class App {
  session: AnnotationSession | null = null;
  sequences: SequenceInfo[] = [];
  overlay: Map<number, number> | null = null;
  overlayFooter = "";
  status = "";

  constructor(private root: HTMLElement) {}

  async start(): Promise<void> {
    const annotator =
      window.localStorage.getItem("camsel-annotator") ??
      window.prompt("Annotator id?", "annotator") ??
      "annotator";
    window.localStorage.setItem("camsel-annotator", annotator);
    try {
      this.sequences = await api.listSequences();
    } catch (err) {
      this.renderError(`Cannot reach the annotation service: ${String(err)}`);
      return;
    }
    if (!this.sequences.length) {
      this.renderError("The dataset has no sequences.");
      return;
    }
    await this.openSequence(this.sequences[0].id, annotator);
    document.addEventListener("keydown", (event) => void this.onKey(event));
  }

  async openSequence(sequenceId: string, annotator?: string): Promise<void> {
    const who =
      annotator ?? window.localStorage.getItem("camsel-annotator") ?? "annotator";
    this.session = new AnnotationSession(api, sequenceId, who);
    this.overlay = null;
    this.overlayFooter = "";
    await this.session.resume();
    this.render();
  }

  async onKey(event: KeyboardEvent): Promise<void> {
    const session = this.session;
    if (!session || !session.grid) return;
    if (event.key === "ArrowLeft" || event.key === "ArrowRight") {
      const frame = session.frame;
      if (!frame) return;
      const target =
        event.key === "ArrowLeft" ? frame.prev_timestamp : frame.next_timestamp;
      if (target !== null) {
        await session.goto(target);
        this.render();
      }
      return;
    }
    const slot = session.grid.slotForKey(event.key);
    if (slot !== null) await this.submit(slot);
  }

  async submit(slot: number): Promise<void> {
    const session = this.session;
    if (!session) return;
    try {
      const response = await session.submitSlot(slot);
      this.status = response.conflict
        ? `Stored — disagreement at t=${response.stored.camera ?? ""} flagged for review`
        : "Stored";
    } catch (err) {
      this.status =
        err instanceof ApiError ? `Submit failed: ${err.message}` : String(err);
    }
    this.render();
  }

  async toggleOverlay(): Promise<void> {
    const session = this.session;
    if (!session) return;
    if (this.overlay) {
      this.overlay = null;
      this.overlayFooter = "";
      this.render();
      return;
    }
    try {
      const preds = await api.getPredictions(session.sequenceId, "checkpoint");
      this.overlay = predictionByTimestamp(preds.items);
      this.overlayFooter = formatAgreement(agreementStats(preds.items));
    } catch (err) {
      this.overlay = null;
      this.overlayFooter =
        err instanceof ApiError && err.status === 409
          ? "Prediction overlay unavailable: no checkpoint loaded on the server"
          : `Prediction overlay unavailable: ${String(err)}`;
    }
    this.render();
  }

  async reviewConflicts(): Promise<void> {
    const session = this.session;
    if (!session) return;
    const conflicts = new ConflictQueue(await api.getConflicts(session.sequenceId));
    const head = conflicts.head;
    if (!head) {
      this.status = "No conflicts to review";
      this.render();
      return;
    }
    const choices = ConflictQueue.choices(head);
    const picked = window.prompt(
      `t=${head.timestamp}: votes ${head.votes
        .map((v) => `${v.annotator}->cam${v.camera}`)
        .join(", ")}. Resolve to camera (${choices.join("/")})?`,
      String(choices[0]),
    );
    if (picked === null) return;
    const reviewer =
      window.localStorage.getItem("camsel-annotator") ?? "reviewer";
    await api.resolveConflict(
      session.sequenceId,
      head.timestamp,
      Number.parseInt(picked, 10),
      reviewer,
    );
    this.status = `Resolved t=${head.timestamp}`;
    this.render();
  }

  renderError(message: string): void {
    this.root.replaceChildren(el("p", { class: "error" }, message));
    const retry = el("button", {}, "Retry");
    retry.addEventListener("click", () => void this.start());
    this.root.append(retry);
  }

  render(): void {
    const session = this.session;
    this.root.replaceChildren();
    const bar = el("div", { class: "bar" });
    const picker = el("select");
    for (const seq of this.sequences) {
      const opt = el("option", { value: seq.id }, `${seq.id} (${seq.labeled}/${seq.frames})`);
      if (session && seq.id === session.sequenceId) opt.selected = true;
      picker.append(opt);
    }
    picker.addEventListener("change", () => void this.openSequence(picker.value));
    bar.append(picker);
    const overlayBtn = el("button", {}, this.overlay ? "Hide predictions" : "Compare predictions");
    overlayBtn.addEventListener("click", () => void this.toggleOverlay());
    bar.append(overlayBtn);
    const reviewBtn = el("button", {}, "Review conflicts");
    reviewBtn.addEventListener("click", () => void this.reviewConflicts());
    bar.append(reviewBtn);
    this.root.append(bar);

    if (!session) return;
    if (session.finished || !session.grid) {
      this.root.append(
        el("h2", {}, "All frames labeled"),
        el("p", {}, "Every timestamp in this sequence has your annotation."),
      );
      return;
    }

    const frame = session.grid.frame;
    this.root.append(
      el(
        "h2",
        {},
        `${frame.sequence_id} — t=${frame.timestamp}s (${frame.index + 1}/${frame.total})`,
      ),
    );
    const grid = el("div", { class: "grid" });
    const predicted = this.overlay?.get(frame.timestamp);
    for (const tile of frame.tiles) {
      const cell = el("div", { class: "tile", "data-slot": String(tile.slot) });
      const img = el("img", { src: tile.image_url, alt: `camera ${tile.camera}` });
      cell.append(img, el("span", { class: "hint" }, `${tile.slot + 1}`));
      if (predicted !== undefined && predicted === tile.camera) {
        cell.classList.add("model-pick");
      }
      if (frame.resolved_camera === tile.camera) cell.classList.add("labeled");
      cell.addEventListener("click", () => void this.submit(tile.slot));
      grid.append(cell);
    }
    this.root.append(grid);
    const footer = el("div", { class: "footer" });
    footer.append(el("span", {}, this.status));
    if (this.overlayFooter) footer.append(el("span", { class: "agree" }, this.overlayFooter));
    this.root.append(footer);
  }
}

const rootNode = document.getElementById("app");
if (rootNode) void new App(rootNode).start();
