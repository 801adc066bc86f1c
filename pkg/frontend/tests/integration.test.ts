/** End-to-end tests against the real annotation service: the labeling
 * round trip with a conflict, permutation independence of stored labels,
 * and the prediction-overlay agreement cross-check. */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnnotationApi, ApiError } from "../src/api.js";
import { GridState } from "../src/grid.js";
import { agreementStats } from "../src/overlay.js";
import { AnnotationSession } from "../src/session.js";
import { pythonEval, startService, type ServiceHandle } from "./service.js";

let service: ServiceHandle;
let api: AnnotationApi;

beforeAll(async () => {
  service = await startService();
  api = new AnnotationApi(service.baseUrl);
});

afterAll(async () => {
  await service?.stop();
});

describe("annotation round trip", () => {
  const SEQ = "uitest-01";

  it("labels 20 timestamps with one injected conflict, reviews, exports, re-ingests", async () => {
    // alice works through the first 20 frames via the grid, cursor-driven
    const alice = new AnnotationSession(api, SEQ, "alice");
    await alice.resume();
    for (let i = 0; i < 20; i++) {
      const frame = alice.frame;
      expect(frame).not.toBeNull();
      expect(frame!.timestamp).toBe(i);
      const wanted = i % 6;
      const slot = alice.grid!.slotForCamera(wanted);
      const response = await alice.submitSlot(slot);
      expect(response.stored.camera).toBe(wanted);
    }

    // bob disagrees at t=7 (alice picked camera 1 there)
    const bobFrame = await api.getFrame(SEQ, 7, "bob");
    const bobGrid = new GridState(bobFrame);
    const bobSlot = bobGrid.slotForCamera(4);
    await api.submitLabel(SEQ, 7, bobGrid.cameraForSlot(bobSlot), "bob", bobFrame.permutation);

    const conflicts = await api.getConflicts(SEQ);
    expect(conflicts.map((c) => c.timestamp)).toEqual([7]);
    expect(new Set(conflicts[0].votes.map((v) => v.annotator))).toEqual(
      new Set(["alice", "bob"]),
    );

    const resolution = await api.resolveConflict(SEQ, 7, 1, "lead");
    expect(resolution.remaining_conflicts).toBe(0);
    expect(await api.getConflicts(SEQ)).toEqual([]);

    // export and re-ingest through the data layer: 20 resolved labels
    const exported = await api.exportLabels(SEQ);
    const dir = mkdtempSync(join(tmpdir(), "camsel-export-"));
    const exportPath = join(dir, "labels.txt");
    writeFileSync(exportPath, exported);
    const summary = await pythonEval(
      [
        "from camsel.data.labels import import_annotations",
        `records = import_annotations(${JSON.stringify(exportPath)})`,
        "resolved = [r for r in records if r.resolved]",
        "timestamps = sorted(r.timestamp for r in resolved)",
        "cameras = {r.timestamp: r.camera for r in resolved}",
        "print(len(resolved), timestamps == [float(t) for t in range(20)], cameras[7.0])",
      ].join("\n"),
    );
    expect(summary).toBe("20 True 1");
  });

  it("stores permutation-independent camera ids", async () => {
    const SEQ2 = "uitest-01";
    // find a timestamp where the two annotators see different tile orders
    let t = 25;
    let carolView = await api.getFrame(SEQ2, t, "carol");
    let daveView = await api.getFrame(SEQ2, t, "dave");
    for (let probe = 25; probe < 35 && carolView.permutation === daveView.permutation; probe++) {
      t = probe;
      carolView = await api.getFrame(SEQ2, t, "carol");
      daveView = await api.getFrame(SEQ2, t, "dave");
    }
    expect(carolView.permutation).not.toBe(daveView.permutation);

    // both intend camera 3, each clicking their own slot for it
    const carolGrid = new GridState(carolView);
    const daveGrid = new GridState(daveView);
    expect(carolGrid.slotForCamera(3)).not.toBe(daveGrid.slotForCamera(3));
    await api.submitLabel(
      SEQ2, t, carolGrid.cameraForSlot(carolGrid.slotForCamera(3)), "carol",
      carolView.permutation,
    );
    await api.submitLabel(
      SEQ2, t, daveGrid.cameraForSlot(daveGrid.slotForCamera(3)), "dave",
      daveView.permutation,
    );

    const after = await api.getFrame(SEQ2, t, "carol");
    const stored = after.votes.filter(
      (v) => v.annotator === "carol" || v.annotator === "dave",
    );
    expect(stored).toHaveLength(2);
    expect(stored.every((v) => v.camera === 3)).toBe(true);
    expect(after.resolved_camera).toBe(3);
  });

  it("submitted labels round-trip through an immediate re-fetch", async () => {
    await api.submitLabel("uitest-01", 30, 2, "erin");
    const view = await api.getFrame("uitest-01", 30, "erin");
    expect(view.votes.some((v) => v.annotator === "erin" && v.camera === 2)).toBe(true);
  });

  it("rejects out-of-range timestamps with the valid range", async () => {
    await expect(api.getFrame("uitest-01", 999, "alice")).rejects.toThrowError(ApiError);
    await expect(api.getFrame("uitest-01", 999, "alice")).rejects.toThrow(/\[0, 39\]/);
  });
});

describe("prediction overlay", () => {
  const SEQ = "uitest-02"; // keeps its synthetic ground truth

  it("oracle agreement is 100% and matches the evaluation accuracy", async () => {
    const preds = await api.getPredictions(SEQ, "oracle", { lookback: 12, horizon: 6 });
    const stats = agreementStats(preds.items);
    expect(stats.agreement).toBe(1);
    expect(preds.evaluate_accuracy).toBe(1);
  });

  it("constant-predictor footer equals evaluate() accuracy within 2 decimals", async () => {
    for (const camera of [0, 3]) {
      const preds = await api.getPredictions(SEQ, "constant", {
        constantCamera: camera,
        lookback: 12,
        horizon: 6,
      });
      const stats = agreementStats(preds.items);
      expect(stats.agreement).not.toBeNull();
      expect(preds.evaluate_accuracy).not.toBeNull();
      expect(Math.abs(stats.agreement! - preds.evaluate_accuracy!)).toBeLessThan(0.005);
      expect(stats.agreement!.toFixed(2)).toBe(preds.evaluate_accuracy!.toFixed(2));
    }
  });

  it("checkpoint overlay reports a disabled state without a checkpoint", async () => {
    await expect(api.getPredictions(SEQ, "checkpoint")).rejects.toThrow(/checkpoint/);
  });
});
