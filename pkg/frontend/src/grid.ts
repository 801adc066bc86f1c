/** View-grid state: the six tiles, the display permutation, and the mapping
 * from what the annotator clicked to the true camera id.
 *
 * The server shuffles tile order per (sequence, timestamp, annotator) so
 * annotators cannot learn positional habits; the permutation token travels
 * with the frame and every selection maps through it before submission.
 * Stored labels therefore never depend on the display order.
 */

import type { FrameView } from "./api.js";

export function parsePermutation(token: string): number[] {
  const cameras = token.split(",").map((part) => Number.parseInt(part, 10));
  if (cameras.some((c) => Number.isNaN(c))) {
    throw new Error(`malformed permutation token: ${token}`);
  }
  const seen = new Set(cameras);
  if (seen.size !== cameras.length) {
    throw new Error(`permutation token repeats a camera: ${token}`);
  }
  return cameras;
}

export class GridState {
  readonly permutation: number[];
  private selectedSlot: number | null = null;

  constructor(readonly frame: FrameView) {
    this.permutation = parsePermutation(frame.permutation);
    if (frame.tiles.length !== this.permutation.length) {
      throw new Error("tile count does not match the permutation");
    }
  }

  get slots(): number {
    return this.permutation.length;
  }

  cameraForSlot(slot: number): number {
    if (slot < 0 || slot >= this.slots) throw new Error(`slot ${slot} out of range`);
    return this.permutation[slot];
  }

  slotForCamera(camera: number): number {
    const slot = this.permutation.indexOf(camera);
    if (slot < 0) throw new Error(`camera ${camera} not on the grid`);
    return slot;
  }

  select(slot: number): number {
    const camera = this.cameraForSlot(slot);
    this.selectedSlot = slot;
    return camera;
  }

  get selection(): { slot: number; camera: number } | null {
    if (this.selectedSlot === null) return null;
    return { slot: this.selectedSlot, camera: this.cameraForSlot(this.selectedSlot) };
  }

  /** Keyboard shortcuts: digits 1..N pick the tile in that display slot. */
  slotForKey(key: string): number | null {
    const digit = Number.parseInt(key, 10);
    if (Number.isNaN(digit) || digit < 1 || digit > this.slots) return null;
    return digit - 1;
  }
}
