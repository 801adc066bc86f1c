import { describe, expect, it } from "vitest";

import type { FrameView } from "../src/api.js";
import { GridState, parsePermutation } from "../src/grid.js";

function frameWith(permutation: string): FrameView {
  const cameras = permutation.split(",").map(Number);
  return {
    sequence_id: "s",
    timestamp: 3,
    index: 3,
    total: 10,
    tiles: cameras.map((camera, slot) => ({
      slot,
      camera,
      image_url: `/img/${camera}`,
    })),
    permutation,
    resolved_camera: null,
    votes: [],
    prev_timestamp: 2,
    next_timestamp: 4,
    next_unlabeled: 3,
  };
}

describe("parsePermutation", () => {
  it("parses a camera list", () => {
    expect(parsePermutation("3,0,5,1,2,4")).toEqual([3, 0, 5, 1, 2, 4]);
  });

  it("rejects repeats and junk", () => {
    expect(() => parsePermutation("1,1,2")).toThrow(/repeats/);
    expect(() => parsePermutation("a,b")).toThrow(/malformed/);
  });
});

describe("GridState", () => {
  it("maps clicked slots through the permutation to true cameras", () => {
    const grid = new GridState(frameWith("3,0,5,1,2,4"));
    expect(grid.cameraForSlot(0)).toBe(3);
    expect(grid.cameraForSlot(3)).toBe(1);
    expect(grid.select(2)).toBe(5);
    expect(grid.selection).toEqual({ slot: 2, camera: 5 });
  });

  it("inverts camera to slot", () => {
    const grid = new GridState(frameWith("3,0,5,1,2,4"));
    for (let camera = 0; camera < 6; camera++) {
      expect(grid.cameraForSlot(grid.slotForCamera(camera))).toBe(camera);
    }
  });

  it("the same intended camera maps to different slots under different permutations", () => {
    const a = new GridState(frameWith("3,0,5,1,2,4"));
    const b = new GridState(frameWith("0,1,2,3,4,5"));
    expect(a.slotForCamera(5)).toBe(2);
    expect(b.slotForCamera(5)).toBe(5);
    // ...but both resolve back to the same stored camera id
    expect(a.cameraForSlot(a.slotForCamera(5))).toBe(b.cameraForSlot(b.slotForCamera(5)));
  });

  it("keyboard digits 1..6 map to display slots", () => {
    const grid = new GridState(frameWith("3,0,5,1,2,4"));
    expect(grid.slotForKey("1")).toBe(0);
    expect(grid.slotForKey("6")).toBe(5);
    expect(grid.slotForKey("7")).toBeNull();
    expect(grid.slotForKey("x")).toBeNull();
  });

  it("rejects out-of-range slots and unknown cameras", () => {
    const grid = new GridState(frameWith("1,0"));
    expect(() => grid.cameraForSlot(2)).toThrow(/out of range/);
    expect(() => grid.slotForCamera(4)).toThrow(/not on the grid/);
  });
});
