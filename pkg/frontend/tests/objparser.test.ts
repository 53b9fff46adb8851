import { describe, expect, it } from "vitest";
import { boundingBox, parseObj } from "../src/objparser";

describe("parseObj", () => {
  it("parses vertices and 1-based triangle indices", () => {
    const mesh = parseObj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    expect(mesh.vertexCount).toBe(3);
    expect(mesh.triangleCount).toBe(1);
    expect(Array.from(mesh.indices)).toEqual([0, 1, 2]);
  });

  it("fans quads into triangles", () => {
    const mesh = parseObj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    expect(mesh.triangleCount).toBe(2);
    expect(Array.from(mesh.indices)).toEqual([0, 1, 2, 0, 2, 3]);
  });

  it("handles v/vt/vn face tokens and comments", () => {
    const mesh = parseObj("# hi\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n");
    expect(mesh.triangleCount).toBe(1);
  });

  it("supports negative (relative) indices", () => {
    const mesh = parseObj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    expect(Array.from(mesh.indices)).toEqual([0, 1, 2]);
  });

  it("rejects malformed vertices with the line number", () => {
    expect(() => parseObj("v 0 0 0\nv x 0 0\n")).toThrow(/line 2/);
  });

  it("rejects out-of-range indices", () => {
    expect(() => parseObj("v 0 0 0\nf 1 2 3\n")).toThrow(/out of range/);
  });

  it("computes bounding boxes", () => {
    const mesh = parseObj("v -1 0 2\nv 1 -3 0\nv 0 5 -2\nf 1 2 3\n");
    const box = boundingBox(mesh);
    expect(box.min).toEqual([-1, -3, -2]);
    expect(box.max).toEqual([1, 5, 2]);
  });
});
