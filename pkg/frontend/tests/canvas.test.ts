import { describe, expect, it } from "vitest";
import { inflateSync } from "node:zlib";
import { CanvasState, SKETCH_SIZE, encodeGrayPng } from "../src/canvas";

function decodePng(bytes: Uint8Array) {
  // Minimal reader for the writer's own output: IHDR + one IDAT + IEND.
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  expect(Array.from(bytes.subarray(0, 8))).toEqual([
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a,
  ]);
  const width = view.getUint32(16);
  const height = view.getUint32(20);
  expect(view.getUint8(24)).toBe(8); // bit depth
  expect(view.getUint8(25)).toBe(0); // grayscale
  // Collect IDAT payloads.
  let off = 33;
  const idat: Buffer[] = [];
  while (off < bytes.length) {
    const len = view.getUint32(off);
    const type = String.fromCharCode(...bytes.subarray(off + 4, off + 8));
    if (type === "IDAT") idat.push(Buffer.from(bytes.subarray(off + 8, off + 8 + len)));
    off += 12 + len;
  }
  const raw = inflateSync(Buffer.concat(idat));
  const pixels = new Uint8ClampedArray(width * height);
  for (let y = 0; y < height; y++) {
    expect(raw[y * (width + 1)]).toBe(0); // filter byte
    pixels.set(raw.subarray(y * (width + 1) + 1, (y + 1) * (width + 1)), y * width);
  }
  return { width, height, pixels };
}

describe("CanvasState", () => {
  it("starts as an all-white bitmap", () => {
    const c = new CanvasState();
    expect(c.isBlank()).toBe(true);
    expect(c.bitmap.length).toBe(SKETCH_SIZE * SKETCH_SIZE);
  });

  it("clear restores all-white", () => {
    const c = new CanvasState();
    c.beginStroke({ x: 50, y: 50 });
    c.endStroke();
    expect(c.isBlank()).toBe(false);
    c.clear();
    expect(c.isBlank()).toBe(true);
  });

  it("undo after one stroke restores the pre-stroke bitmap exactly", () => {
    const c = new CanvasState();
    const before = c.bitmap.slice();
    c.beginStroke({ x: 10, y: 10 });
    c.continueStroke({ x: 10, y: 10 }, { x: 60, y: 80 });
    c.endStroke();
    expect(c.bitmap).not.toEqual(before);
    expect(c.undo()).toBe(true);
    expect(Array.from(c.bitmap)).toEqual(Array.from(before));
  });

  it("undo on empty stack reports false", () => {
    expect(new CanvasState().undo()).toBe(false);
  });

  it("strokes draw black pixels along the segment", () => {
    const c = new CanvasState(3);
    c.beginStroke({ x: 20, y: 112 });
    c.continueStroke({ x: 20, y: 112 }, { x: 200, y: 112 });
    c.endStroke();
    for (const x of [20, 60, 110, 160, 199]) {
      expect(c.bitmap[112 * SKETCH_SIZE + x]).toBe(0);
    }
    expect(c.bitmap[10 * SKETCH_SIZE + 10]).toBe(255);
  });

  it("exported PNG is pixel-identical to the bitmap", () => {
    const c = new CanvasState(5);
    c.beginStroke({ x: 30, y: 40 });
    c.continueStroke({ x: 30, y: 40 }, { x: 170, y: 120 });
    c.endStroke();
    const decoded = decodePng(c.exportPng());
    expect(decoded.width).toBe(SKETCH_SIZE);
    expect(decoded.height).toBe(SKETCH_SIZE);
    expect(Array.from(decoded.pixels)).toEqual(Array.from(c.bitmap));
  });

  it("export is deterministic", () => {
    const c = new CanvasState();
    c.beginStroke({ x: 100, y: 100 });
    c.endStroke();
    const a = c.exportPngBase64();
    const b = c.exportPngBase64();
    expect(a).toBe(b);
  });

  it("setBitmap validates size and is undoable", () => {
    const c = new CanvasState();
    expect(() => c.setBitmap(new Uint8ClampedArray(3))).toThrow(/224/);
    const black = new Uint8ClampedArray(SKETCH_SIZE * SKETCH_SIZE).fill(0);
    c.setBitmap(black);
    expect(c.isBlank()).toBe(false);
    c.undo();
    expect(c.isBlank()).toBe(true);
  });
});

describe("encodeGrayPng", () => {
  it("round-trips arbitrary pixel data", () => {
    const w = 17;
    const h = 9;
    const pixels = new Uint8ClampedArray(w * h).map((_, i) => (i * 37) % 256);
    const decoded = decodePng(encodeGrayPng(pixels, w, h));
    expect(decoded.width).toBe(w);
    expect(decoded.height).toBe(h);
    expect(Array.from(decoded.pixels)).toEqual(Array.from(pixels));
  });

  it("handles payloads larger than one deflate block", () => {
    const w = 300;
    const h = 300; // 90k raw bytes: multiple stored blocks
    const pixels = new Uint8ClampedArray(w * h).map((_, i) => i % 251);
    const decoded = decodePng(encodeGrayPng(pixels, w, h));
    expect(Array.from(decoded.pixels)).toEqual(Array.from(pixels));
  });
});
