// Sketch canvas model: a 224x224 grayscale bitmap with stroke drawing and
// undo. Framework-free so it is testable without a DOM; the page layer
// blits `bitmap` into a <canvas> after every change.

export const SKETCH_SIZE = 224;

export interface Point {
  x: number;
  y: number;
}

export class CanvasState {
  readonly size = SKETCH_SIZE;
  bitmap: Uint8ClampedArray; // one byte per pixel, 255 = white background
  brushSize: number;
  private undoStack: Uint8ClampedArray[] = [];
  private strokeActive = false;

  constructor(brushSize = 3) {
    this.bitmap = new Uint8ClampedArray(this.size * this.size).fill(255);
    this.brushSize = brushSize;
  }

  beginStroke(p: Point): void {
    this.undoStack.push(this.bitmap.slice());
    this.strokeActive = true;
    this.stampDot(p);
  }

  continueStroke(from: Point, to: Point): void {
    if (!this.strokeActive) return;
    // Bresenham-ish: stamp along the segment at sub-brush spacing.
    const dx = to.x - from.x;
    const dy = to.y - from.y;
    const steps = Math.max(Math.abs(dx), Math.abs(dy), 1);
    for (let i = 0; i <= steps; i++) {
      this.stampDot({ x: from.x + (dx * i) / steps, y: from.y + (dy * i) / steps });
    }
  }

  endStroke(): void {
    this.strokeActive = false;
  }

  private stampDot(p: Point): void {
    const r = this.brushSize / 2;
    const x0 = Math.max(0, Math.floor(p.x - r));
    const x1 = Math.min(this.size - 1, Math.ceil(p.x + r));
    const y0 = Math.max(0, Math.floor(p.y - r));
    const y1 = Math.min(this.size - 1, Math.ceil(p.y + r));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const ddx = x + 0.5 - p.x;
        const ddy = y + 0.5 - p.y;
        if (ddx * ddx + ddy * ddy <= r * r) {
          this.bitmap[y * this.size + x] = 0;
        }
      }
    }
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.bitmap = prev;
    return true;
  }

  clear(): void {
    this.undoStack.push(this.bitmap.slice());
    this.bitmap = new Uint8ClampedArray(this.size * this.size).fill(255);
  }

  setBitmap(pixels: Uint8ClampedArray): void {
    if (pixels.length !== this.size * this.size) {
      throw new Error(`bitmap must be ${this.size}x${this.size}`);
    }
    this.undoStack.push(this.bitmap.slice());
    this.bitmap = pixels.slice();
  }

  isBlank(): boolean {
    return this.bitmap.every((v) => v === 255);
  }

  /** Grayscale PNG bytes, pixel-identical to the bitmap. */
  exportPng(): Uint8Array {
    return encodeGrayPng(this.bitmap, this.size, this.size);
  }

  exportPngBase64(): string {
    return bytesToBase64(this.exportPng());
  }
}

// --- Minimal PNG writer (grayscale 8-bit, stored deflate blocks) ---------
// Good enough for 224x224 sketches; avoids a canvas dependency so exports
// are byte-deterministic in both browser and tests.

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of bytes) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (const v of bytes) {
    a = (a + v) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + data.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, data.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(data, 8);
  const crc = crc32(out.subarray(4, 8 + data.length));
  view.setUint32(8 + data.length, crc);
  return out;
}

function storedDeflate(raw: Uint8Array): Uint8Array {
  // zlib header + stored (uncompressed) deflate blocks + adler32.
  const blocks: Uint8Array[] = [new Uint8Array([0x78, 0x01])];
  const max = 65535;
  for (let off = 0; off < raw.length; off += max) {
    const part = raw.subarray(off, Math.min(off + max, raw.length));
    const head = new Uint8Array(5);
    head[0] = off + max >= raw.length ? 1 : 0; // BFINAL
    head[1] = part.length & 0xff;
    head[2] = part.length >>> 8;
    head[3] = ~part.length & 0xff;
    head[4] = (~part.length >>> 8) & 0xff;
    blocks.push(head, part);
  }
  const trailer = new Uint8Array(4);
  new DataView(trailer.buffer).setUint32(0, adler32(raw));
  blocks.push(trailer);
  return concatBytes(blocks);
}

function concatBytes(parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let off = 0;
  for (const p of parts) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}

export function encodeGrayPng(
  pixels: Uint8ClampedArray | Uint8Array,
  width: number,
  height: number,
): Uint8Array {
  const ihdr = new Uint8Array(13);
  const v = new DataView(ihdr.buffer);
  v.setUint32(0, width);
  v.setUint32(4, height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  const raw = new Uint8Array(height * (width + 1)); // filter byte per row
  for (let y = 0; y < height; y++) {
    raw[y * (width + 1)] = 0;
    raw.set(
      (pixels as Uint8Array).subarray(y * width, (y + 1) * width),
      y * (width + 1) + 1,
    );
  }
  return concatBytes([
    new Uint8Array([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", storedDeflate(raw)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function bytesToBase64(bytes: Uint8Array): string {
  if (typeof btoa === "function") {
    let bin = "";
    for (const b of bytes) bin += String.fromCharCode(b);
    return btoa(bin);
  }
  return Buffer.from(bytes).toString("base64");
}
