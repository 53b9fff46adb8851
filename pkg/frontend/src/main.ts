// Studio page wiring: draw, pick a view, generate, inspect, stitch.

import { ServiceClient } from "./api";
import { CanvasState, SKETCH_SIZE } from "./canvas";
import { parseObj } from "./objparser";
import { RegionGrid, StudioState, type HalfRegion } from "./state";
import { MeshViewer } from "./viewer";

const SERVICE_URL = (window as any).SKETCHSDF_SERVICE_URL ?? "http://127.0.0.1:8008";

const app = document.querySelector<HTMLDivElement>("#app")!;
const client = new ServiceClient(SERVICE_URL);
const state = new StudioState();
const sketch = new CanvasState(4);

// --- layout ---------------------------------------------------------------
app.innerHTML = `
  <h1>sketchsdf studio</h1>
  <div style="display:flex; gap:16px">
    <div>
      <canvas id="sketch" width="${SKETCH_SIZE}" height="${SKETCH_SIZE}"
              style="border:1px solid #888; image-rendering:pixelated"></canvas>
      <div>
        <button id="undo">undo</button>
        <button id="clear">clear</button>
        <select id="views"></select>
        <button id="generate">generate</button>
      </div>
      <div id="status"></div>
      <div id="history"></div>
      <div id="stitch-panel" style="display:none">
        <h3>stitch</h3>
        <select id="stitch-a"></select>
        <select id="stitch-b"></select>
        <select id="stitch-region">
          <option>top</option><option>bottom</option>
          <option>left</option><option>right</option>
        </select>
        <button id="stitch-go">stitch</button>
        <div id="region-grid" style="display:grid;
             grid-template-columns:repeat(16, 10px); gap:1px"></div>
      </div>
    </div>
    <div id="viewer"></div>
  </div>
`;

const canvasEl = document.querySelector<HTMLCanvasElement>("#sketch")!;
const ctx = canvasEl.getContext("2d")!;
const statusEl = document.querySelector<HTMLDivElement>("#status")!;
const viewer = new MeshViewer(document.querySelector("#viewer")!);
const region = new RegionGrid();

function blit(): void {
  const img = ctx.createImageData(SKETCH_SIZE, SKETCH_SIZE);
  for (let i = 0; i < sketch.bitmap.length; i++) {
    const v = sketch.bitmap[i];
    img.data[4 * i] = img.data[4 * i + 1] = img.data[4 * i + 2] = v;
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

function canvasPoint(e: PointerEvent) {
  const rect = canvasEl.getBoundingClientRect();
  return {
    x: ((e.clientX - rect.left) / rect.width) * SKETCH_SIZE,
    y: ((e.clientY - rect.top) / rect.height) * SKETCH_SIZE,
  };
}

let lastPoint: { x: number; y: number } | null = null;
canvasEl.addEventListener("pointerdown", (e) => {
  lastPoint = canvasPoint(e);
  sketch.beginStroke(lastPoint);
  blit();
});
canvasEl.addEventListener("pointermove", (e) => {
  if (!lastPoint) return;
  const p = canvasPoint(e);
  sketch.continueStroke(lastPoint, p);
  lastPoint = p;
  blit();
});
window.addEventListener("pointerup", () => {
  lastPoint = null;
  sketch.endStroke();
});

document.querySelector("#undo")!.addEventListener("click", () => {
  sketch.undo();
  blit();
});
document.querySelector("#clear")!.addEventListener("click", () => {
  sketch.clear();
  blit();
});

const viewSelect = document.querySelector<HTMLSelectElement>("#views")!;
viewSelect.addEventListener("change", () => state.selectView(viewSelect.value));

function renderHistory(): void {
  const container = document.querySelector<HTMLDivElement>("#history")!;
  container.innerHTML = "<h3>history</h3>";
  for (const entry of state.history) {
    const row = document.createElement("div");
    row.textContent = `${entry.label} [${entry.viewId}] seed ${entry.seed}: ${entry.status}`;
    if (entry.status === "done" && entry.meshes.length) {
      const show = document.createElement("button");
      show.textContent = "show";
      show.addEventListener("click", async () => {
        const text = await client.fetchMeshText(entry.meshes[0].uri);
        viewer.showMesh(parseObj(text));
        const v = state.views.find((vv) => vv.name === entry.viewId);
        if (v) viewer.setView(v);
      });
      const restore = document.createElement("button");
      restore.textContent = "load sketch";
      restore.addEventListener("click", () => restoreSketch(entry.sketchPng));
      row.append(" ", show, restore);
    }
    if (entry.error) row.textContent += ` (${entry.error})`;
    container.appendChild(row);
  }
  const panel = document.querySelector<HTMLDivElement>("#stitch-panel")!;
  panel.style.display = state.stitchEnabled ? "block" : "none";
  if (state.stitchEnabled) refreshStitchSelectors();
}

async function restoreSketch(pngB64: string): Promise<void> {
  // Decode through an offscreen image so the canvas shows the exact pixels.
  const img = new Image();
  img.src = `data:image/png;base64,${pngB64}`;
  await img.decode();
  const off = document.createElement("canvas");
  off.width = off.height = SKETCH_SIZE;
  const octx = off.getContext("2d")!;
  octx.drawImage(img, 0, 0);
  const data = octx.getImageData(0, 0, SKETCH_SIZE, SKETCH_SIZE).data;
  const gray = new Uint8ClampedArray(SKETCH_SIZE * SKETCH_SIZE);
  for (let i = 0; i < gray.length; i++) gray[i] = data[4 * i];
  sketch.setBitmap(gray);
  blit();
}

async function track(jobId: string): Promise<void> {
  statusEl.textContent = `job ${jobId}...`;
  const final = await client.pollJob(jobId, (s) => {
    state.applyPoll(jobId, s);
    statusEl.textContent = `job ${jobId}: ${s.status}`;
    renderHistory();
  });
  if (final.status === "failed") statusEl.textContent = `failed: ${final.error}`;
  renderHistory();
}

document.querySelector("#generate")!.addEventListener("click", async () => {
  if (state.generating) return;
  state.generating = true;
  try {
    const png = sketch.exportPngBase64();
    const seed = Math.floor(Math.random() * 1e6);
    const { job_id } = await client.generate({
      sketch: png,
      view_id: state.selectedView,
      seed,
    });
    state.addJob(job_id, "generated", png, seed);
    renderHistory();
    await track(job_id);
  } catch (err) {
    statusEl.textContent = String(err);
  } finally {
    state.generating = false;
  }
});

function refreshStitchSelectors(): void {
  for (const id of ["#stitch-a", "#stitch-b"]) {
    const sel = document.querySelector<HTMLSelectElement>(id)!;
    const current = sel.value;
    sel.innerHTML = "";
    state.completedSketches().forEach((h, i) => {
      const opt = document.createElement("option");
      opt.value = String(i);
      opt.textContent = `${h.label} seed ${h.seed}`;
      sel.appendChild(opt);
    });
    if (current) sel.value = current;
  }
}

function renderRegionGrid(): void {
  const grid = document.querySelector<HTMLDivElement>("#region-grid")!;
  grid.innerHTML = "";
  for (let r = 0; r < RegionGrid.SIZE; r++) {
    for (let c = 0; c < RegionGrid.SIZE; c++) {
      const cell = document.createElement("div");
      cell.style.width = cell.style.height = "10px";
      cell.style.background = region.cells[r][c] ? "#36c" : "#ddd";
      cell.addEventListener("click", () => {
        region.toggle(r, c);
        renderRegionGrid();
      });
      grid.appendChild(cell);
    }
  }
}

document.querySelector("#stitch-region")!.addEventListener("change", (e) => {
  region.setHalf((e.target as HTMLSelectElement).value as HalfRegion);
  renderRegionGrid();
});

document.querySelector("#stitch-go")!.addEventListener("click", async () => {
  const done = state.completedSketches();
  const a = done[Number((document.querySelector("#stitch-a") as HTMLSelectElement).value)];
  const b = done[Number((document.querySelector("#stitch-b") as HTMLSelectElement).value)];
  if (!a || !b) return;
  const seed = Math.floor(Math.random() * 1e6);
  const { job_id } = await client.stitch({
    sketch_a: a.sketchPng,
    sketch_b: b.sketchPng,
    region: region.cells,
    view_id: state.selectedView,
    seed,
  });
  state.addJob(job_id, "stitched", a.sketchPng, seed);
  renderHistory();
  await track(job_id);
});

async function init(): Promise<void> {
  blit();
  region.setHalf("top");
  renderRegionGrid();
  try {
    state.setViews(await client.getViews());
    for (const v of state.views) {
      const opt = document.createElement("option");
      opt.value = v.name;
      opt.textContent = `${v.name} (${v.azimuth} deg)`;
      viewSelect.appendChild(opt);
    }
    viewSelect.value = state.selectedView;
    statusEl.textContent = "ready";
  } catch (err) {
    statusEl.textContent = `service unreachable: ${err}`;
  }
}

init();
