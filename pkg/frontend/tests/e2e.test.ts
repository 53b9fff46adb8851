// Scripted studio session against a LIVE generation service: draw, pick the
// side-right view, generate, fetch + parse the mesh, then round-trip a
// stitch request. Drive it with scripts/run_studio_e2e.sh (which trains toy
// checkpoints and starts the server), or point SKETCHSDF_SERVICE_URL at a
// running instance.

import { describe, expect, it } from "vitest";
import { ServiceClient } from "../src/api";
import { CanvasState } from "../src/canvas";
import { parseObj } from "../src/objparser";
import { RegionGrid, StudioState } from "../src/state";

const SERVICE_URL = process.env.SKETCHSDF_SERVICE_URL;
const live = SERVICE_URL ? describe : describe.skip;

function drawChairishSketch(canvas: CanvasState): void {
  canvas.beginStroke({ x: 70, y: 120 });
  canvas.continueStroke({ x: 70, y: 120 }, { x: 150, y: 120 }); // seat
  canvas.continueStroke({ x: 150, y: 120 }, { x: 150, y: 180 }); // front leg
  canvas.endStroke();
  canvas.beginStroke({ x: 70, y: 120 });
  canvas.continueStroke({ x: 70, y: 120 }, { x: 70, y: 60 }); // back rest
  canvas.continueStroke({ x: 70, y: 60 }, { x: 150, y: 60 });
  canvas.endStroke();
  canvas.beginStroke({ x: 75, y: 120 });
  canvas.continueStroke({ x: 75, y: 120 }, { x: 75, y: 180 }); // rear leg
  canvas.endStroke();
}

live("studio e2e against live service", () => {
  const client = new ServiceClient(SERVICE_URL!, fetch);

  it("health and views respond", async () => {
    const health = await client.getHealth();
    expect(health.status).toBe("ok");
    const views = await client.getViews();
    expect(views.map((v) => v.name)).toContain("side-right");
  }, 30_000);

  it("draw -> side-right -> generate -> mesh renders", async () => {
    const state = new StudioState();
    state.setViews(await client.getViews());
    state.selectView("side-right");

    const canvas = new CanvasState(4);
    drawChairishSketch(canvas);
    expect(canvas.isBlank()).toBe(false);

    const png = canvas.exportPngBase64();
    const { job_id } = await client.generate({
      sketch: png,
      view_id: state.selectedView,
      seed: 11,
      steps: 12,
    });
    state.addJob(job_id, "generated", png, 11);
    const final = await client.pollJob(job_id, (s) => state.applyPoll(job_id, s));
    expect(final.status).toBe("done");
    expect(state.history[0].status).toBe("done");

    const meshRef = state.history[0].meshes[0];
    const text = await client.fetchMeshText(meshRef.uri);
    const parsed = parseObj(text);
    expect(parsed.triangleCount).toBeGreaterThan(0);
    expect(parsed.vertexCount).toBeGreaterThan(0);
  }, 300_000);

  it("stitch round-trip comes back labeled and meshed", async () => {
    const a = new CanvasState(4);
    drawChairishSketch(a);
    const b = new CanvasState(4);
    b.beginStroke({ x: 60, y: 60 });
    b.continueStroke({ x: 60, y: 60 }, { x: 170, y: 170 });
    b.endStroke();

    const region = new RegionGrid();
    region.setHalf("top");
    const { job_id } = await client.stitch({
      sketch_a: a.exportPngBase64(),
      sketch_b: b.exportPngBase64(),
      region: region.cells,
      view_id: "side-right",
      seed: 4,
      steps: 12,
    });
    const final = await client.pollJob(job_id);
    expect(final.status).toBe("done");
    const text = await client.fetchMeshText(final.results!.meshes[0].uri);
    expect(parseObj(text).vertexCount).toBeGreaterThan(0);
  }, 300_000);
});
