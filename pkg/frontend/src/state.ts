// Studio state: view selection, generation history, stitch region, and the
// job-tracking rule that UI status always equals the last polled server
// status.

import type { JobStatus, MeshRef, ViewInfo } from "./api";

export interface HistoryEntry {
  jobId: string;
  label: string; // "generated" | "stitched"
  sketchPng: string; // base64 of the input sketch
  viewId: string;
  seed: number;
  status: JobStatus["status"];
  meshes: MeshRef[];
  error?: string;
}

export class StudioState {
  views: ViewInfo[] = [];
  selectedView = "front";
  history: HistoryEntry[] = [];
  generating = false;

  setViews(views: ViewInfo[]): void {
    this.views = views;
    if (!views.some((v) => v.name === this.selectedView) && views.length) {
      this.selectedView = views[0].name;
    }
  }

  selectView(name: string): void {
    if (!this.views.some((v) => v.name === name)) {
      throw new Error(`unknown view: ${name}`);
    }
    this.selectedView = name;
  }

  addJob(jobId: string, label: string, sketchPng: string, seed: number): HistoryEntry {
    const entry: HistoryEntry = {
      jobId,
      label,
      sketchPng,
      viewId: this.selectedView,
      seed,
      status: "queued",
      meshes: [],
    };
    this.history.push(entry);
    return entry;
  }

  applyPoll(jobId: string, status: JobStatus): void {
    const entry = this.history.find((h) => h.jobId === jobId);
    if (!entry) return;
    entry.status = status.status;
    if (status.results) entry.meshes = status.results.meshes;
    if (status.error) entry.error = status.error;
  }

  completedSketches(): HistoryEntry[] {
    return this.history.filter((h) => h.status === "done");
  }

  get stitchEnabled(): boolean {
    return this.completedSketches().length >= 2;
  }
}

export type HalfRegion = "top" | "bottom" | "left" | "right";

/** 16x16 patch-region grid matching the server's stitch semantics. */
export class RegionGrid {
  static readonly SIZE = 16;
  cells: boolean[][];

  constructor() {
    this.cells = RegionGrid.empty();
  }

  static empty(): boolean[][] {
    return Array.from({ length: RegionGrid.SIZE }, () =>
      Array<boolean>(RegionGrid.SIZE).fill(false),
    );
  }

  setHalf(which: HalfRegion): void {
    const n = RegionGrid.SIZE;
    const h = n / 2;
    this.cells = RegionGrid.empty();
    for (let r = 0; r < n; r++) {
      for (let c = 0; c < n; c++) {
        this.cells[r][c] =
          (which === "top" && r < h) ||
          (which === "bottom" && r >= h) ||
          (which === "left" && c < h) ||
          (which === "right" && c >= h);
      }
    }
  }

  toggle(row: number, col: number): void {
    this.cells[row][col] = !this.cells[row][col];
  }

  count(): number {
    return this.cells.flat().filter(Boolean).length;
  }
}
