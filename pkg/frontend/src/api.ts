// Typed client for the generation service. Network failures retry with
// exponential backoff; at most one generation is in flight per client
// (extra requests queue, matching the tab-level concurrency rule).

export interface ViewInfo {
  name: string;
  azimuth: number;
  elevation: number;
  distance: number;
  fov_y: number;
  image_size: number;
}

export interface MeshRef {
  uri: string;
  bytes: number;
  triangles: number;
  watertight: boolean;
  warnings: string[];
  seed: number;
}

export interface JobResults {
  meshes: MeshRef[];
  occupancy_previews: number[][][];
  timings: Record<string, number>[];
}

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "done" | "failed";
  results?: JobResults;
  error?: string;
}

export interface GeneratePayload {
  sketch: string; // base64 PNG
  view_id: string;
  seed?: number;
  steps?: number;
  guidance?: number;
  num_samples?: number;
}

export interface StitchPayload {
  sketch_a: string;
  sketch_b: string;
  region: string | boolean[][];
  view_id: string;
  seed?: number;
  steps?: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ServiceClient {
  private inflight: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    private fetchImpl: FetchLike = fetch,
    private retries = 3,
    private backoffMs = 200,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      try {
        const res = await this.fetchImpl(this.baseUrl + path, init);
        if (!res.ok) {
          const body = await res.json().catch(() => ({}));
          throw new ApiError(res.status, String((body as any).detail ?? res.statusText));
        }
        return (await res.json()) as T;
      } catch (err) {
        if (err instanceof ApiError) throw err; // server said no: do not retry
        lastError = err;
        await sleep(this.backoffMs * 2 ** attempt);
      }
    }
    throw lastError;
  }

  getViews(): Promise<ViewInfo[]> {
    return this.request<ViewInfo[]>("/views");
  }

  getHealth(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/health");
  }

  /** Serialized per client: a second call waits for the first to enqueue. */
  generate(payload: GeneratePayload): Promise<{ job_id: string }> {
    return this.serialize(() =>
      this.request<{ job_id: string }>("/generate", postJson(payload)),
    );
  }

  generateCategory(payload: { category: string; seed?: number; steps?: number }) {
    return this.serialize(() =>
      this.request<{ job_id: string }>("/generate_category", postJson(payload)),
    );
  }

  stitch(payload: StitchPayload): Promise<{ job_id: string }> {
    return this.serialize(() =>
      this.request<{ job_id: string }>("/stitch", postJson(payload)),
    );
  }

  private serialize<T>(op: () => Promise<T>): Promise<T> {
    const next = this.inflight.catch(() => undefined).then(op);
    this.inflight = next;
    return next;
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request<JobStatus>(`/jobs/${jobId}`);
  }

  async pollJob(
    jobId: string,
    onUpdate?: (s: JobStatus) => void,
    intervalMs = 250,
    maxAttempts = 2400,
  ): Promise<JobStatus> {
    for (let i = 0; i < maxAttempts; i++) {
      const status = await this.getJob(jobId);
      onUpdate?.(status);
      if (status.status === "done" || status.status === "failed") return status;
      await sleep(intervalMs);
    }
    throw new Error(`job ${jobId} timed out`);
  }

  async fetchMeshText(uri: string): Promise<string> {
    const res = await this.fetchImpl(this.baseUrl + uri);
    if (!res.ok) throw new ApiError(res.status, "mesh fetch failed");
    return res.text();
  }
}

function postJson(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  };
}

function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}
