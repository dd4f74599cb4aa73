// API client for the design service. Concurrent score fetches carry sequence
// numbers so a stale response can never overwrite a newer one.

import type { EcpView, FieldError, JobRecord } from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public fieldErrors: FieldError[] = [],
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private seq = 0;
  private lastApplied = 0;

  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { detail?: unknown }).detail;
      if (Array.isArray(detail)) {
        throw new ApiError(resp.status, 'validation failed', detail as FieldError[]);
      }
      throw new ApiError(resp.status, typeof detail === 'string' ? detail : `HTTP ${resp.status}`);
    }
    return body as T;
  }

  submitJob(config: unknown): Promise<{ job_id: string; cached: boolean }> {
    return this.request('/api/v1/jobs', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request(`/api/v1/jobs/${jobId}`);
  }

  /**
   * Score view at extension cost w. Returns null when a newer request has
   * already been applied (the caller simply drops the stale payload).
   */
  async getEcp(jobId: string, w: number): Promise<EcpView | null> {
    const mySeq = ++this.seq;
    const view = await this.request<EcpView>(`/api/v1/jobs/${jobId}/ecp?w=${encodeURIComponent(w)}`);
    if (mySeq < this.lastApplied) return null;
    this.lastApplied = mySeq;
    return view;
  }

  async pollJob(
    jobId: string,
    onUpdate: (job: JobRecord) => void,
    intervalMs = 700,
    maxAttempts = 10_000,
  ): Promise<JobRecord> {
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      const job = await this.getJob(jobId);
      onUpdate(job);
      if (job.status === 'done' || job.status === 'failed') return job;
      await new Promise((r) => setTimeout(r, intervalMs));
    }
    throw new ApiError(0, 'job polling timed out');
  }
}

/** Rate limiter: trailing-edge execution, at most one call per windowMs. */
export function rateLimit<A extends unknown[]>(
  fn: (...args: A) => void,
  windowMs: number,
  now: () => number = () => Date.now(),
  schedule: (cb: () => void, ms: number) => void = (cb, ms) => {
    setTimeout(cb, ms);
  },
): (...args: A) => void {
  let lastRun = -Infinity;
  let pending: A | null = null;
  let scheduled = false;

  const run = (args: A) => {
    lastRun = now();
    fn(...args);
  };

  const flush = () => {
    scheduled = false;
    if (pending !== null) {
      const args = pending;
      pending = null;
      run(args);
    }
  };

  return (...args: A) => {
    const elapsed = now() - lastRun;
    if (elapsed >= windowMs && !scheduled) {
      run(args);
      return;
    }
    pending = args;
    if (!scheduled) {
      scheduled = true;
      schedule(flush, Math.max(windowMs - elapsed, 0));
    }
  };
}
