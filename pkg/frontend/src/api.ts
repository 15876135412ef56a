/** Thin typed client for the mesobench service.
 *
 * Every number shown anywhere in the workbench originates from these
 * calls; the client performs no physics.  The fetch function is
 * injectable so tests can drive the client without a network.
 */

import type {
  Band,
  FieldFramePayload,
  HistoryTable,
  LatticePreview,
  Manifest,
  SceneDoc,
  ValidationError,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string, readonly errors?: ValidationError[]) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = '/api/v1',
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const errors = (body as { errors?: ValidationError[] }).errors;
      const message = (body as { error?: string }).error
        ?? (errors ? errors.map((e) => `${e.path}: ${e.message}`).join('; ') : response.statusText);
      throw new ApiError(response.status, message, errors);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  /** POST a scene document; `raw` preserves the caller's exact bytes. */
  postScene(doc: SceneDoc | string): Promise<{ scene_id: string }> {
    const body = typeof doc === 'string' ? doc : JSON.stringify(doc);
    return this.request('/scenes', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body,
    });
  }

  getScene(sceneId: string): Promise<SceneDoc> {
    return this.request(`/scenes/${sceneId}`);
  }

  submitJob(sceneId: string): Promise<{ job_id: string }> {
    return this.post('/jobs', { scene_id: sceneId });
  }

  getJob(jobId: string): Promise<Manifest> {
    return this.request(`/jobs/${jobId}`);
  }

  getField(jobId: string, name: string, frame?: number): Promise<FieldFramePayload> {
    const query = frame === undefined ? '' : `?frame=${frame}`;
    return this.request(`/jobs/${jobId}/fields/${name}${query}`);
  }

  getHistory(jobId: string): Promise<HistoryTable> {
    return this.request(`/jobs/${jobId}/history`);
  }

  getBands(jobId: string): Promise<Band[]> {
    return this.request(`/jobs/${jobId}/bands`);
  }

  previewLattice(spec: unknown): Promise<LatticePreview> {
    return this.post('/lattice/preview', spec);
  }
}
