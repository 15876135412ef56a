/** Job polling with backoff.
 *
 * Polls GET /jobs/{id} once a second while the run is live, backing off
 * after errors; stops permanently on done/failed, reports a missing run
 * on 404, and surfaces network trouble after five consecutive failures.
 */

import { ApiError, type ApiClient } from './api.js';
import type { Manifest } from './types.js';

export interface MonitorEvents {
  onUpdate: (manifest: Manifest) => void;
  onMissing?: () => void;
  onNetworkTrouble?: (consecutiveFailures: number, lastError: unknown) => void;
}

export class JobMonitor {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private failures = 0;
  /** progress never regresses in the UI even if reads race a writer */
  private bestProgress = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly jobId: string,
    private readonly events: MonitorEvents,
    private readonly intervalMs = 1000,
    private readonly maxFailures = 5,
  ) {}

  get polling(): boolean {
    return !this.stopped;
  }

  start(): void {
    this.stopped = false;
    void this.poll();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private schedule(delay: number): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.poll(), delay);
  }

  private async poll(): Promise<void> {
    if (this.stopped) return;
    try {
      const manifest = await this.api.getJob(this.jobId);
      this.failures = 0;
      this.bestProgress = Math.max(this.bestProgress, manifest.progress);
      this.events.onUpdate({ ...manifest, progress: this.bestProgress });
      if (manifest.status === 'done' || manifest.status === 'failed') {
        this.stop();
        return;
      }
      this.schedule(this.intervalMs);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.stop();
        this.events.onMissing?.();
        return;
      }
      this.failures += 1;
      if (this.failures >= this.maxFailures) {
        this.events.onNetworkTrouble?.(this.failures, err);
      }
      // exponential backoff, capped at 8 intervals
      const backoff = this.intervalMs * Math.min(2 ** this.failures, 8);
      this.schedule(backoff);
    }
  }
}
