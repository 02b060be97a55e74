/** Periodic refresh helper: fires the callback every `intervalMs` until
 * stopped. Poll ticks never overlap (a slow refresh skips the next tick). */

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private busy = false;

  constructor(
    private readonly refresh: () => Promise<void>,
    private readonly intervalMs: number = 5000,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      void this.tick();
    }, this.intervalMs);
  }

  async tick(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.refresh();
    } finally {
      this.busy = false;
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
