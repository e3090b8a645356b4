/**
 * Fixed-interval poll loop. One tick at a time: a slow request delays the
 * next tick instead of stacking concurrent ones.
 */

export class Poller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private running = false;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs = 500
  ) {}

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.loop();
  }

  stop(): void {
    this.running = false;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** Run one tick immediately (after a send, instead of waiting a full interval). */
  async pokeNow(): Promise<void> {
    if (!this.running) return;
    await this.tick();
  }

  private async loop(): Promise<void> {
    while (this.running) {
      try {
        await this.tick();
      } catch {
        // the tick owns its error handling; never kill the loop
      }
      if (!this.running) return;
      await new Promise<void>((resolve) => {
        this.timer = setTimeout(resolve, this.intervalMs);
      });
    }
  }
}
