// Debounced, latest-wins request scheduling: at most one evaluate request in
// flight; a stale response (one superseded by a newer request) is dropped.

export class EvaluateScheduler<Req, Resp> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestCounter = 0;
  private appliedCounter = 0;

  constructor(
    private send: (req: Req) => Promise<Resp>,
    private apply: (resp: Resp) => void,
    private onError: (err: unknown) => void,
    private debounceMs = 150,
  ) {}

  /** Schedule a request after the debounce window, superseding any pending one. */
  schedule(req: Req): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire(req);
    }, this.debounceMs);
  }

  /** Send immediately (still participates in latest-wins ordering). */
  fire(req: Req): void {
    const ticket = ++this.requestCounter;
    this.send(req).then(
      (resp) => {
        if (ticket > this.appliedCounter) {
          this.appliedCounter = ticket;
          this.apply(resp);
        }
      },
      (err) => {
        if (ticket > this.appliedCounter) {
          this.appliedCounter = ticket;
          this.onError(err);
        }
      },
    );
  }
}
