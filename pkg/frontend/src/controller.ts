/**
 * Review session controller: all UI behavior without any DOM.
 *
 * Holds the current card and queue status for one reviewer, posts
 * verdicts, and exposes the agreement dashboard data.  The renderer is a
 * dumb view over this object, which is what the scripted end-to-end
 * sessions drive directly.
 */

import { ApiError, ReviewApi } from "./api.js";
import type {
  AgreementResponse,
  DisagreementEntry,
  Judgment,
  NextCard,
  Progress,
} from "./types.js";

export type QueueState =
  | { phase: "idle" }
  | { phase: "card"; card: NextCard }
  | { phase: "done"; progress: Progress }
  | { phase: "error"; message: string };

export interface SubmitResult {
  outcome: "advanced" | "conflict-refreshed" | "rejected";
  detail?: string;
}

export class ReviewController {
  state: QueueState = { phase: "idle" };

  constructor(
    private readonly api: ReviewApi,
    readonly reviewerId: string,
  ) {}

  /** Fetch the next unjudged card (or the completion state). */
  async loadNext(): Promise<QueueState> {
    try {
      const resp = await this.api.next(this.reviewerId);
      this.state = resp.done
        ? { phase: "done", progress: resp.progress }
        : { phase: "card", card: resp };
    } catch (err) {
      this.state = { phase: "error", message: String(err) };
    }
    return this.state;
  }

  /**
   * Post a verdict for the current card and advance the queue.
   *
   * A 409 (verdict already exists, e.g. posted from another tab) is not
   * fatal: the queue is refreshed so the reviewer continues from the
   * server's view of their progress.
   */
  async submit(judgment: Judgment, note = ""): Promise<SubmitResult> {
    if (this.state.phase !== "card") {
      return { outcome: "rejected", detail: "no card on screen" };
    }
    const card = this.state.card;
    try {
      await this.api.submit({
        record_id: card.record_id,
        reviewer_id: this.reviewerId,
        judgment,
        note,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.loadNext();
        return { outcome: "conflict-refreshed", detail: err.detail };
      }
      return { outcome: "rejected", detail: String(err) };
    }
    await this.loadNext();
    return { outcome: "advanced" };
  }

  /** Judge every remaining assigned card with the supplied rule. */
  async runSession(
    judge: (card: NextCard) => { judgment: Judgment; note?: string },
  ): Promise<Progress> {
    let state = await this.loadNext();
    while (state.phase === "card") {
      const { judgment, note } = judge(state.card);
      const result = await this.submit(judgment, note ?? "");
      if (result.outcome === "rejected") {
        throw new Error(`verdict rejected: ${result.detail}`);
      }
      state = this.state;
    }
    if (state.phase === "error") {
      throw new Error(state.message);
    }
    if (state.phase !== "done") {
      throw new Error(`session ended in unexpected phase: ${state.phase}`);
    }
    return state.progress;
  }

  /** Agreement data exactly as the API reports it (no recomputation). */
  agreement(): Promise<AgreementResponse> {
    return this.api.agreement();
  }

  async disagreements(): Promise<DisagreementEntry[]> {
    const resp = await this.api.disagreements();
    return resp.disagreements;
  }
}
