// Session flow: one item at a time, sliders over neutral labels, a
// submit gate that requires every condition auditioned and rated, and
// draft persistence so nothing is lost on rejection or network failure.

import { ApiClient, SubmitOutcome } from "./api.js";
import { RatingsSubmission, SessionItem, SessionPayload } from "./types.js";

export const DEFAULT_SLIDER = 50;

export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStorage implements DraftStorage {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

interface Draft {
  sliders: number[];
  rated: number[];
  auditioned: number[];
}

export type ItemPhase = "rating" | "submitted";

export class ItemSession {
  readonly sliders: number[];
  readonly rated = new Set<number>();
  readonly auditioned = new Set<number>();
  phase: ItemPhase = "rating";
  lastError: string | null = null;

  constructor(readonly item: SessionItem) {
    this.sliders = item.stimuli.map(() => DEFAULT_SLIDER);
  }

  get frozen(): boolean {
    return this.phase === "submitted";
  }

  setSlider(position: number, value: number): void {
    if (this.frozen) return;
    this.checkPosition(position);
    this.sliders[position] = Math.min(100, Math.max(0, value));
    this.rated.add(position);
  }

  markAuditioned(position: number): void {
    this.checkPosition(position);
    this.auditioned.add(position);
  }

  /** null when submission may proceed, otherwise the blocking reason. */
  blockedReason(): string | null {
    if (this.frozen) return "already submitted";
    const unplayed = this.positions().filter((p) => !this.auditioned.has(p));
    if (unplayed.length > 0) {
      return `listen to condition${unplayed.length > 1 ? "s" : ""} ${unplayed
        .map((p) => String.fromCharCode(65 + p))
        .join(", ")} first`;
    }
    const unrated = this.positions().filter((p) => !this.rated.has(p));
    if (unrated.length > 0) {
      return `rate condition${unrated.length > 1 ? "s" : ""} ${unrated
        .map((p) => String.fromCharCode(65 + p))
        .join(", ")}`;
    }
    return null;
  }

  canSubmit(): boolean {
    return this.blockedReason() === null;
  }

  /** Ratings keyed by stimulus id; position p plays stimuli[order[p]]. */
  ratingEntries(): { stimulus_id: string; rating: number }[] {
    return this.positions().map((p) => ({
      stimulus_id: this.item.stimuli[this.item.order[p]!]!,
      rating: this.sliders[p]!,
    }));
  }

  toDraft(): Draft {
    return {
      sliders: [...this.sliders],
      rated: [...this.rated],
      auditioned: [...this.auditioned],
    };
  }

  restore(draft: Draft): void {
    draft.sliders.forEach((v, p) => {
      if (p < this.sliders.length) this.sliders[p] = Math.min(100, Math.max(0, v));
    });
    draft.rated.forEach((p) => p < this.sliders.length && this.rated.add(p));
    draft.auditioned.forEach((p) => p < this.sliders.length && this.auditioned.add(p));
  }

  private positions(): number[] {
    return this.item.stimuli.map((_, i) => i);
  }

  private checkPosition(position: number): void {
    if (position < 0 || position >= this.sliders.length) {
      throw new RangeError(`condition position ${position} out of range`);
    }
  }
}

/** Trial items come first; the manifest order is kept otherwise. */
export function presentationOrder(items: SessionItem[]): SessionItem[] {
  return [...items.filter((it) => it.trial), ...items.filter((it) => !it.trial)];
}

export class SessionController {
  readonly items: ItemSession[];
  private index = 0;

  constructor(
    session: SessionPayload,
    private readonly api: ApiClient,
    private readonly subjectId: string,
    private readonly experience: string,
    private readonly storage: DraftStorage = new MemoryStorage(),
  ) {
    this.items = presentationOrder(session.items).map((it) => new ItemSession(it));
    for (const item of this.items) {
      const raw = this.storage.getItem(this.draftKey(item));
      if (raw !== null) {
        try {
          item.restore(JSON.parse(raw) as Draft);
        } catch {
          this.storage.removeItem(this.draftKey(item));
        }
      }
    }
  }

  get current(): ItemSession | null {
    return this.index < this.items.length ? this.items[this.index]! : null;
  }

  get finished(): boolean {
    return this.current === null;
  }

  get progress(): { done: number; total: number } {
    return { done: this.index, total: this.items.length };
  }

  setSlider(position: number, value: number): void {
    const item = this.current;
    if (!item) return;
    item.setSlider(position, value);
    this.persistDraft(item);
  }

  markAuditioned(position: number): void {
    const item = this.current;
    if (!item) return;
    item.markAuditioned(position);
    this.persistDraft(item);
  }

  async submitCurrent(): Promise<SubmitOutcome | { kind: "blocked"; reason: string }> {
    const item = this.current;
    if (!item) return { kind: "blocked", reason: "session finished" };
    const reason = item.blockedReason();
    if (reason !== null) {
      return { kind: "blocked", reason };
    }
    const submission: RatingsSubmission = {
      subject_id: this.subjectId,
      experience: this.experience,
      item_id: item.item.item_id,
      ratings: item.ratingEntries(),
    };
    const outcome = await this.api.submitRatings(submission);
    switch (outcome.kind) {
      case "stored":
        item.phase = "submitted";
        item.lastError = null;
        this.storage.removeItem(this.draftKey(item));
        this.index += 1;
        break;
      case "duplicate":
        // the server already has this pair: freeze and move on
        item.phase = "submitted";
        item.lastError = "already submitted on the server";
        this.storage.removeItem(this.draftKey(item));
        this.index += 1;
        break;
      case "rejected":
        item.lastError = outcome.reason; // data stays editable
        break;
      case "network":
        item.lastError = `network failure, draft kept: ${outcome.reason}`;
        this.persistDraft(item);
        break;
    }
    return outcome;
  }

  private draftKey(item: ItemSession): string {
    return `dbl-draft:${this.subjectId}:${item.item.item_id}`;
  }

  private persistDraft(item: ItemSession): void {
    this.storage.setItem(this.draftKey(item), JSON.stringify(item.toDraft()));
  }
}
