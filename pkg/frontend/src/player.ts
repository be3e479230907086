// Gapless condition switching: every condition of an item plays in sync
// through its own gain lane, and switching crossfades the lanes, so the
// listening position is preserved exactly and a switch is audible within
// the crossfade time. The audio engine is injected: the browser build
// wires Web Audio, tests wire a fake clock.

export const CROSSFADE_S = 0.02;

export interface ConditionVoice {
  setGain(target: number, rampS: number): void;
  start(offsetS: number): void;
  stop(): void;
  readonly durationS: number;
}

export interface PlaybackEngine {
  now(): number;
  createVoices(buffers: ArrayBuffer[]): Promise<ConditionVoice[]>;
}

export type PlayerState = "empty" | "loading" | "ready" | "playing" | "error";

export class ConditionPlayer {
  private voices: ConditionVoice[] = [];
  private startedAt = 0;
  private pausedPosition = 0;
  private active = 0;
  private stateValue: PlayerState = "empty";
  private errorValue: string | null = null;

  constructor(private readonly engine: PlaybackEngine) {}

  get state(): PlayerState {
    return this.stateValue;
  }

  get error(): string | null {
    return this.errorValue;
  }

  get activeIndex(): number {
    return this.active;
  }

  get conditionCount(): number {
    return this.voices.length;
  }

  async load(buffers: ArrayBuffer[]): Promise<void> {
    this.stateValue = "loading";
    this.errorValue = null;
    try {
      this.voices = await this.engine.createVoices(buffers);
      this.active = 0;
      this.pausedPosition = 0;
      this.stateValue = "ready";
    } catch (err) {
      this.voices = [];
      this.errorValue = err instanceof Error ? err.message : String(err);
      this.stateValue = "error";
    }
  }

  positionS(): number {
    if (this.stateValue === "playing") {
      return this.engine.now() - this.startedAt;
    }
    return this.pausedPosition;
  }

  play(): void {
    if (this.stateValue !== "ready") return;
    const offset = this.pausedPosition;
    for (let i = 0; i < this.voices.length; i++) {
      const voice = this.voices[i]!;
      voice.setGain(i === this.active ? 1 : 0, 0);
      voice.start(offset);
    }
    this.startedAt = this.engine.now() - offset;
    this.stateValue = "playing";
  }

  pause(): void {
    if (this.stateValue !== "playing") return;
    this.pausedPosition = this.engine.now() - this.startedAt;
    for (const voice of this.voices) voice.stop();
    this.stateValue = "ready";
  }

  /** Crossfade to another condition; the media position is untouched. */
  switchTo(index: number): void {
    if (index < 0 || index >= this.voices.length) {
      throw new RangeError(`condition index ${index} out of range`);
    }
    if (index === this.active) return; // same condition: no interruption
    if (this.stateValue === "playing") {
      this.voices[this.active]!.setGain(0, CROSSFADE_S);
      this.voices[index]!.setGain(1, CROSSFADE_S);
    }
    this.active = index;
  }
}
