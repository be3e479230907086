// Web Audio implementation of the playback engine: one shared clock,
// one gain node per condition, sources started sample-synchronously.

import { ConditionVoice, PlaybackEngine } from "./player.js";

class WebAudioVoice implements ConditionVoice {
  private source: AudioBufferSourceNode | null = null;
  private readonly gainNode: GainNode;

  constructor(
    private readonly context: AudioContext,
    private readonly buffer: AudioBuffer,
  ) {
    this.gainNode = context.createGain();
    this.gainNode.gain.value = 0;
    this.gainNode.connect(context.destination);
  }

  get durationS(): number {
    return this.buffer.duration;
  }

  setGain(target: number, rampS: number): void {
    const param = this.gainNode.gain;
    const now = this.context.currentTime;
    param.cancelScheduledValues(now);
    if (rampS <= 0) {
      param.setValueAtTime(target, now);
    } else {
      param.setValueAtTime(param.value, now);
      param.linearRampToValueAtTime(target, now + rampS);
    }
  }

  start(offsetS: number): void {
    this.stop();
    this.source = this.context.createBufferSource();
    this.source.buffer = this.buffer;
    this.source.loop = true;
    this.source.connect(this.gainNode);
    this.source.start(this.context.currentTime, offsetS % this.buffer.duration);
  }

  stop(): void {
    if (this.source) {
      try {
        this.source.stop();
      } catch {
        // already stopped
      }
      this.source.disconnect();
      this.source = null;
    }
  }
}

export class WebAudioEngine implements PlaybackEngine {
  constructor(private readonly context: AudioContext = new AudioContext()) {}

  now(): number {
    return this.context.currentTime;
  }

  async createVoices(buffers: ArrayBuffer[]): Promise<ConditionVoice[]> {
    const decoded = await Promise.all(
      buffers.map((b) => this.context.decodeAudioData(b.slice(0))),
    );
    return decoded.map((buffer) => new WebAudioVoice(this.context, buffer));
  }

  async resume(): Promise<void> {
    if (this.context.state === "suspended") {
      await this.context.resume();
    }
  }
}
