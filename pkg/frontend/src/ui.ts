// DOM wiring: one item on screen, neutral condition labels, sliders,
// submit button with the gate's reason as tooltip/message.

import { ApiClient } from "./api.js";
import { ConditionPlayer } from "./player.js";
import { SessionController } from "./session.js";
import { conditionLabel } from "./types.js";

export class SessionView {
  private root: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly controller: SessionController,
    private readonly player: ConditionPlayer,
    private readonly api: ApiClient,
  ) {
    this.root = root;
  }

  async showCurrentItem(): Promise<void> {
    const item = this.controller.current;
    this.root.replaceChildren();
    if (!item) {
      this.root.append(el("p", "Session complete. Thank you for listening."));
      return;
    }
    const { done, total } = this.controller.progress;
    const title = item.item.trial
      ? `Trial item (practice, ${done + 1} of ${total})`
      : `Item ${done + 1} of ${total}`;
    this.root.append(el("h2", title));
    this.root.append(
      el(
        "p",
        "Keep your playback volume fixed for the whole session. " +
          "Rate each version by overall preference, as if watching TV at home.",
      ),
    );

    const status = el("p", "loading stimuli...");
    status.className = "status";
    this.root.append(status);

    try {
      const buffers = await Promise.all(
        item.item.order.map((k) => this.api.fetchStimulus(item.item.stimuli[k]!)),
      );
      await this.player.load(buffers);
      if (this.player.state === "error") throw new Error(this.player.error ?? "load failed");
    } catch (err) {
      status.textContent = `stimulus fetch failed: ${err instanceof Error ? err.message : err}. Ratings for this item are disabled.`;
      status.className = "status error";
      return;
    }
    status.remove();

    const table = el("div");
    table.className = "conditions";
    item.sliders.forEach((value, position) => {
      const row = el("div");
      row.className = "condition-row";
      const playButton = el("button", `Play ${conditionLabel(position)}`) as HTMLButtonElement;
      playButton.addEventListener("click", () => {
        if (this.player.state === "ready") this.player.play();
        this.player.switchTo(position);
        if (this.player.state === "playing") this.controller.markAuditioned(position);
        this.refreshGate();
      });
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = "100";
      slider.value = String(value);
      slider.disabled = item.frozen;
      slider.addEventListener("input", () => {
        this.controller.setSlider(position, Number(slider.value));
        this.refreshGate();
      });
      row.append(playButton, slider);
      table.append(row);
    });
    this.root.append(table);

    const pause = el("button", "Pause") as HTMLButtonElement;
    pause.addEventListener("click", () => this.player.pause());
    this.root.append(pause);

    const submit = el("button", "Submit ratings") as HTMLButtonElement;
    submit.id = "submit";
    submit.addEventListener("click", () => void this.submit());
    this.root.append(submit);
    const gateMessage = el("p", "");
    gateMessage.id = "gate-message";
    this.root.append(gateMessage);
    this.refreshGate();
  }

  private refreshGate(): void {
    const item = this.controller.current;
    const submit = this.root.querySelector<HTMLButtonElement>("#submit");
    const message = this.root.querySelector<HTMLParagraphElement>("#gate-message");
    if (!item || !submit || !message) return;
    const reason = item.blockedReason();
    submit.disabled = reason !== null;
    message.textContent = reason ?? "ready to submit";
    if (item.lastError) message.textContent += ` (${item.lastError})`;
  }

  private async submit(): Promise<void> {
    this.player.pause();
    const outcome = await this.controller.submitCurrent();
    if (outcome.kind === "stored" || outcome.kind === "duplicate") {
      await this.showCurrentItem();
    } else {
      this.refreshGate();
    }
  }
}

function el(tag: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  return node;
}
