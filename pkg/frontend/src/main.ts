import { ApiClient } from "./api.js";
import { ConditionPlayer } from "./player.js";
import { SessionController } from "./session.js";
import { SessionView } from "./ui.js";
import { WebAudioEngine } from "./webaudio.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(window.location.search);
  const slot = params.get("slot") ?? "default";
  const subject = params.get("subject") ?? slot;
  const experience = params.get("experience") ?? "non_expert";

  const api = new ApiClient("");
  const engine = new WebAudioEngine();
  const player = new ConditionPlayer(engine);

  try {
    const session = await api.loadSession(slot);
    const controller = new SessionController(
      session,
      api,
      subject,
      experience,
      window.localStorage,
    );
    const view = new SessionView(root, controller, player, api);
    document.addEventListener("click", () => void engine.resume(), { once: true });
    await view.showCurrentItem();
  } catch (err) {
    root.textContent = `failed to load session: ${err instanceof Error ? err.message : err}`;
  }
}

void boot();
