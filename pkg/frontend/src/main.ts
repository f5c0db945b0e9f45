// Browser entry: wires keyboard, canvas, and status DOM to the client.

import { TeleopClient } from "./client";
import { inputToAction, keyDown, keyUp, newInputState } from "./input";
import { buildScene, paint } from "./render";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const tickEl = document.getElementById("tick")!;
const lightsEl = document.getElementById("lights")!;

const input = newInputState();
let clientTick = 0;

const client = new TeleopClient({
  onStatus(status, detail) {
    statusEl.textContent = detail ? `${status}: ${detail}` : status;
    statusEl.className = status;
  },
  onFrame(state) {
    tickEl.textContent = `tick ${state.tick}`;
    lightsEl.textContent =
      `lights ${state.light_r}${state.light_g}${state.light_b}`;
    if (client.hello) {
      paint(ctx, buildScene(client.hello.config, state), canvas.width);
    }
    if (client.recording) {
      clientTick += 1;
      client.send(inputToAction(input, client.hello!.a_max, clientTick));
    }
  },
  onSaved(path, episodes, ticks) {
    statusEl.textContent = `saved ${episodes} episode(s), ${ticks} ticks -> ${path}`;
  },
});

function connect() {
  const url = (document.getElementById("url") as HTMLInputElement).value;
  client.connect(new WebSocket(url));
}

document.getElementById("connect")!.addEventListener("click", connect);
document.getElementById("start")!.addEventListener("click", () => client.start());
document.getElementById("stop")!.addEventListener("click", () => client.stop());
document.getElementById("save")!.addEventListener("click", () => client.save());

window.addEventListener("keydown", (event) => {
  keyDown(input, event.key);
  if (event.key === " ") event.preventDefault();
});
window.addEventListener("keyup", (event) => keyUp(input, event.key));
