// Server-authoritative rendering: a pure function maps one state frame
// to a display list, and a painter draws that list onto a 2d canvas.
// Keeping scene construction pure lets tests assert geometry exactly.

import { EnvStateMsg, WorldConfig } from "./protocol";

export type SceneItem =
  | { kind: "desk"; x: number; y: number; w: number; h: number }
  | { kind: "shelf"; x: number; y: number; w: number; h: number }
  | { kind: "track"; x0: number; y0: number; x1: number; y1: number; which: string }
  | { kind: "handle"; x: number; y: number; which: string; open: number }
  | { kind: "button"; x: number; y: number; r: number; color: string;
      lit: boolean; pressed: number }
  | { kind: "block"; x: number; y: number; half: number; theta: number;
      held: boolean }
  | { kind: "agent"; x: number; y: number; gripper: number };

export function handlePosition(track: [[number, number], [number, number]],
                               open: number): [number, number] {
  const [[x0, y0], [x1, y1]] = track;
  return [x0 + (x1 - x0) * open, y0 + (y1 - y0) * open];
}

const BUTTON_COLORS = ["red", "green", "blue"];

export function buildScene(config: WorldConfig, state: EnvStateMsg): SceneItem[] {
  const [wx0, wy0, wx1, wy1] = config.world;
  const [sx0, sy0, sx1, sy1] = config.shelf;
  const scene: SceneItem[] = [
    { kind: "desk", x: wx0, y: wy0, w: wx1 - wx0, h: wy1 - wy0 },
    { kind: "shelf", x: sx0, y: sy0, w: sx1 - sx0, h: sy1 - sy0 },
  ];
  for (const which of ["door", "drawer"] as const) {
    const track = which === "door" ? config.door_track : config.drawer_track;
    const open = which === "door" ? state.door_open : state.drawer_open;
    const [[x0, y0], [x1, y1]] = track;
    scene.push({ kind: "track", x0, y0, x1, y1, which });
    const [hx, hy] = handlePosition(track, open);
    scene.push({ kind: "handle", x: hx, y: hy, which, open });
  }
  const pressed = [state.pressed_r, state.pressed_g, state.pressed_b];
  const lights = [state.light_r, state.light_g, state.light_b];
  config.button_centers.forEach(([cx, cy], i) => {
    scene.push({
      kind: "button", x: cx, y: cy, r: config.eps_button,
      color: BUTTON_COLORS[i], lit: lights[i] === 1, pressed: pressed[i],
    });
  });
  scene.push({
    kind: "block", x: state.block_x, y: state.block_y,
    half: config.block_half, theta: state.block_theta, held: state.holding,
  });
  scene.push({ kind: "agent", x: state.agent_x, y: state.agent_y,
               gripper: state.gripper });
  return scene;
}

export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(theta: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export function paint(ctx: Canvas2D, scene: SceneItem[], size: number): void {
  // world y points up; canvas y points down
  const px = (x: number) => x * size;
  const py = (y: number) => (1 - y) * size;
  ctx.clearRect(0, 0, size, size);
  for (const item of scene) {
    switch (item.kind) {
      case "desk":
        ctx.fillStyle = "#f4ead8";
        ctx.fillRect(px(item.x), py(item.y + item.h), item.w * size, item.h * size);
        break;
      case "shelf":
        ctx.fillStyle = "#d8c8a8";
        ctx.fillRect(px(item.x), py(item.y + item.h), item.w * size, item.h * size);
        break;
      case "track": {
        ctx.strokeStyle = "#888";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(px(item.x0), py(item.y0));
        ctx.lineTo(px(item.x1), py(item.y1));
        ctx.stroke();
        break;
      }
      case "handle":
        ctx.fillStyle = item.which === "door" ? "#5b4636" : "#36465b";
        ctx.fillRect(px(item.x) - 6, py(item.y) - 6, 12, 12);
        break;
      case "button": {
        ctx.fillStyle = item.lit ? item.color : "#999";
        ctx.beginPath();
        ctx.arc(px(item.x), py(item.y), item.r * size, 0, 2 * Math.PI);
        ctx.fill();
        break;
      }
      case "block": {
        ctx.save();
        ctx.translate(px(item.x), py(item.y));
        ctx.rotate(-item.theta);
        ctx.fillStyle = item.held ? "#c2571a" : "#8a5a2b";
        const s = item.half * size;
        ctx.fillRect(-s, -s, 2 * s, 2 * s);
        ctx.restore();
        break;
      }
      case "agent": {
        ctx.fillStyle = item.gripper > 0.5 ? "#2b6e8a" : "#16465a";
        ctx.beginPath();
        ctx.arc(px(item.x), py(item.y), 8, 0, 2 * Math.PI);
        ctx.fill();
        break;
      }
    }
  }
}
