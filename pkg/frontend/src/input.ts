// Keyboard -> action mapping.  Arrows or WASD translate at full speed
// per axis; space toggles the gripper command between open and closed.
// A fully closed gripper (0.0) spins a held block counter-clockwise;
// holding Shift while closed raises the command to the no-spin carry
// point just under the release threshold.

import { ActionMsg } from "./protocol";

export const GRIP_CARRY = 0.45;

export interface InputState {
  held: Set<string>;
  gripOpen: boolean;
  carry: boolean;
}

export function newInputState(): InputState {
  return { held: new Set(), gripOpen: true, carry: false };
}

const KEY_AXES: Record<string, [number, number]> = {
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
  w: [0, 1],
  s: [0, -1],
  a: [-1, 0],
  d: [1, 0],
};

export function keyDown(input: InputState, key: string): void {
  if (key === " ") {
    input.gripOpen = !input.gripOpen;
    return;
  }
  if (key === "Shift") {
    input.carry = true;
    return;
  }
  if (key in KEY_AXES) {
    input.held.add(key);
  }
}

export function keyUp(input: InputState, key: string): void {
  if (key === "Shift") {
    input.carry = false;
    return;
  }
  input.held.delete(key);
}

function clamp(x: number, lo: number, hi: number): number {
  return x < lo ? lo : x > hi ? hi : x;
}

export function inputToAction(input: InputState, aMax: number,
                              tick: number): ActionMsg {
  let dx = 0;
  let dy = 0;
  for (const key of input.held) {
    const [ax, ay] = KEY_AXES[key];
    dx += ax;
    dy += ay;
  }
  const grip = input.gripOpen ? 1.0 : input.carry ? GRIP_CARRY : 0.0;
  return {
    type: "action",
    dx: clamp(dx, -1, 1) * aMax,
    dy: clamp(dy, -1, 1) * aMax,
    grip,
    tick,
  };
}
