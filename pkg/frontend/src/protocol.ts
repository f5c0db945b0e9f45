// Wire protocol shared with the playground session bridge.
// JSON text frames over a websocket; field names match the server.

export const PROTOCOL_VERSION = 1;

export interface WorldConfig {
  world: [number, number, number, number];
  a_max: number;
  tick_rate: number;
  eps_grasp: number;
  eps_door: number;
  eps_drawer: number;
  eps_button: number;
  block_half: number;
  omega_max: number;
  button_decay: number;
  door_track: [[number, number], [number, number]];
  drawer_track: [[number, number], [number, number]];
  button_centers: [number, number][];
  shelf: [number, number, number, number];
  block_region: [number, number, number, number];
  agent_region: [number, number, number, number];
  home_region: [number, number, number, number];
}

export interface HelloMsg {
  type: "hello";
  version: number;
  config: WorldConfig;
  config_hash: string;
  tick_rate: number;
  a_max: number;
}

export interface EnvStateMsg {
  agent_x: number;
  agent_y: number;
  gripper: number;
  holding: boolean;
  block_x: number;
  block_y: number;
  block_theta: number;
  door_open: number;
  drawer_open: number;
  pressed_r: number;
  pressed_g: number;
  pressed_b: number;
  light_r: number;
  light_g: number;
  light_b: number;
  tick: number;
}

export interface StateMsg {
  type: "state";
  tick: number;
  state: EnvStateMsg;
}

export interface SavedMsg {
  type: "saved";
  path: string;
  episodes: number;
  ticks: number;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = HelloMsg | StateMsg | SavedMsg | ErrorMsg;

export interface ActionMsg {
  type: "action";
  dx: number;
  dy: number;
  grip: number;
  tick: number;
}

export type ControlMsg = { type: "start" } | { type: "stop" } | { type: "save" };
export type ClientMsg = ActionMsg | ControlMsg;

export function parseServerMsg(raw: string): ServerMsg {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error("unparseable server frame");
  }
  if (typeof data !== "object" || data === null || !("type" in data)) {
    throw new Error("malformed server frame");
  }
  const msg = data as { type: string };
  switch (msg.type) {
    case "hello":
    case "state":
    case "saved":
    case "error":
      return data as ServerMsg;
    default:
      throw new Error(`unknown server frame type '${msg.type}'`);
  }
}

export function encodeClientMsg(msg: ClientMsg): string {
  return JSON.stringify(msg);
}
