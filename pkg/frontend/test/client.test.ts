import { describe, expect, it } from "vitest";

import { TeleopClient } from "../src/client";
import { PROTOCOL_VERSION, parseServerMsg } from "../src/protocol";

class FakeSocket {
  sent: string[] = [];
  handlers: Record<string, ((event: any) => void)[]> = {};
  addEventListener(type: string, handler: (event: any) => void) {
    (this.handlers[type] ??= []).push(handler);
  }
  emit(type: string, event: any) {
    for (const handler of this.handlers[type] ?? []) handler(event);
  }
  send(data: string) {
    this.sent.push(data);
  }
  close() {
    this.emit("close", {});
  }
}

const HELLO = {
  type: "hello", version: PROTOCOL_VERSION, config_hash: "abc",
  tick_rate: 30, a_max: 0.04, config: {},
};

describe("protocol parsing", () => {
  it("rejects junk and unknown types", () => {
    expect(() => parseServerMsg("not json")).toThrow();
    expect(() => parseServerMsg("42")).toThrow();
    expect(() => parseServerMsg(JSON.stringify({ type: "mystery" }))).toThrow();
  });
});

describe("client session handling", () => {
  it("completes the handshake and tracks frames", () => {
    const frames: number[] = [];
    const client = new TeleopClient({ onFrame: (s) => frames.push(s.tick) });
    const socket = new FakeSocket();
    client.connect(socket);
    socket.emit("message", { data: JSON.stringify(HELLO) });
    expect(client.status).toBe("connected");
    socket.emit("message", {
      data: JSON.stringify({ type: "state", tick: 3, state: { tick: 3 } }),
    });
    expect(frames).toEqual([3]);
    expect(client.lastFrame?.tick).toBe(3);
  });

  it("flags a version mismatch visibly and closes", () => {
    const statuses: string[] = [];
    const client = new TeleopClient({ onStatus: (s) => statuses.push(s) });
    const socket = new FakeSocket();
    client.connect(socket);
    socket.emit("message", { data: JSON.stringify({ ...HELLO, version: 99 }) });
    expect(client.status).toBe("closed");
    expect(statuses).toContain("version-mismatch");
  });

  it("reconnect bumps the session id", () => {
    const client = new TeleopClient();
    client.connect(new FakeSocket());
    expect(client.sessionId).toBe(1);
    client.connect(new FakeSocket());
    expect(client.sessionId).toBe(2);
  });

  it("only server frames mutate the rendered state", () => {
    const client = new TeleopClient();
    const socket = new FakeSocket();
    client.connect(socket);
    socket.emit("message", { data: JSON.stringify(HELLO) });
    client.send({ type: "action", dx: 0.04, dy: 0, grip: 1, tick: 1 });
    client.start();
    client.stop();
    client.save();
    expect(client.lastFrame).toBeNull();
    expect(socket.sent.map((s) => JSON.parse(s).type)).toEqual(
      ["action", "start", "stop", "save"]);
  });
});
