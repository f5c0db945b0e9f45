// Connection/session management.  The client is strictly
// server-authoritative: it renders only frames the server sent and
// never predicts state locally.

import {
  ClientMsg,
  EnvStateMsg,
  HelloMsg,
  PROTOCOL_VERSION,
  ServerMsg,
  encodeClientMsg,
  parseServerMsg,
} from "./protocol";

export type ConnectionStatus =
  | "connecting"
  | "connected"
  | "version-mismatch"
  | "error"
  | "closed";

// minimal structural WebSocket so tests can inject `ws` or a fake
export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close" | "error",
                   handler: (event: any) => void): void;
}

export interface ClientEvents {
  onStatus?(status: ConnectionStatus, detail?: string): void;
  onHello?(hello: HelloMsg): void;
  onFrame?(state: EnvStateMsg): void;
  onSaved?(path: string, episodes: number, ticks: number): void;
  onError?(message: string): void;
}

export class TeleopClient {
  status: ConnectionStatus = "connecting";
  hello: HelloMsg | null = null;
  lastFrame: EnvStateMsg | null = null;
  recording = false;
  sessionId = 0;
  private socket: SocketLike | null = null;

  constructor(private events: ClientEvents = {}) {}

  connect(socket: SocketLike): void {
    this.sessionId += 1;
    this.status = "connecting";
    this.hello = null;
    this.socket = socket;
    this.events.onStatus?.(this.status);
    socket.addEventListener("open", () => {
      // handshake completes when the hello frame arrives
    });
    socket.addEventListener("message", (event: { data: unknown }) => {
      this.handleFrame(String(event.data));
    });
    socket.addEventListener("close", () => {
      this.status = "closed";
      this.recording = false;
      this.events.onStatus?.(this.status);
    });
    socket.addEventListener("error", () => {
      this.status = "error";
      this.events.onStatus?.(this.status, "connection refused");
    });
  }

  handleFrame(raw: string): void {
    let msg: ServerMsg;
    try {
      msg = parseServerMsg(raw);
    } catch (err) {
      this.status = "error";
      this.events.onStatus?.(this.status, String(err));
      return;
    }
    switch (msg.type) {
      case "hello":
        if (msg.version !== PROTOCOL_VERSION) {
          this.status = "version-mismatch";
          this.events.onStatus?.(
            this.status,
            `server speaks v${msg.version}, client v${PROTOCOL_VERSION}`,
          );
          this.socket?.close();
          return;
        }
        this.hello = msg;
        this.status = "connected";
        this.events.onStatus?.(this.status);
        this.events.onHello?.(msg);
        break;
      case "state":
        this.lastFrame = msg.state;
        this.events.onFrame?.(msg.state);
        break;
      case "saved":
        this.events.onSaved?.(msg.path, msg.episodes, msg.ticks);
        break;
      case "error":
        this.status = "error";
        this.events.onStatus?.(this.status, msg.message);
        this.events.onError?.(msg.message);
        break;
    }
  }

  send(msg: ClientMsg): void {
    this.socket?.send(encodeClientMsg(msg));
  }

  start(): void {
    this.recording = true;
    this.send({ type: "start" });
  }

  stop(): void {
    this.recording = false;
    this.send({ type: "stop" });
  }

  save(): void {
    this.send({ type: "save" });
  }
}
