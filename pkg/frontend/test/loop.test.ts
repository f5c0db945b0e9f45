// Full-stack loop: a scripted protocol client drives the real python
// session bridge at 30 Hz for 60 seconds, saves the episode, and the
// recording round-trips through the python data pipeline.

import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { TeleopClient } from "../src/client";
import { inputToAction, keyDown, keyUp, newInputState } from "../src/input";

const REPO_ROOT = join(__dirname, "..", "..");
const SESSION_SECONDS = 60;

function freePort(): Promise<number> {
  return new Promise((resolve) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const port = (server.address() as { port: number }).port;
      server.close(() => resolve(port));
    });
  });
}

describe("teleop loop against the python bridge", () => {
  let proc: ReturnType<typeof spawn>;
  let port: number;
  let outPath: string;

  beforeAll(async () => {
    port = await freePort();
    outPath = join(mkdtempSync(join(tmpdir(), "teleop-")), "session.ndjson");
    proc = spawn(
      "python3",
      ["-m", "playlmp.cli", "serve", "--port", String(port), "--out", outPath,
       "--seed", "5", "--one-session"],
      { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    await new Promise((resolve) => setTimeout(resolve, 2500));
  }, 20_000);

  afterAll(() => {
    proc?.kill();
  });

  it("sustains a 60 s 30 Hz session and the recording round-trips", async () => {
    const expectFrames = SESSION_SECONDS * 30;
    const input = newInputState();
    let frames = 0;
    let saved: { episodes: number; ticks: number } | null = null;
    let sawError: string | null = null;

    const client = new TeleopClient({
      onError: (message) => { sawError = message; },
    });

    await new Promise<void>((resolve, reject) => {
      const socket = new WebSocket(`ws://127.0.0.1:${port}`);
      const timer = setTimeout(
        () => reject(new Error(`timed out with ${frames} frames`)),
        (SESSION_SECONDS + 30) * 1000);
      client.connect(socket as unknown as import("../src/client").SocketLike);

      const scriptedDrive = () => {
        // wander the desk: change heading every ~2 seconds
        const phase = Math.floor(frames / 60) % 4;
        ["ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight"].forEach(
          (k) => keyUp(input, k));
        keyDown(input, ["ArrowUp", "ArrowRight", "ArrowDown", "ArrowLeft"][phase]);
        if (frames % 180 === 0) keyDown(input, " ");
      };

      client["events"].onHello = () => client.start();
      client["events"].onFrame = () => {
        frames += 1;
        scriptedDrive();
        client.send(inputToAction(input, client.hello!.a_max, frames));
        if (frames === expectFrames) {
          client.save();
        }
      };
      client["events"].onSaved = (_path, episodes, ticks) => {
        saved = { episodes, ticks };
        clearTimeout(timer);
        socket.close();
        resolve();
      };
      socket.addEventListener("error", (err) =>
        reject(new Error(`socket error: ${String(err)}`)));
    });

    expect(sawError).toBeNull();
    expect(frames).toBeGreaterThanOrEqual(expectFrames);
    expect(saved!.episodes).toBe(1); // zero dropped episodes
    expect(saved!.ticks).toBeGreaterThanOrEqual(expectFrames);

    // the saved file is a standard dataset: replayable and trainable as play
    const audit = spawnSync("python3", ["-c", `
import sys
from playlmp.data import load_dataset, verify_replayable
from playlmp.models import PlayGCBC
from playlmp.playground import EnvConfig

config = EnvConfig()
dataset = load_dataset(${JSON.stringify(outPath)}, config=config)
assert dataset.collector == "teleop", dataset.collector
assert len(dataset.episodes) == 1
assert dataset.episodes[0].length >= ${SESSION_SECONDS * 30}
for episode in dataset.episodes:
    verify_replayable(config, episode)
est = PlayGCBC(train_steps=3, hidden_size=8, rnn_layers=1, kappa_low=4,
               kappa_high=8, batch_size=2, seed=0)
est.fit(dataset, config)
print("AUDIT-OK", dataset.episodes[0].length)
`], { cwd: REPO_ROOT, encoding: "utf-8" });
    expect(audit.stderr).toBe("");
    expect(audit.stdout).toContain("AUDIT-OK");
  }, 120_000);
});
