"""Interactive session bridge: a websocket server that steps the
playground at the control rate and records standard episodes.

Wire protocol (JSON text frames):

  server -> client on connect:
      {"type": "hello", "version": 1, "config": {...}, "config_hash": h,
       "tick_rate": 30, "a_max": 0.04}
  client -> server, any time:
      {"type": "action", "dx": f, "dy": f, "grip": f, "tick": n}
      {"type": "start"}          begin/reset a recording session
      {"type": "stop"}           pause stepping
      {"type": "save"}           flush recorded episodes to the out file
  server -> client, every tick while running:
      {"type": "state", "tick": n, "state": {...observation fields...}}
  server -> client on save:
      {"type": "saved", "path": p, "episodes": n, "ticks": n}
  server -> client on protocol violation:
      {"type": "error", "message": m}   (the session is then dropped)

The env steps on a fixed-rate loop; network reads land in a
latest-action-wins slot, so a slow or bursty client only ever affects
itself, never the recorded dynamics.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json
from pathlib import Path

from .data import Episode, PlayDataset, save_dataset
from .exceptions import DataFormatError
from .playground import Action, EnvConfig, EnvState, clamp_action, reset, step

PROTOCOL_VERSION = 1


def state_message(state: EnvState) -> dict:
    return {"type": "state", "tick": state.tick,
            "state": dataclasses.asdict(state)}


def hello_message(config: EnvConfig) -> dict:
    return {
        "type": "hello",
        "version": PROTOCOL_VERSION,
        "config": dataclasses.asdict(config),
        "config_hash": config.hash(),
        "tick_rate": config.tick_rate,
        "a_max": config.a_max,
    }


class TeleopSession:
    """One client's recording session: step loop + episode buffers."""

    def __init__(self, config: EnvConfig, out_path, seed: int):
        self.config = config
        self.out_path = Path(out_path)
        self.seed = seed
        self.episode_count = 0
        self.finished_episodes: list[Episode] = []
        self.running = False
        self.latest_action = Action(0.0, 0.0, 1.0)
        self.state: EnvState | None = None
        self.states: list[EnvState] = []
        self.actions: list[Action] = []

    def start(self) -> None:
        self._finish_episode()
        self.state = reset(self.config, seed=[self.seed, self.episode_count])
        self.states = [self.state]
        self.actions = []
        self.latest_action = Action(0.0, 0.0, 1.0)
        self.running = True

    def stop(self) -> None:
        self.running = False

    def tick(self) -> EnvState | None:
        if not self.running or self.state is None:
            return None
        action = clamp_action(self.config, self.latest_action)
        self.state = step(self.config, self.state, action)
        self.actions.append(action)
        self.states.append(self.state)
        return self.state

    def _finish_episode(self) -> None:
        if self.actions:
            self.finished_episodes.append(Episode(
                states=self.states, actions=self.actions, collector="teleop",
                seed=[self.seed, self.episode_count]))
            self.episode_count += 1
        self.states, self.actions = [], []

    def save(self) -> tuple[int, int]:
        """Flush everything recorded so far to the out file."""
        was_running = self.running
        self.running = False
        self._finish_episode()
        if not self.finished_episodes:
            raise DataFormatError("nothing recorded yet")
        dataset = PlayDataset.from_episodes(self.finished_episodes, self.config,
                                            "teleop")
        save_dataset(dataset, self.out_path)
        if was_running:
            self.start()
        return len(self.finished_episodes), sum(ep.length for ep in self.finished_episodes)

    def flush_on_disconnect(self) -> None:
        """A dropped connection mid-episode still produces a valid file."""
        self.running = False
        self._finish_episode()
        if self.finished_episodes:
            dataset = PlayDataset.from_episodes(self.finished_episodes, self.config,
                                                "teleop")
            save_dataset(dataset, self.out_path)


async def _run_session(websocket, config: EnvConfig, out_path, seed: int) -> None:
    session = TeleopSession(config, out_path, seed)
    await websocket.send(json.dumps(hello_message(config)))
    tick_period = 1.0 / config.tick_rate
    loop = asyncio.get_running_loop()
    saved_explicitly = False

    async def step_loop():
        next_deadline = loop.time() + tick_period
        while True:
            delay = next_deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            next_deadline += tick_period
            state = session.tick()
            if state is not None:
                await websocket.send(json.dumps(state_message(state)))

    stepper = asyncio.create_task(step_loop())
    try:
        async for message in websocket:
            try:
                request = json.loads(message)
                kind = request["type"]
            except (json.JSONDecodeError, TypeError, KeyError):
                await websocket.send(json.dumps(
                    {"type": "error", "message": "malformed message"}))
                break
            if kind == "action":
                try:
                    session.latest_action = Action(
                        dx=float(request["dx"]), dy=float(request["dy"]),
                        grip=float(request["grip"]))
                except (KeyError, TypeError, ValueError):
                    await websocket.send(json.dumps(
                        {"type": "error", "message": "malformed action"}))
                    break
            elif kind == "start":
                session.start()
            elif kind == "stop":
                session.stop()
            elif kind == "save":
                try:
                    episodes, ticks = session.save()
                except DataFormatError as err:
                    await websocket.send(json.dumps(
                        {"type": "error", "message": str(err)}))
                    continue
                saved_explicitly = True
                await websocket.send(json.dumps(
                    {"type": "saved", "path": str(session.out_path),
                     "episodes": episodes, "ticks": ticks}))
            else:
                await websocket.send(json.dumps(
                    {"type": "error", "message": f"unknown message type '{kind}'"}))
                break
    finally:
        stepper.cancel()
        if not saved_explicitly or session.actions:
            session.flush_on_disconnect()


async def serve_teleop(config: EnvConfig, port: int, out_path, seed: int = 0,
                       host: str = "127.0.0.1", one_session: bool = False,
                       ready_event: asyncio.Event | None = None) -> None:
    """Host the wire protocol; one session at a time."""
    from websockets.asyncio.server import serve

    busy = asyncio.Lock()
    done = asyncio.Event()

    async def handler(websocket):
        if busy.locked():
            await websocket.send(json.dumps(
                {"type": "error", "message": "another session is active"}))
            await websocket.close()
            return
        async with busy:
            try:
                await _run_session(websocket, config, out_path, seed)
            finally:
                if one_session:
                    done.set()

    async with serve(handler, host, port):
        if ready_event is not None:
            ready_event.set()
        if one_session:
            await done.wait()
        else:
            await asyncio.Event().wait()
