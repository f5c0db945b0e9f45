"""Teleop bridge: wire protocol, cadence, recorded-episode validity."""

import asyncio
import json
import time

import numpy as np
import pytest

from playlmp.data import load_dataset, verify_replayable
from playlmp.playground import EnvConfig
from playlmp.serve import PROTOCOL_VERSION, serve_teleop

CONFIG = EnvConfig()


def run_session(client, port=0, seed=0, out_name="teleop.ndjson", tmp_path=None):
    """Run serve_teleop and a client coroutine against it; returns client result."""

    async def _run():
        ready = asyncio.Event()
        out_path = tmp_path / out_name
        server = asyncio.create_task(
            serve_teleop(CONFIG, port, out_path, seed=seed, one_session=True,
                         ready_event=ready))
        await asyncio.wait_for(ready.wait(), 5)
        try:
            result = await asyncio.wait_for(client(port, out_path), 90)
        finally:
            server.cancel()
            try:
                await server
            except (asyncio.CancelledError, Exception):
                pass
        return result

    return asyncio.run(_run())


def pick_port():
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_scripted_session_roundtrip(tmp_path):
    port = pick_port()

    async def client(port, out_path):
        from websockets.asyncio.client import connect

        async with connect(f"ws://127.0.0.1:{port}") as ws:
            hello = json.loads(await ws.recv())
            assert hello["type"] == "hello"
            assert hello["version"] == PROTOCOL_VERSION
            assert hello["config_hash"] == CONFIG.hash()
            await ws.send(json.dumps({"type": "start"}))
            frames = 0
            await ws.send(json.dumps({"type": "action", "dx": 0.02, "dy": 0.0,
                                      "grip": 1.0, "tick": 0}))
            while frames < 45:
                message = json.loads(await ws.recv())
                if message["type"] == "state":
                    frames += 1
            await ws.send(json.dumps({"type": "stop"}))
            await ws.send(json.dumps({"type": "save"}))
            while True:
                message = json.loads(await ws.recv())
                if message["type"] == "saved":
                    return message

    saved = run_session(client, port=port, tmp_path=tmp_path)
    assert saved["episodes"] == 1
    dataset = load_dataset(tmp_path / "teleop.ndjson", config=CONFIG)
    assert dataset.collector == "teleop"
    episode = dataset.episodes[0]
    assert episode.collector == "teleop"
    assert episode.length >= 45
    verify_replayable(CONFIG, episode)
    # the commanded action stream actually moved the agent
    assert episode.states[-1].agent_x > episode.states[0].agent_x


def test_frame_cadence_within_ten_percent(tmp_path):
    port = pick_port()
    n_frames = 60

    async def client(port, out_path):
        from websockets.asyncio.client import connect

        async with connect(f"ws://127.0.0.1:{port}") as ws:
            await ws.recv()  # hello
            await ws.send(json.dumps({"type": "start"}))
            stamps = []
            while len(stamps) < n_frames:
                message = json.loads(await ws.recv())
                if message["type"] == "state":
                    stamps.append(time.perf_counter())
            return stamps

    stamps = run_session(client, port=port, tmp_path=tmp_path)
    elapsed = stamps[-1] - stamps[0]
    rate = (n_frames - 1) / elapsed
    assert abs(rate - CONFIG.tick_rate) / CONFIG.tick_rate < 0.10


def test_disconnect_flushes_truncated_episode(tmp_path):
    port = pick_port()

    async def client(port, out_path):
        from websockets.asyncio.client import connect

        async with connect(f"ws://127.0.0.1:{port}") as ws:
            await ws.recv()
            await ws.send(json.dumps({"type": "start"}))
            frames = 0
            while frames < 10:
                message = json.loads(await ws.recv())
                if message["type"] == "state":
                    frames += 1
            # vanish mid-episode
            return None

    run_session(client, port=port, tmp_path=tmp_path)
    dataset = load_dataset(tmp_path / "teleop.ndjson", config=CONFIG)
    assert len(dataset.episodes) == 1
    assert dataset.episodes[0].length >= 10
    verify_replayable(CONFIG, dataset.episodes[0])


def test_malformed_message_drops_session(tmp_path):
    port = pick_port()

    async def client(port, out_path):
        from websockets.asyncio.client import connect

        async with connect(f"ws://127.0.0.1:{port}") as ws:
            await ws.recv()
            await ws.send("this is not json")
            message = json.loads(await ws.recv())
            return message

    message = run_session(client, port=port, tmp_path=tmp_path)
    assert message["type"] == "error"


def test_teleop_dataset_is_accepted_as_play_data(tmp_path):
    port = pick_port()

    async def client(port, out_path):
        from websockets.asyncio.client import connect

        async with connect(f"ws://127.0.0.1:{port}") as ws:
            await ws.recv()
            await ws.send(json.dumps({"type": "start"}))
            frames = 0
            rng = np.random.default_rng(0)
            while frames < 40:
                message = json.loads(await ws.recv())
                if message["type"] == "state":
                    frames += 1
                    await ws.send(json.dumps({
                        "type": "action", "dx": float(rng.uniform(-0.04, 0.04)),
                        "dy": float(rng.uniform(-0.04, 0.04)),
                        "grip": float(rng.uniform(0, 1)), "tick": frames}))
            await ws.send(json.dumps({"type": "save"}))
            while True:
                message = json.loads(await ws.recv())
                if message["type"] == "saved":
                    return message

    run_session(client, port=port, tmp_path=tmp_path)
    from playlmp.models import PlayGCBC

    dataset = load_dataset(tmp_path / "teleop.ndjson", config=CONFIG)
    est = PlayGCBC(train_steps=3, hidden_size=8, rnn_layers=1, kappa_low=4,
                   kappa_high=8, batch_size=2, seed=0)
    est.fit(dataset, CONFIG)  # teleop data feeds the play-supervised models
    assert est.trained_steps_ == 3
