"""WebSocket bridge for the operator console.

One session per process: the tick loop runs paced to the scenario tick rate,
a snapshot message goes out after every tick, and operator commands are
queued and applied only at tick boundaries.
"""

from __future__ import annotations

import asyncio
import json

from ..errors import BindError, MallSimError
from .engine import PROTOCOL_VERSION, Engine
from .scenario import Scenario


class ServeSession:
    def __init__(self, scenario: Scenario, host: str = "127.0.0.1", port: int = 8765,
                 rate: float | None = None, max_ticks: int | None = None):
        self.engine = Engine(scenario)
        self.host = host
        self.port = port
        self.rate = rate if rate is not None else scenario.tick_rate
        self.max_ticks = max_ticks if max_ticks is not None else scenario.max_ticks
        self._clients: set = set()
        self._commands: asyncio.Queue = asyncio.Queue()
        self._stopping = asyncio.Event()

    async def _handler(self, websocket) -> None:
        self._clients.add(websocket)
        try:
            await websocket.send(json.dumps(self.engine.map_payload(), ensure_ascii=False))
            async for raw in websocket:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "command" not in msg:
                        raise MallSimError("messages must be objects with a 'command' field")
                except (json.JSONDecodeError, MallSimError) as e:
                    await websocket.send(json.dumps({
                        "kind": "error", "tick": self.engine.tick, "message": str(e)}))
                    continue
                await self._commands.put((websocket, msg))
        finally:
            self._clients.discard(websocket)

    async def _broadcast(self, payload: dict) -> None:
        if not self._clients:
            return
        data = json.dumps(payload, ensure_ascii=False)
        for ws in list(self._clients):
            try:
                await ws.send(data)
            except Exception:
                self._clients.discard(ws)

    async def _tick_loop(self) -> None:
        period = 1.0 / self.rate if self.rate > 0 else 0.0
        while not self._stopping.is_set():
            # apply queued commands at the tick boundary
            while not self._commands.empty():
                ws, msg = self._commands.get_nowait()
                try:
                    if msg.get("command") == "visgrid":
                        reply = self.engine.visgrid_payload(str(msg["landmark"]))
                        await ws.send(json.dumps(reply, ensure_ascii=False))
                    else:
                        self.engine.apply_command(msg)
                except (MallSimError, KeyError, ValueError, TypeError) as e:
                    try:
                        await ws.send(json.dumps({
                            "kind": "error", "tick": self.engine.tick, "message": str(e)}))
                    except Exception:
                        pass
            self.engine.step()
            await self._broadcast(self.engine.snapshot())
            if self.engine.tick >= self.max_ticks:
                self._stopping.set()
                break
            if period:
                await asyncio.sleep(period)

    async def run(self) -> None:
        import websockets

        try:
            server = await websockets.serve(self._handler, self.host, self.port)
        except OSError as e:
            raise BindError(f"cannot bind {self.host}:{self.port}: {e}") from None
        try:
            await self._tick_loop()
        finally:
            server.close()
            await server.wait_closed()

    def stop(self) -> None:
        self._stopping.set()


def serve(scenario: Scenario, host: str = "127.0.0.1", port: int = 8765,
          rate: float | None = None, max_ticks: int | None = None) -> None:
    session = ServeSession(scenario, host=host, port=port, rate=rate, max_ticks=max_ticks)
    asyncio.run(session.run())
