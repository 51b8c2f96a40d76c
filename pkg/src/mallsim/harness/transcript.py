"""Transcript records: one JSON object per line, stable field order."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

CHANNELS = ("perception", "attention", "predicate", "dialogue", "action", "task")


@dataclass
class Transcript:
    records: list[dict] = field(default_factory=list)

    def append(self, tick: int, channel: str, payload: dict) -> None:
        if channel not in CHANNELS:
            raise ValueError(f"unknown channel {channel!r}")
        rec = {"tick": tick, "channel": channel}
        rec.update(payload)
        if self.records and self.records[-1]["tick"] > tick:
            raise ValueError("ticks must be non-decreasing")
        self.records.append(rec)

    def channel(self, name: str) -> list[dict]:
        return [r for r in self.records if r["channel"] == name]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n"
                       for r in self.records)

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_jsonl().encode("utf-8"))

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        t = cls()
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    t.records.append(json.loads(line))
        return t
