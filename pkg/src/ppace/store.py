"""Append-only JSONL log, the persistence primitive for corpus and review data.

Single writer (serialized by a lock), any number of concurrent readers; a
reader iterates a point-in-time snapshot of the lines present when it starts.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Iterator

from .errors import PpaceError


class StoreCorruptError(PpaceError):
    pass


class AppendLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def records(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreCorruptError(f"{self.path}:{lineno}: {exc}") from exc

    def __len__(self) -> int:
        return sum(1 for _ in self.records())
