from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable

import pytest

from polarkit.core import Dataset, Sample
from polarkit.rng import SplitMix64

WORDS = (
    "people city government market school river family village council team "
    "election border festival worker farmer student teacher doctor road bridge "
    "policy budget court church mosque temple neighbour visitor culture history"
).split()


def make_text(rng: SplitMix64, n_words: int = 8) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n_words))


def make_dataset(
    n: int,
    lang: str = "eng",
    pos_fraction: float = 0.5,
    seed: int = 0,
    prefix: str = "s",
) -> Dataset:
    rng = SplitMix64.keyed("fixture", seed, lang)
    n_pos = round(n * pos_fraction)
    samples = [
        Sample(id=f"{prefix}{i:04d}", lang=lang, text=make_text(rng, 6 + rng.below(10)),
               label=1 if i < n_pos else 0)
        for i in range(n)
    ]
    order = list(range(n))
    rng.shuffle(order)
    return Dataset(lang, tuple(samples[i] for i in order))


Handler = Callable[[str, dict[str, Any]], tuple[int, Any]]


class MockService:
    """Local HTTP server that records every request and replies via ``handler``."""

    def __init__(self) -> None:
        self.requests: list[dict[str, Any]] = []
        self.handler: Handler = lambda path, body: (404, {"error": "no handler"})
        self._lock = threading.Lock()
        service = self

        class _H(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                body = json.loads(raw) if raw else None
                with service._lock:
                    service.requests.append(
                        {"path": self.path, "body": body, "raw": raw, "headers": dict(self.headers)}
                    )
                status, payload = service.handler(self.path, body)
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _H)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        self._thread = threading.Thread(target=self.server.serve_forever, args=(0.02,), daemon=True)
        self._thread.start()

    def close(self) -> None:
        self.server.shutdown()
        self.server.server_close()


def chat_reply(content: str) -> dict[str, Any]:
    return {"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}


@pytest.fixture
def mock_service():
    svc = MockService()
    yield svc
    svc.close()


def make_pool(n: int, lang: str = "eng", seed: int = 0, strategy: str = "direct") -> Dataset:
    rng = SplitMix64.keyed("pool", seed, lang)
    return Dataset(lang, tuple(
        Sample(id=f"{lang}-syn-{i:05d}", lang=lang, text=make_text(rng, 6 + rng.below(10)),
               label=rng.below(2), source="synthetic", strategy=strategy)
        for i in range(n)
    ))


def at_angle(sim: float, axis: int = 0, other: int = 1, dim: int = 4) -> list[float]:
    """Unit vector with cosine ``sim`` to basis vector ``axis``, tilted toward ``other``."""
    v = [0.0] * dim
    v[axis] = sim
    v[other] = (1 - sim * sim) ** 0.5
    return v


def basis(axis: int, dim: int = 4) -> list[float]:
    v = [0.0] * dim
    v[axis] = 1.0
    return v


# --- acceptance reporting ---------------------------------------------------

_ACCEPTANCE: dict[int, str] = {}


class AcceptanceRecorder:
    def record(self, number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)


@pytest.fixture
def acceptance() -> AcceptanceRecorder:
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
