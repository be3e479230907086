"""Listening-test session service and append-only ratings store.

Session payloads expose opaque stimulus ids only; attenuation and LD
metadata never leave the server. All mutation funnels through the store's
single lock; reads serve point-in-time snapshots.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .errors import DblError
from .remix import SessionManifest


class DuplicateSubmissionError(DblError):
    """A (subject, item) pair was already rated."""


class ResultsStore:
    """Append-only JSONL log of rating submissions."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seen: set = set()
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    entry = json.loads(line)
                    self._seen.add((entry["subject_id"], entry["item_id"]))
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    def append(self, submission: dict) -> None:
        key = (submission["subject_id"], submission["item_id"])
        with self._lock:
            if key in self._seen:
                raise DuplicateSubmissionError(
                    f"ratings for subject {key[0]!r} item {key[1]!r} already stored"
                )
            with open(self.path, "a") as fh:
                fh.write(json.dumps(submission, sort_keys=True) + "\n")
            self._seen.add(key)

    def entries(self) -> list:
        with self._lock:
            text = self.path.read_text()
        return [json.loads(line) for line in text.splitlines() if line.strip()]


def session_payload(manifest: SessionManifest, slot: str) -> dict:
    """UI-facing slice of the manifest: ids and order only, no levels."""
    return {
        "schema": "dbl-session/1",
        "subject_slot": slot,
        "items": [
            {
                "item_id": it.item_id,
                "stimuli": [s.id for s in it.stimuli],
                "order": list(it.order),
                "trial": it.trial,
            }
            for it in manifest.items
        ],
    }


class _Api:
    def __init__(self, manifest: SessionManifest, stimulus_root: Path, store: ResultsStore):
        self.manifest = manifest
        self.store = store
        self.files = {}
        for it in manifest.items:
            for s in it.stimuli:
                self.files[s.id] = stimulus_root / s.file
        self.item_stimuli = {
            it.item_id: {s.id for s in it.stimuli} for it in manifest.items
        }
        self.item_trial = {it.item_id: it.trial for it in manifest.items}

    def validate_submission(self, body: dict) -> dict:
        for field in ("subject_id", "item_id", "ratings"):
            if field not in body:
                raise ValueError(f"missing field {field!r}")
        item_id = body["item_id"]
        expected = self.item_stimuli.get(item_id)
        if expected is None:
            raise KeyError(f"unknown item {item_id!r}")
        ratings = body["ratings"]
        if not isinstance(ratings, list):
            raise ValueError("ratings must be a list of {stimulus_id, rating}")
        seen = {}
        for entry in ratings:
            sid = entry.get("stimulus_id")
            value = entry.get("rating")
            if sid not in expected:
                raise ValueError(f"stimulus {sid!r} does not belong to item {item_id!r}")
            if sid in seen:
                raise ValueError(f"duplicate rating for stimulus {sid!r}")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"rating for {sid!r} is not a number")
            if not 0 <= value <= 100:
                raise ValueError(f"rating {value} outside [0, 100]")
            seen[sid] = float(value)
        if set(seen) != expected:
            raise ValueError(
                f"incomplete ratings: {len(seen)} of {len(expected)} conditions rated"
            )
        return {
            "schema": "dbl-rating-submission/1",
            "subject_id": str(body["subject_id"]),
            "experience": str(body.get("experience", "")),
            "item_id": item_id,
            "ratings": seen,
            "trial": self.item_trial[item_id],
            "manifest_seed": self.manifest.seed,
            "timestamp": time.time(),
        }


class _Handler(BaseHTTPRequestHandler):
    api: _Api  # assigned by make_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/api/health":
            self._send_json(200, {"status": "ok"})
            return
        if self.path.startswith("/api/session/"):
            slot = self.path[len("/api/session/") :]
            if not slot:
                self._send_json(404, {"error": "missing session slot"})
                return
            self._send_json(200, session_payload(self.api.manifest, slot))
            return
        if self.path.startswith("/api/stimulus/"):
            sid = self.path[len("/api/stimulus/") :]
            file = self.api.files.get(sid)
            if file is None or not file.exists():
                self._send_json(404, {"error": f"unknown stimulus {sid!r}"})
                return
            data = file.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", "audio/wav")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return
        self._send_json(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/api/ratings":
            self._send_json(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            submission = self.api.validate_submission(body)
        except KeyError as exc:
            self._send_json(404, {"error": str(exc)})
            return
        except (ValueError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        try:
            self.api.store.append(submission)
        except DuplicateSubmissionError as exc:
            self._send_json(409, {"error": str(exc)})
            return
        self._send_json(201, {"status": "stored"})


def make_server(
    manifest: SessionManifest,
    stimulus_root: str | Path,
    store: ResultsStore,
    host: str = "127.0.0.1",
    port: int = 0,
) -> ThreadingHTTPServer:
    api = _Api(manifest, Path(stimulus_root), store)
    handler = type("BoundHandler", (_Handler,), {"api": api})
    return ThreadingHTTPServer((host, port), handler)


def serve(manifest: SessionManifest, stimulus_root, store: ResultsStore, host, port) -> None:
    server = make_server(manifest, stimulus_root, store, host, port)
    print(f"serving on http://{server.server_address[0]}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
