import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from dbl.analysis import RatingRecord, extract_pld, summarize
from dbl.audio import AudioClip, write_wav
from dbl.remix import ManifestItem, SessionManifest, StimulusRef
from dbl.service import (
    DuplicateSubmissionError,
    ResultsStore,
    make_server,
    session_payload,
)

from conftest import FS


def make_manifest(n_items: int = 1) -> SessionManifest:
    items = []
    for i in range(n_items):
        stimuli = tuple(StimulusRef(id=f"sid{i}{k}", file=f"stimuli/sid{i}{k}.wav") for k in range(8))
        items.append(
            ManifestItem(
                item_id=f"item{i}",
                item_class="CoM",
                stimuli=stimuli,
                order=tuple(range(8)),
                trial=(i == 0 and n_items > 1),
            )
        )
    return SessionManifest(seed=1, items=tuple(items))


@pytest.fixture()
def server(tmp_path):
    manifest = make_manifest(2)
    stim_dir = tmp_path / "stimuli"
    stim_dir.mkdir()
    clip = AudioClip(np.zeros((1, 480)), FS)
    for item in manifest.items:
        for ref in item.stimuli:
            write_wav(clip, tmp_path / ref.file, "float32")
    store = ResultsStore(tmp_path / "ratings.jsonl")
    httpd = make_server(manifest, tmp_path, store, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, store, manifest
    httpd.shutdown()
    httpd.server_close()


def get(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, resp.read()


def post_json(url, payload):
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def valid_submission(manifest, item_index=1, subject="subj1", value=50):
    item = manifest.items[item_index]
    return {
        "subject_id": subject,
        "experience": "non_expert",
        "item_id": item.item_id,
        "ratings": [{"stimulus_id": s.id, "rating": value} for s in item.stimuli],
    }


class TestEndpoints:
    def test_health(self, server):
        base, _, _ = server
        status, body = get(f"{base}/api/health")
        assert status == 200
        assert json.loads(body) == {"status": "ok"}

    def test_session_payload_is_blind(self, server):
        base, _, _ = server
        status, body = get(f"{base}/api/session/slot-a")
        assert status == 200
        payload = json.loads(body)
        assert payload["schema"] == "dbl-session/1"
        assert payload["subject_slot"] == "slot-a"
        assert len(payload["items"]) == 2
        assert payload["items"][0]["trial"] is True

        forbidden = ("ld", "lufs", "attenuation", "gain", "loudness", "beta")
        def walk(node):
            if isinstance(node, dict):
                for key, value in node.items():
                    lowered = key.lower()
                    assert not any(tag in lowered for tag in forbidden), key
                    walk(value)
            elif isinstance(node, list):
                for v in node:
                    walk(v)
        walk(payload)
        # no numeric level data anywhere: only ids, names, flags, indices
        item = payload["items"][0]
        assert set(item) == {"item_id", "stimuli", "order", "trial"}

    def test_stimulus_bytes(self, server):
        base, _, manifest = server
        sid = manifest.items[0].stimuli[0].id
        status, body = get(f"{base}/api/stimulus/{sid}")
        assert status == 200
        assert body[:4] == b"RIFF"

    def test_unknown_stimulus_404(self, server):
        base, _, _ = server
        status, _ = post_json(f"{base}/api/nonsense", {})
        assert status == 404
        try:
            get(f"{base}/api/stimulus/does-not-exist")
            raise AssertionError("expected HTTPError")
        except urllib.error.HTTPError as err:
            assert err.code == 404

    def test_accepts_valid_submission(self, server):
        base, store, manifest = server
        status, body = post_json(f"{base}/api/ratings", valid_submission(manifest))
        assert status == 201
        entries = store.entries()
        assert len(entries) == 1
        assert entries[0]["item_id"] == manifest.items[1].item_id
        assert entries[0]["manifest_seed"] == 1
        assert entries[0]["trial"] is False

    def test_trial_item_submission_is_tagged(self, server):
        base, store, manifest = server
        status, _ = post_json(f"{base}/api/ratings", valid_submission(manifest, item_index=0))
        assert status == 201
        assert store.entries()[-1]["trial"] is True

    def test_extreme_ratings_accepted(self, server):
        base, _, manifest = server
        sub = valid_submission(manifest)
        sub["ratings"][0]["rating"] = 0
        sub["ratings"][1]["rating"] = 100
        status, _ = post_json(f"{base}/api/ratings", sub)
        assert status == 201

    def test_incomplete_ratings_400(self, server):
        base, store, manifest = server
        sub = valid_submission(manifest)
        sub["ratings"] = sub["ratings"][:7]
        status, body = post_json(f"{base}/api/ratings", sub)
        assert status == 400
        assert "incomplete" in body["error"]
        assert store.entries() == []

    def test_out_of_range_rating_400(self, server):
        base, store, manifest = server
        sub = valid_submission(manifest)
        sub["ratings"][3]["rating"] = 101
        status, _ = post_json(f"{base}/api/ratings", sub)
        assert status == 400
        assert store.entries() == []

    def test_unknown_item_404(self, server):
        base, _, manifest = server
        sub = valid_submission(manifest)
        sub["item_id"] = "ghost"
        status, _ = post_json(f"{base}/api/ratings", sub)
        assert status == 404

    def test_duplicate_submission_409_store_unchanged(self, server):
        base, store, manifest = server
        status, _ = post_json(f"{base}/api/ratings", valid_submission(manifest, value=40))
        assert status == 201
        before = store.entries()
        status, body = post_json(f"{base}/api/ratings", valid_submission(manifest, value=90))
        assert status == 409
        assert store.entries() == before

    def test_malformed_json_400(self, server):
        base, _, _ = server
        req = urllib.request.Request(
            f"{base}/api/ratings", data=b"{not json", headers={"Content-Type": "application/json"}
        )
        try:
            urllib.request.urlopen(req)
            raise AssertionError("expected HTTPError")
        except urllib.error.HTTPError as err:
            assert err.code == 400


class TestResultsStore:
    def test_rejects_duplicates_across_restarts(self, tmp_path):
        path = tmp_path / "store.jsonl"
        store = ResultsStore(path)
        store.append({"subject_id": "s", "item_id": "i", "ratings": {"a": 1.0}})
        reopened = ResultsStore(path)
        with pytest.raises(DuplicateSubmissionError):
            reopened.append({"subject_id": "s", "item_id": "i", "ratings": {"a": 2.0}})

    def test_replay_reproduces_summaries(self, tmp_path):
        # analysis recomputed from the append-only log is deterministic
        manifest = make_manifest(1)
        item = manifest.items[0]
        lds = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0]
        store = ResultsStore(tmp_path / "s.jsonl")
        rng = np.random.default_rng(5)
        for subj in ("a", "b", "c"):
            ratings = {s.id: float(r) for s, r in zip(item.stimuli, rng.integers(0, 101, 8))}
            store.append({"subject_id": subj, "item_id": item.item_id, "ratings": ratings})

        def summaries():
            plds = []
            for entry in store.entries():
                by_id = entry["ratings"]
                ordered = tuple(by_id[s.id] for s in item.stimuli)
                rec = RatingRecord(entry["subject_id"], "non_expert", entry["item_id"], ordered)
                plds.append(extract_pld(rec, lds))
            return summarize(plds).to_json_dict()

        assert summaries() == summaries()

    def test_session_payload_helper(self):
        payload = session_payload(make_manifest(1), "slotX")
        assert payload["items"][0]["stimuli"] == [s.id for s in make_manifest(1).items[0].stimuli]
