"""Acceptance suite: one test per stated criterion, offline (mock backend).

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line
per criterion.
"""

import json
import random
import threading
import time
from contextlib import contextmanager

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from abscribe import ids, store
from abscribe.cli import main as cli_main
from abscribe.errors import BackendError, IntegrityError, ParseError, UnsupportedVersion
from abscribe.llm import MockBackend
from abscribe.service import create_app

from conftest import make_engine
from oracles import ModelFuzzer, RefModel, real_listing
from test_service import sse_events
from test_store import random_workspace


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


SCENARIO_TEXT = (
    "The Art of Rewriting\n"
    "Drafting is easy. Revision is where writing happens. Every good writer rewrites.\n"
    "Thank you for reading, and happy writing to you all.\n"
)

SCENARIO_PROMPTS = [
    "make it longer",
    "make it shorter",
    "make it more formal",
    "increase word diversity",
    "add emojis",
    "make it poetic",
    "make it bolder",
    "simplify the wording",
]


def test_scenario_three_segments_times_eight_variations(tmp_path):
    """Three segments (title line, mid-block sentence, whole paragraph), eight
    generated variations each: 24 additions, zero added clutter."""
    with criterion("scenario 3 segments x 8 variations"):
        started = time.monotonic()
        engine = make_engine(tmp_path / "ws.json")
        client = TestClient(create_app(engine))
        doc = client.post("/api/v1/documents",
                          json={"title": "essay", "text": SCENARIO_TEXT}
                          ).json()["document"]
        doc_id = doc["id"]
        blocks = doc["blocks"]
        block_texts = SCENARIO_TEXT[:-1].split("\n")

        sentence = "Revision is where writing happens."
        segments = [
            (blocks[0]["id"], 0, len(block_texts[0])),
            (blocks[1]["id"], block_texts[1].index(sentence),
             block_texts[1].index(sentence) + len(sentence)),
            (blocks[2]["id"], 0, len(block_texts[2])),
        ]
        components = []
        for block_id, start, end in segments:
            response = client.post(f"/api/v1/documents/{doc_id}/components",
                                   json={"block_id": block_id,
                                         "start": start, "end": end})
            components.append(response.json()["component_id"])

        baseline = client.get(f"/api/v1/documents/{doc_id}/flatten").text
        assert baseline == SCENARIO_TEXT[:-1], "components must not disturb flatten"

        buttons = []
        for prompt in SCENARIO_PROMPTS:
            buttons.append(client.post("/api/v1/buttons",
                                       json={"prompt_text": prompt}).json()["button"])

        original_ids = {}
        original_texts = {}
        for entry in client.get(f"/api/v1/documents/{doc_id}/components").json():
            original_ids[entry["component_id"]] = entry["variations"][0]["id"]
            original_texts[entry["component_id"]] = entry["variations"][0]["text"]

        for cid in components:
            for button in buttons:
                response = client.post(
                    f"/api/v1/documents/{doc_id}/components/{cid}/apply-button",
                    json={"button_id": button["id"]})
                assert response.status_code == 200

        listing = client.get(f"/api/v1/documents/{doc_id}/components").json()
        assert [len(entry["variations"]) for entry in listing] == [9, 9, 9]

        # Clutter invariant: assigning the originals reproduces the baseline
        # bit-identically, 24 stored variations notwithstanding.
        params = [("assign", f"{cid}:{vid}") for cid, vid in original_ids.items()]
        restored = client.get(f"/api/v1/documents/{doc_id}/flatten",
                              params=params).text
        assert restored == baseline

        # The default flatten differs from the baseline exactly where the
        # selection moved: each segment now shows its eight stacked rewrites.
        expected = baseline
        for cid in components:
            final = original_texts[cid]
            for prompt in SCENARIO_PROMPTS:
                final = f"MOCK[{prompt}]{{{final}}}"
            expected = expected.replace(original_texts[cid], final)
        assert client.get(f"/api/v1/documents/{doc_id}/flatten").text == expected

        stored_buttons = client.get("/api/v1/buttons").json()
        assert [b["prompt_text"] for b in stored_buttons] == SCENARIO_PROMPTS
        assert all(b["use_count"] == 3 for b in stored_buttons)

        assert time.monotonic() - started < 5.0


def test_model_based_oracle_thousand_logs():
    """1000 random operation logs (length <= 200) against the naive string
    reference; flatten and listings bit-identical after every step."""
    with criterion("model-based oracle, 1000 random logs"):
        started = time.monotonic()
        seed_rng = random.Random(20240)
        for log_index in range(1000):
            rng = random.Random(seed_rng.randrange(2 ** 63))
            fuzzer = ModelFuzzer.fresh(rng)
            fuzzer.check()
            fuzzer.run(rng.randrange(1, 201))
        elapsed = time.monotonic() - started
        assert elapsed < 30.0, f"oracle run took {elapsed:.1f}s"


def test_serialization_round_trip_500_workspaces(tmp_path):
    with criterion("serialization round-trip, 500 workspaces"):
        rng = random.Random(555)
        path = tmp_path / "ws.json"
        for i in range(500):
            workspace = random_workspace(rng)
            store.save(workspace, path)
            assert store.load(path) == workspace, f"mismatch at workspace {i}"

        store.save(random_workspace(rng), path)
        raw = json.loads(path.read_text())
        raw["format_version"] = 99
        path.write_text(json.dumps(raw))
        with pytest.raises(UnsupportedVersion):
            store.load(path)

        path.write_text(path.read_text()[:25])
        with pytest.raises(ParseError):
            store.load(path)

        corrupt = {"format_version": 1, "buttons": [], "documents": [{
            "id": "d", "title": "t",
            "created_at": "2024-01-01T00:00:00.000Z",
            "updated_at": "2024-01-01T00:00:00.000Z",
            "blocks": [{"id": "b", "runs": [{"type": "component", "component": {
                "id": "c", "selected_id": "missing", "variations": [{
                    "id": "v", "text": "x", "origin": {"kind": "human"},
                    "created_at": "2024-01-01T00:00:00.000Z"}]}}]}]}]}
        path.write_text(json.dumps(corrupt))
        with pytest.raises(IntegrityError):
            store.load(path)


def test_stacking_yields_exact_nested_string(tmp_path):
    with criterion("stacking semantics"):
        engine = make_engine(tmp_path / "ws.json")
        client = TestClient(create_app(engine))
        doc = client.post("/api/v1/documents",
                          json={"title": "t", "text": "original"}).json()["document"]
        doc_id = doc["id"]
        cid = client.post(f"/api/v1/documents/{doc_id}/components",
                          json={"block_id": doc["blocks"][0]["id"],
                                "start": 0, "end": 8}).json()["component_id"]
        button = client.post("/api/v1/buttons",
                             json={"prompt_text": "p"}).json()["button"]
        url = f"/api/v1/documents/{doc_id}/components/{cid}/apply-button"
        first = client.post(url, json={"button_id": button["id"]}).json()
        second = client.post(url, json={"button_id": button["id"]}).json()
        assert first["text"] == "MOCK[p]{original}"
        assert second["text"] == "MOCK[p]{MOCK[p]{original}}"

        variations = client.get(
            f"/api/v1/documents/{doc_id}/components").json()[0]["variations"]
        original, v1, v2 = variations
        assert v1["origin"]["kind"] == "llm_button"
        assert v1["origin"]["button_id"] == button["id"]
        assert v1["origin"]["source_variation_id"] == original["id"]
        assert v2["origin"]["source_variation_id"] == v1["id"]
        assert v2["selected"] is True


class HalfFlaky(MockBackend):
    """Fails exactly half of completion calls, deterministically seeded."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def complete(self, request, config):
        if self.rng.random() < 0.5:
            raise BackendError(503, "injected fault")
        return super().complete(request, config)


def test_atomicity_under_injected_faults(tmp_path):
    with criterion("atomicity under 50% backend faults, 200 attempts"):
        path = tmp_path / "ws.json"
        engine = make_engine(path, backend=HalfFlaky(seed=99))
        client = TestClient(create_app(engine))
        doc = client.post("/api/v1/documents",
                          json={"title": "t", "text": "some words"}).json()["document"]
        doc_id = doc["id"]
        cid = client.post(f"/api/v1/documents/{doc_id}/components",
                          json={"block_id": doc["blocks"][0]["id"],
                                "start": 0, "end": 4}).json()["component_id"]
        button = client.post("/api/v1/buttons",
                             json={"prompt_text": "p"}).json()["button"]
        url = f"/api/v1/documents/{doc_id}/components/{cid}/apply-button"

        failures = successes = 0
        for _ in range(200):
            before_file = path.read_bytes()
            before_vars = len(client.get(
                f"/api/v1/documents/{doc_id}/components").json()[0]["variations"])
            before_uses = client.get("/api/v1/buttons").json()[0]["use_count"]
            response = client.post(url, json={"button_id": button["id"]})
            after_vars = len(client.get(
                f"/api/v1/documents/{doc_id}/components").json()[0]["variations"])
            after_uses = client.get("/api/v1/buttons").json()[0]["use_count"]
            if response.status_code == 502:
                failures += 1
                assert after_vars == before_vars
                assert after_uses == before_uses
                assert path.read_bytes() == before_file
                reloaded = store.load(path)
                assert reloaded.document(doc_id).flatten() == client.get(
                    f"/api/v1/documents/{doc_id}/flatten").text
            else:
                assert response.status_code == 200
                successes += 1
                assert after_vars == before_vars + 1
                assert after_uses == before_uses + 1
        assert failures > 50 and successes > 50


def test_streaming_contract(tmp_path):
    with criterion("streaming contract: chunking, done event, cancellation"):
        engine = make_engine(tmp_path / "ws.json")
        client = TestClient(create_app(engine))
        doc = client.post("/api/v1/documents",
                          json={"title": "t", "text": "x"}).json()["document"]
        prompt = "write a greeting"
        full = f"MOCK-INSERT[{prompt}]"
        assert len(full) == 29
        response = client.post(f"/api/v1/documents/{doc['id']}/inserts",
                               json={"block_id": doc["blocks"][0]["id"],
                                     "offset": 0, "prompt_text": prompt})
        events = sse_events(response.text)
        tokens = [data["text"] for name, data in events if name == "token"]
        assert len(tokens) == 8
        assert events[-1][0] == "done"
        assert "".join(tokens) == events[-1][1]["full_text"] == full

        # cancel mid-stream through the gateway: a strict prefix survives
        from abscribe.llm import InsertState
        gateway = engine.gateway
        delivered = []
        holder = {}
        ready = threading.Event()

        def sink(chunk):
            ready.wait(5)
            delivered.append(chunk)
            if len(delivered) == 3:
                holder["insert"].cancel()

        holder["insert"] = gateway.start_insert("", "", prompt, sink=sink)
        ready.set()
        assert holder["insert"].wait(timeout=5)
        insert = holder["insert"]
        assert insert.state is InsertState.CANCELLED
        assert full.startswith(insert.accumulated_text)
        assert 0 < len(insert.accumulated_text) < len(full)


DIFF_TEXT = ("Subject line here\n"
             "Dear Prof. Bardley, I am writing to introduce myself.\n"
             "Warm regards, Riley\n")

# (command, args...) — ids are symbolic indices into the recorder's tables.
DIFFERENTIAL_SCRIPT = [
    ("doc_import", "letter", DIFF_TEXT),                    # doc 0
    ("doc_new", "scratch"),                                 # doc 1
    ("comp_create", 0, 0, 0, 7),                            # comp 0, var 0
    ("comp_create", 0, 1, 5, 18),                           # comp 1, var 1
    ("var_add", 0, 0, "Topic"),                             # var 2
    ("var_add", 0, 0, "Headline"),                          # var 3
    ("var_select", 0, 0, 2),
    ("var_edit", 0, 0, 2, "Topic!"),
    ("var_clone", 0, 0, 3),                                 # var 4
    ("var_delete", 0, 0, 4),
    ("btn_new", "make it shorter"),                         # btn 0
    ("btn_new", "increase the formality of the tone significantly"),  # btn 1
    ("btn_apply", 0, 0, 0),                                 # var 5
    ("btn_apply", 0, 0, 1),                                 # var 6
    ("btn_apply", 0, 1, 0),                                 # var 7
    ("btn_edit_label", 1, "Formality"),
    ("btn_edit_prompt", 0, "make it much shorter"),
    ("comp_create", 0, 2, 0, 4),                            # comp 2, var 8
    ("btn_apply", 0, 2, 1),                                 # var 9
    ("var_add", 0, 2, "Kind"),                              # var 10
    ("var_select", 0, 2, 10),
    ("var_select", 0, 0, 3),
    ("comp_dissolve", 0, 2),
    ("btn_delete", 1),
    ("var_add", 0, 1, "Professor Bardley"),                 # var 11
    ("var_select", 0, 1, 11),
    ("var_delete", 0, 1, 7),
    ("insert_accept", 0, 2, 0, "write a greeting"),
    ("doc_new", "notes"),                                   # doc 2
    ("doc_delete", 2),
]


class CliRecorder:
    def __init__(self, workspace, tmp_path):
        self.runner = CliRunner()
        self.workspace = str(workspace)
        self.tmp_path = tmp_path
        self.docs, self.blocks, self.comps, self.vars, self.btns = [], {}, [], [], []

    def _json(self, *args):
        result = self.runner.invoke(
            cli_main, ["--workspace", self.workspace, "--llm-backend", "mock",
                       "--json", *args])
        assert result.exit_code == 0, result.output
        return json.loads(result.output.splitlines()[-1])

    def run(self, step):
        name, *args = step
        getattr(self, name)(*args)

    def doc_import(self, title, text):
        source = self.tmp_path / f"src-{len(self.docs)}.txt"
        source.write_text(text, encoding="utf-8")
        payload = self._json("doc", "import", str(source), "--title", title)
        self._record_doc(payload["document"])

    def doc_new(self, title):
        self._record_doc(self._json("doc", "new", "--title", title)["document"])

    def _record_doc(self, document):
        index = len(self.docs)
        self.docs.append(document["id"])
        for j, block in enumerate(document["blocks"]):
            self.blocks[(index, j)] = block["id"]

    def doc_delete(self, d):
        self._json("doc", "delete", self.docs[d])

    def comp_create(self, d, b, start, end):
        payload = self._json("comp", "create", "--doc", self.docs[d],
                             "--block", self.blocks[(d, b)],
                             "--start", str(start), "--end", str(end))
        self.comps.append(payload["component_id"])
        self.vars.append(payload["variation_id"])

    def comp_dissolve(self, d, c):
        self._json("comp", "dissolve", "--doc", self.docs[d],
                   "--component", self.comps[c])

    def var_add(self, d, c, text):
        payload = self._json("var", "add", "--doc", self.docs[d],
                             "--component", self.comps[c], "--text", text)
        self.vars.append(payload["variation_id"])

    def var_select(self, d, c, v):
        self._json("var", "select", "--doc", self.docs[d],
                   "--component", self.comps[c], "--variation", self.vars[v])

    def var_edit(self, d, c, v, text):
        self._json("var", "edit", "--doc", self.docs[d],
                   "--component", self.comps[c], "--variation", self.vars[v],
                   "--text", text)

    def var_clone(self, d, c, v):
        payload = self._json("var", "clone", "--doc", self.docs[d],
                             "--component", self.comps[c], "--variation", self.vars[v])
        self.vars.append(payload["variation_id"])

    def var_delete(self, d, c, v):
        self._json("var", "delete", "--doc", self.docs[d],
                   "--component", self.comps[c], "--variation", self.vars[v])

    def btn_new(self, prompt):
        self.btns.append(self._json("btn", "new", "--prompt", prompt)["button"]["id"])

    def btn_apply(self, d, c, b):
        payload = self._json("btn", "apply", "--button", self.btns[b],
                             "--doc", self.docs[d], "--component", self.comps[c])
        self.vars.append(payload["variation_id"])

    def btn_edit_label(self, b, label):
        self._json("btn", "edit", "--button", self.btns[b], "--label", label)

    def btn_edit_prompt(self, b, prompt):
        self._json("btn", "edit", "--button", self.btns[b], "--prompt", prompt)

    def btn_delete(self, b):
        self._json("btn", "delete", "--button", self.btns[b])

    def insert_accept(self, d, b, offset, prompt):
        self._json("insert", "--doc", self.docs[d], "--block", self.blocks[(d, b)],
                   "--offset", str(offset), "--prompt", prompt, "--accept")


class ApiRecorder(CliRecorder):
    def __init__(self, workspace, tmp_path):
        super().__init__(workspace, tmp_path)
        self.client = TestClient(create_app(make_engine(workspace)))

    def _post(self, url, body=None):
        response = self.client.post(url, json=body or {})
        assert response.status_code in (200, 201), response.text
        return response.json()

    def doc_import(self, title, text):
        payload = self._post("/api/v1/documents", {"title": title, "text": text})
        self._record_doc(payload["document"])

    def doc_new(self, title):
        payload = self._post("/api/v1/documents", {"title": title})
        self._record_doc(payload["document"])

    def doc_delete(self, d):
        assert self.client.delete(f"/api/v1/documents/{self.docs[d]}").status_code == 200

    def comp_create(self, d, b, start, end):
        payload = self._post(f"/api/v1/documents/{self.docs[d]}/components",
                             {"block_id": self.blocks[(d, b)],
                              "start": start, "end": end})
        self.comps.append(payload["component_id"])
        self.vars.append(payload["variation_id"])

    def comp_dissolve(self, d, c):
        self._post(f"/api/v1/documents/{self.docs[d]}/components/"
                   f"{self.comps[c]}/dissolve")

    def var_add(self, d, c, text):
        payload = self._post(f"/api/v1/documents/{self.docs[d]}/components/"
                             f"{self.comps[c]}/variations", {"text": text})
        self.vars.append(payload["variation_id"])

    def var_select(self, d, c, v):
        response = self.client.patch(
            f"/api/v1/documents/{self.docs[d]}/components/{self.comps[c]}"
            f"/variations/{self.vars[v]}", json={"selected": True})
        assert response.status_code == 200

    def var_edit(self, d, c, v, text):
        response = self.client.patch(
            f"/api/v1/documents/{self.docs[d]}/components/{self.comps[c]}"
            f"/variations/{self.vars[v]}", json={"text": text})
        assert response.status_code == 200

    def var_clone(self, d, c, v):
        payload = self._post(f"/api/v1/documents/{self.docs[d]}/components/"
                             f"{self.comps[c]}/variations/{self.vars[v]}/clone")
        self.vars.append(payload["variation_id"])

    def var_delete(self, d, c, v):
        response = self.client.delete(
            f"/api/v1/documents/{self.docs[d]}/components/{self.comps[c]}"
            f"/variations/{self.vars[v]}")
        assert response.status_code == 200

    def btn_new(self, prompt):
        self.btns.append(self._post("/api/v1/buttons",
                                    {"prompt_text": prompt})["button"]["id"])

    def btn_apply(self, d, c, b):
        payload = self._post(f"/api/v1/documents/{self.docs[d]}/components/"
                             f"{self.comps[c]}/apply-button",
                             {"button_id": self.btns[b]})
        self.vars.append(payload["variation_id"])

    def btn_edit_label(self, b, label):
        response = self.client.patch(f"/api/v1/buttons/{self.btns[b]}",
                                     json={"label": label})
        assert response.status_code == 200

    def btn_edit_prompt(self, b, prompt):
        response = self.client.patch(f"/api/v1/buttons/{self.btns[b]}",
                                     json={"prompt_text": prompt})
        assert response.status_code == 200

    def btn_delete(self, b):
        assert self.client.delete(f"/api/v1/buttons/{self.btns[b]}").status_code == 200

    def insert_accept(self, d, b, offset, prompt):
        response = self.client.post(
            f"/api/v1/documents/{self.docs[d]}/inserts",
            json={"block_id": self.blocks[(d, b)], "offset": offset,
                  "prompt_text": prompt})
        insert_id = sse_events(response.text)[-1][1]["insert_id"]
        self._post(f"/api/v1/inserts/{insert_id}/resolve", {"action": "accept"})


def test_cli_api_differential(tmp_path):
    """The same 30-command script through the CLI and through HTTP leaves
    byte-identical workspace files (ids and clock pinned for the replay)."""
    with criterion("CLI/API differential, 30 commands"):
        assert len(DIFFERENTIAL_SCRIPT) == 30
        try:
            ids.configure(seed=424242)
            cli_ws = tmp_path / "cli.json"
            recorder = CliRecorder(cli_ws, tmp_path)
            for step in DIFFERENTIAL_SCRIPT:
                recorder.run(step)

            ids.configure(seed=424242)
            api_ws = tmp_path / "api.json"
            api_recorder = ApiRecorder(api_ws, tmp_path)
            for step in DIFFERENTIAL_SCRIPT:
                api_recorder.run(step)
        finally:
            ids.configure(None)

        cli_bytes = cli_ws.read_bytes()
        api_bytes = api_ws.read_bytes()
        assert cli_bytes, "CLI produced no workspace file"
        assert cli_bytes == api_bytes


HAMMER_PROMPT_TEXTS = ["alpha", "beta", "gamma", "delta"]


def test_concurrency_hammer(tmp_path):
    """8 concurrent clients, ~500 mixed mutations on one document; the final
    state must equal a sequential replay of the observed commit order."""
    with criterion("concurrency hammer, 8 clients x mixed mutations"):
        path = tmp_path / "ws.json"
        engine = make_engine(path)
        app = create_app(engine)
        setup = TestClient(app)
        text = "aaaa bbbb cccc dddd\neeee ffff gggg hhhh\niiii jjjj kkkk llll"
        doc = setup.post("/api/v1/documents",
                         json={"title": "hammer", "text": text}).json()["document"]
        doc_id = doc["id"]
        block_ids = [b["id"] for b in doc["blocks"]]
        comp_ids = []
        committed = []  # (revision, op, args)
        initial_vars = {}
        for i, block_id in enumerate(block_ids):
            payload = setup.post(f"/api/v1/documents/{doc_id}/components",
                                 json={"block_id": block_id,
                                       "start": 0, "end": 4}).json()
            comp_ids.append(payload["component_id"])
            committed.append((payload["revision"], "create_component",
                              (block_id, 0, 4, payload["component_id"],
                               payload["variation_id"])))
            initial_vars[payload["component_id"]] = payload["variation_id"]

        base_url = f"/api/v1/documents/{doc_id}"
        per_thread = 63
        errors = []
        lock = threading.Lock()

        def worker(thread_no: int):
            rng = random.Random(9000 + thread_no)
            client = TestClient(app)
            my_vars = {cid: [initial_vars[cid]] for cid in comp_ids}
            try:
                for op_no in range(per_thread):
                    cid = rng.choice(comp_ids)
                    choice = rng.random()
                    if choice < 0.35:
                        text_arg = f"t{thread_no}.{op_no}"
                        response = client.post(
                            f"{base_url}/components/{cid}/variations",
                            json={"text": text_arg})
                        payload = response.json()
                        with lock:
                            committed.append((payload["revision"], "add",
                                              (cid, text_arg, payload["variation_id"])))
                        my_vars[cid].append(payload["variation_id"])
                    elif choice < 0.55:
                        vid = rng.choice(my_vars[cid])
                        response = client.patch(
                            f"{base_url}/components/{cid}/variations/{vid}",
                            json={"selected": True})
                        if response.status_code == 200:
                            with lock:
                                committed.append((response.json()["revision"],
                                                  "select", (cid, vid)))
                    elif choice < 0.7:
                        vid = rng.choice(my_vars[cid])
                        new_text = f"e{thread_no}.{op_no}"
                        response = client.patch(
                            f"{base_url}/components/{cid}/variations/{vid}",
                            json={"text": new_text})
                        if response.status_code == 200:
                            with lock:
                                committed.append((response.json()["revision"],
                                                  "edit", (cid, vid, new_text)))
                    elif choice < 0.85:
                        vid = rng.choice(my_vars[cid])
                        response = client.post(
                            f"{base_url}/components/{cid}/variations/{vid}/clone")
                        if response.status_code == 201:
                            payload = response.json()
                            with lock:
                                committed.append((payload["revision"], "clone",
                                                  (cid, vid, payload["variation_id"])))
                            my_vars[cid].append(payload["variation_id"])
                    else:
                        block_id = rng.choice(block_ids)
                        text_arg = f"i{thread_no}."
                        response = client.post(
                            f"{base_url}/blocks/{block_id}/text",
                            json={"offset": 0, "text": text_arg})
                        if response.status_code == 200:
                            with lock:
                                committed.append((response.json()["revision"],
                                                  "insert", (block_id, 0, text_arg)))
            except Exception as exc:  # surface thread failures in the main test
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors, errors
        assert len(committed) >= 500

        # replay in commit order on the naive reference
        ref = RefModel.from_text(text, block_ids)
        select_errors = 0
        for _, op, args in sorted(committed, key=lambda item: item[0]):
            if op == "create_component":
                ref.create_component(*args)
            elif op == "add":
                cid, text_arg, vid = args
                ref.add_variation(cid, text_arg, vid)
            elif op == "select":
                ref.select_variation(*args)
            elif op == "edit":
                cid, vid, new_text = args
                ref.edit_variation(cid, vid, new_text)
            elif op == "clone":
                ref.clone_variation(*args)
            elif op == "insert":
                ref.insert_text(*args)

        final_flat = setup.get(f"{base_url}/flatten").text
        assert final_flat == ref.flatten()
        final_doc = store.load(path).document(doc_id)  # load() re-validates
        final_doc.validate()
        assert final_doc.flatten() == ref.flatten()
        assert real_listing(final_doc) == ref.listing()
