import copy
import json
import os
import random
from datetime import datetime, timezone

import pytest

from abscribe import ids, store
from abscribe.errors import (
    IntegrityError,
    ParseError,
    StoreIoError,
    UnsupportedVersion,
    WorkspaceLocked,
)
from abscribe.model import (
    Block,
    ComponentRun,
    Document,
    Origin,
    TextRun,
    Variation,
    VariationComponent,
)
from abscribe.registry import ButtonRegistry, PromptButton
from abscribe.store import Workspace, load, save

from oracles import random_origin, random_text


def random_timestamp(rng: random.Random) -> datetime:
    epoch = rng.randrange(1_500_000_000_000, 1_900_000_000_000)
    return datetime.fromtimestamp(epoch / 1000, tz=timezone.utc)


def random_component(rng: random.Random) -> VariationComponent:
    variations = []
    for _ in range(rng.randrange(1, 5)):
        variations.append(Variation(id=ids.new_id(), text=random_text(rng, newlines=True),
                                    origin=random_origin(rng),
                                    created_at=random_timestamp(rng)))
    return VariationComponent(id=ids.new_id(), variations=variations,
                              selected_id=rng.choice(variations).id)


def random_block(rng: random.Random) -> Block:
    runs = []
    for i in range(rng.randrange(0, 5)):
        if i % 2 == 0:
            text = random_text(rng, 20)
            if text:
                runs.append(TextRun(text))
            elif rng.random() < 0.5 and runs:
                break
        else:
            runs.append(ComponentRun(random_component(rng)))
    # enforce normal form: merge/drop handled by construction, empty block rule here
    normalized = []
    for run in runs:
        if isinstance(run, TextRun) and normalized and isinstance(normalized[-1], TextRun):
            normalized[-1] = TextRun(normalized[-1].text + run.text)
        else:
            normalized.append(run)
    if not normalized:
        normalized = [TextRun("")]
    return Block(id=ids.new_id(), runs=normalized)


def random_document(rng: random.Random) -> Document:
    return Document(id=ids.new_id(), title=random_text(rng, 18),
                    blocks=[random_block(rng) for _ in range(rng.randrange(0, 6))],
                    created_at=random_timestamp(rng),
                    updated_at=random_timestamp(rng))


def random_button(rng: random.Random) -> PromptButton:
    prompt = (random_text(rng, 60) or "do something").strip() or "do something"
    label = (random_text(rng, 20).strip() or "Label")[:32]
    return PromptButton(id=ids.new_id(), label=label, prompt_text=prompt,
                        created_at=random_timestamp(rng),
                        use_count=rng.randrange(0, 9))


def random_workspace(rng: random.Random) -> Workspace:
    ws = Workspace(
        documents=[random_document(rng) for _ in range(rng.randrange(0, 4))],
        registry=ButtonRegistry(buttons=[random_button(rng)
                                         for _ in range(rng.randrange(0, 5))]))
    ws.validate()
    return ws


class TestRoundTrip:
    def test_simple_round_trip(self, tmp_path):
        rng = random.Random(1)
        ws = random_workspace(rng)
        path = tmp_path / "ws.json"
        save(ws, path)
        assert load(path) == ws

    def test_many_random_workspaces(self, tmp_path):
        rng = random.Random(2024)
        path = tmp_path / "ws.json"
        for i in range(120):
            ws = random_workspace(rng)
            save(ws, path)
            assert load(path) == ws, f"round-trip mismatch at workspace {i}"

    def test_empty_workspace(self, tmp_path):
        path = tmp_path / "ws.json"
        save(Workspace(), path)
        raw = json.loads(path.read_text())
        assert raw == {"format_version": 1, "documents": [], "buttons": []}
        assert load(path) == Workspace()

    def test_timestamps_keep_millisecond_precision(self, tmp_path):
        rng = random.Random(3)
        ws = Workspace(documents=[random_document(rng)])
        path = tmp_path / "ws.json"
        save(ws, path)
        loaded = load(path)
        assert loaded.documents[0].created_at == ws.documents[0].created_at

    def test_field_names_match_schema(self, tmp_path):
        rng = random.Random(8)
        ws = Workspace(documents=[random_document(rng)])
        while not any(isinstance(r, ComponentRun)
                      for d in ws.documents for b in d.blocks for r in b.runs):
            ws = Workspace(documents=[random_document(rng)])
        save(ws, tmp_path / "ws.json")
        raw = json.loads((tmp_path / "ws.json").read_text())
        doc = raw["documents"][0]
        assert set(doc) == {"id", "title", "created_at", "updated_at", "blocks"}
        runs = [r for b in doc["blocks"] for r in b["runs"]]
        comp_runs = [r for r in runs if r["type"] == "component"]
        assert comp_runs, "generator should have produced a component"
        component = comp_runs[0]["component"]
        assert set(component) == {"id", "selected_id", "variations"}
        variation = component["variations"][0]
        assert set(variation) == {"id", "text", "origin", "created_at"}
        assert "kind" in variation["origin"]


class TestLoadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(StoreIoError):
            load(tmp_path / "absent.json")

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "ws.json"
        save(Workspace(), path)
        path.write_text(path.read_text()[:20])
        with pytest.raises(ParseError):
            load(path)

    def test_non_object_top_level(self, tmp_path):
        path = tmp_path / "ws.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ParseError):
            load(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "ws.json"
        save(Workspace(), path)
        raw = json.loads(path.read_text())
        raw["format_version"] = 99
        path.write_text(json.dumps(raw))
        with pytest.raises(UnsupportedVersion) as err:
            load(path)
        assert err.value.found == 99

    def test_selected_id_naming_missing_variation(self, tmp_path):
        rng = random.Random(77)
        doc = random_document(rng)
        while not any(isinstance(r, ComponentRun) for b in doc.blocks for r in b.runs):
            doc = random_document(rng)
        ws = Workspace(documents=[doc])
        path = tmp_path / "ws.json"
        save(ws, path)
        raw = json.loads(path.read_text())
        for block in raw["documents"][0]["blocks"]:
            for run in block["runs"]:
                if run["type"] == "component":
                    run["component"]["selected_id"] = "ghost"
        path.write_text(json.dumps(raw))
        with pytest.raises(IntegrityError):
            load(path)

    def test_adjacent_plain_runs_rejected_not_repaired(self, tmp_path):
        path = tmp_path / "ws.json"
        doc = {"id": "d1", "title": "t",
               "created_at": "2024-01-01T00:00:00.000Z",
               "updated_at": "2024-01-01T00:00:00.000Z",
               "blocks": [{"id": "b1", "runs": [
                   {"type": "text", "text": "a"},
                   {"type": "text", "text": "b"}]}]}
        path.write_text(json.dumps(
            {"format_version": 1, "documents": [doc], "buttons": []}))
        with pytest.raises(IntegrityError):
            load(path)

    def test_missing_field_is_parse_error_with_location(self, tmp_path):
        path = tmp_path / "ws.json"
        path.write_text(json.dumps(
            {"format_version": 1, "documents": [{"id": "d"}], "buttons": []}))
        with pytest.raises(ParseError) as err:
            load(path)
        assert "documents[0]" in err.value.location

    def test_unknown_run_type(self, tmp_path):
        path = tmp_path / "ws.json"
        doc = {"id": "d1", "title": "t",
               "created_at": "2024-01-01T00:00:00.000Z",
               "updated_at": "2024-01-01T00:00:00.000Z",
               "blocks": [{"id": "b1", "runs": [{"type": "image", "href": "x"}]}]}
        path.write_text(json.dumps(
            {"format_version": 1, "documents": [doc], "buttons": []}))
        with pytest.raises(ParseError):
            load(path)

    def test_bad_label_rejected(self, tmp_path):
        path = tmp_path / "ws.json"
        button = {"id": "b", "label": "x" * 60, "prompt_text": "p",
                  "created_at": "2024-01-01T00:00:00.000Z", "use_count": 0}
        path.write_text(json.dumps(
            {"format_version": 1, "documents": [], "buttons": [button]}))
        with pytest.raises(IntegrityError):
            load(path)


class TestAtomicity:
    def test_failed_write_leaves_original_intact(self, tmp_path, monkeypatch):
        path = tmp_path / "ws.json"
        rng = random.Random(5)
        original = random_workspace(rng)
        save(original, path)

        def exploding_replace(src, dst):
            raise OSError("disk detached")

        monkeypatch.setattr(os, "replace", exploding_replace)
        with pytest.raises(StoreIoError):
            save(random_workspace(rng), path)
        monkeypatch.undo()
        assert load(path) == original
        leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
        assert leftovers == []

    def test_failed_fsync_cleans_temp(self, tmp_path, monkeypatch):
        path = tmp_path / "ws.json"
        save(Workspace(), path)
        before = path.read_bytes()

        def exploding_fsync(fd):
            raise OSError("no space left")

        monkeypatch.setattr(os, "fsync", exploding_fsync)
        with pytest.raises(StoreIoError):
            save(random_workspace(random.Random(6)), path)
        monkeypatch.undo()
        assert path.read_bytes() == before

    def test_save_to_unwritable_path(self, tmp_path):
        target = tmp_path / "dir"
        target.mkdir()
        with pytest.raises(StoreIoError):
            save(Workspace(), target)  # path is a directory


class TestLock:
    def test_lock_blocks_second_holder(self, tmp_path):
        path = tmp_path / "ws.json"
        with store.workspace_lock(path):
            with pytest.raises(WorkspaceLocked):
                with store.workspace_lock(path, timeout=0.05):
                    pass

    def test_lock_released_after_use(self, tmp_path):
        path = tmp_path / "ws.json"
        with store.workspace_lock(path):
            pass
        with store.workspace_lock(path, timeout=0.05):
            pass


def test_deep_copy_equality_semantics():
    ws = random_workspace(random.Random(11))
    assert copy.deepcopy(ws) == ws
