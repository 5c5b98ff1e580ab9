from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from abscribe.engine import WorkspaceEngine
from abscribe.llm import Gateway, ModelConfig
from abscribe.service import create_app
from abscribe.store import Workspace

LETTER = ("Subject: Introduction\n"
          "Dear Prof. Bardley, I am writing to introduce myself.\n"
          "Best regards, Sam\n")


def make_engine(path=None, backend=None) -> WorkspaceEngine:
    gateway = Gateway(ModelConfig(backend="mock"), backend=backend)
    return WorkspaceEngine(Workspace(), path, gateway)


@pytest.fixture
def engine(tmp_path) -> WorkspaceEngine:
    return make_engine(tmp_path / "ws.json")


@pytest.fixture
def client(engine) -> TestClient:
    return TestClient(create_app(engine))
