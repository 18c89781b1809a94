import json
from pathlib import Path

import pytest

from sfmj.cli import load_program

CORPUS = Path(__file__).parent / "corpus"


def fixture_names() -> list[str]:
    return sorted(p.stem for p in CORPUS.glob("*.sfmj"))


def load(name: str):
    path = CORPUS / f"{name}.sfmj"
    return load_program(path.read_text(encoding="utf-8"), str(path))


def expected(name: str) -> dict:
    return json.loads((CORPUS / f"{name}.expected.json").read_text(encoding="utf-8"))


@pytest.fixture
def ct1():
    return load("ct1")[1]


@pytest.fixture
def ct2():
    return load("ct2")[1]
