"""Shared fixtures: access to the bundled specification corpus."""

from importlib import resources
from pathlib import Path

import pytest

from grafcet_lint import load_spec


def corpus_path(name: str) -> Path:
    return Path(resources.files("grafcet_lint") / "corpus" / name)


@pytest.fixture
def corpus():
    return corpus_path


@pytest.fixture
def load_fixture():
    def load(name: str):
        return load_spec(corpus_path(name))

    return load
