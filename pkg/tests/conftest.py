"""Shared test fixtures: synthetic calls, vectors, and trained taggers."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import _synth  # noqa: E402
from callsum.punct import save_tagger, train_tagger  # noqa: E402
from callsum.vectors import load_vectors  # noqa: E402

RESOURCES = Path(__file__).parent.parent / "src" / "callsum" / "resources"
PUNCT_FIXTURE = RESOURCES / "punct_fixture.txt"


@pytest.fixture(scope="session")
def punct_fixture_path() -> Path:
    return PUNCT_FIXTURE


@pytest.fixture(scope="session")
def tagger_fast():
    """Cheap tagger for pipeline plumbing tests (2 epochs)."""
    return train_tagger(str(PUNCT_FIXTURE), epochs=2, seed=42)


@pytest.fixture(scope="session")
def tagger_file(tagger_fast, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("tagger") / "tagger.bin"
    save_tagger(tagger_fast, path)
    return path


@pytest.fixture(scope="session")
def vector_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("vectors") / "vecs.txt"
    return _synth.write_vector_file(path)


@pytest.fixture(scope="session")
def vector_store(vector_file):
    return load_vectors(vector_file)


@pytest.fixture(scope="session")
def calls_small_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("calls") / "calls_small.jsonl"
    return _synth.write_calls(_synth.make_calls(12, seed=7), path)


@pytest.fixture(scope="session")
def calls_50_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("calls") / "calls_50.jsonl"
    return _synth.write_calls(_synth.make_calls(50, seed=11, n_exchanges=8), path)
