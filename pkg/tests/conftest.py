from __future__ import annotations

from pathlib import Path

import pytest

from tagtour.ingest import PhotoCorpus, load_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def micro_corpus() -> PhotoCorpus:
    return load_corpus(DATA_DIR / "micro_manifest.json")


@pytest.fixture(scope="session")
def animal_corpus() -> PhotoCorpus:
    return load_corpus(DATA_DIR / "animal_manifest.json")


@pytest.fixture(scope="session")
def provider_dir() -> Path:
    return DATA_DIR / "providers"
