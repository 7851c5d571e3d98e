from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # test helpers (_synth, oracles)

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture()
def tiny_corpus():
    from tarjim.records import Origin, ParallelPair

    return [
        ParallelPair(id="a1", ar="مرحبا بالعالم اليوم", en="hello world today",
                     origin=Origin.ENGLISH, domain="general"),
        ParallelPair(id="a2", ar="الترجمة فن قديم جدا", en="translation is a very old art",
                     origin=Origin.ARABIC, domain="cultural",
                     meta={"source": "unit-test"}),
        ParallelPair(id="a3", ar="العلم نور والجهل ظلام", en="science is light and ignorance is darkness",
                     origin=Origin.ARABIC),
    ]
