from pathlib import Path

import numpy as np
import pytest

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "fixtures" / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    assert FIXTURE_DIR.is_dir(), "fixture corpus missing; run scripts/make_fixtures.py"
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def corpus_paths(corpus_dir):
    return sorted(corpus_dir.iterdir(), key=lambda p: p.name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image_matrix(rng, m, n):
    """Natural-image-like matrix: smooth base plus mild noise, 0-255 scale."""
    base = np.outer(np.linspace(40, 200, m), np.linspace(0.5, 1.2, n))
    texture = 25 * rng.standard_normal((m, n))
    return np.clip(base + texture, 0, 255)
