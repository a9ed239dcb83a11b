import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from forgescan.synth import build_corpus  # noqa: E402

CORPUS_SEED = 42
CORPUS_N = 100


@pytest.fixture(scope="session")
def default_corpus(tmp_path_factory):
    """The 100-forgery / 100-control corpus every corpus-level check shares."""
    out = tmp_path_factory.mktemp("corpus")
    return build_corpus(out, n=CORPUS_N, seed=CORPUS_SEED, jobs=8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
