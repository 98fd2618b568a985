from __future__ import annotations

import numpy as np
import pytest

from riforest.builder import build_forest
from riforest.datasets import make_annulus
from riforest.model import Dataset, RiForestParams

# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def compiled_kernel():
    """Build one tiny forest so JIT compilation is not charged to any timed test."""
    build_forest(Dataset(np.random.default_rng(0).normal(size=(40, 2))), RiForestParams(num_trees=1))


@pytest.fixture(scope="session")
def annulus() -> Dataset:
    return make_annulus(seed=0)


@pytest.fixture(scope="session")
def small_forest(annulus):
    return build_forest(annulus, RiForestParams(num_trees=20, master_seed=3))
