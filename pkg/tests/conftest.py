from pathlib import Path

import numpy as np
import pytest

from liftedpaths.instance import read_instance

DATA = Path(__file__).parent / "data"
ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def t1():
    return read_instance(DATA / "t1.txt")


@pytest.fixture
def t2():
    return read_instance(DATA / "t2.txt")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
