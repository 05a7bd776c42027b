import numpy as np
import pytest

from heisenberg_bmo.group import GroupDimension


@pytest.fixture(params=[1, 2], ids=["n1", "n2"])
def dim(request):
    return GroupDimension(request.param)


@pytest.fixture
def dim1():
    return GroupDimension(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``criterion(k, title, ok, detail)`` records one acceptance line."""
    store = request.config.stash.setdefault(CRITERIA, {})

    def log(k, title, ok, detail=""):
        line = f"criterion {k:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        store[k] = line
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(CRITERIA, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for k in sorted(store):
            terminalreporter.write_line(store[k])
