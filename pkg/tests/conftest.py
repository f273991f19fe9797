import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_unitary(m, rng):
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_family(m, count, seed):
    from mubcheck.families import make_family

    rng = np.random.default_rng(seed)
    return make_family(m, [random_unitary(m, rng) for _ in range(count)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, passed, detail)``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(n, passed, detail=""):
        line = f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[n] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
