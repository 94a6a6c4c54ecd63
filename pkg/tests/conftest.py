import numpy as np
import pytest

from bosonkit import dft_unitary, haar_random_unitary
from bosonkit.interferometer import balanced_beam_splitter

# criterion -> list of (passed, detail); filled by the `acceptance` fixture
_ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


class AcceptanceRecorder:
    def __init__(self, name: str):
        self.name = name
        _ACCEPTANCE.setdefault(name, [])

    def check(self, ok: bool, detail: str) -> None:
        _ACCEPTANCE[self.name].append((bool(ok), detail))
        assert ok, f"{self.name}: {detail}"


@pytest.fixture
def acceptance(request):
    marker = request.node.get_closest_marker("criterion")
    name = marker.args[0] if marker else request.node.name
    return AcceptanceRecorder(name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0])):
        checks = _ACCEPTANCE[name]
        ok = bool(checks) and all(c for c, _ in checks)
        failed = [d for c, d in checks if not c]
        detail = failed[0] if failed else (checks[-1][1] if checks else "not run")
        passed = sum(c for c, _ in checks)
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {name} [{passed}/{len(checks)} checks]: {detail}"
        )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hom():
    return balanced_beam_splitter()


@pytest.fixture
def dft3():
    return dft_unitary(3)


@pytest.fixture
def haar4():
    return haar_random_unitary(4, seed=7)
