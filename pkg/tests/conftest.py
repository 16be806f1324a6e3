import numpy as np
import pytest

from slotmini import dataset
from slotmini.models import MinMaxScaler, SurrogateSuite


def _split(noise):
    recs = dataset.generate_synthetic(dataset.SynthConfig(n_samples=936, noise_std=noise, alpha=0.05, seed=1))
    return dataset.split(recs, 1)


@pytest.fixture(scope="session")
def noiseless_split():
    return _split(0.0)


@pytest.fixture(scope="session")
def noisy_split():
    return _split(0.02)


@pytest.fixture(scope="session")
def noiseless_scaled(noiseless_split):
    X = dataset.features(noiseless_split.train)
    y = dataset.targets(noiseless_split.train)
    scaler = MinMaxScaler.fit(X)
    return scaler.transform(X), y


@pytest.fixture(scope="session")
def noiseless_suite(noiseless_split):
    sp = noiseless_split
    return SurrogateSuite.fit(dataset.features(sp.train), dataset.targets(sp.train))


@pytest.fixture(scope="session")
def noisy_suite(noisy_split):
    sp = noisy_split
    return SurrogateSuite.fit(dataset.features(sp.train), dataset.targets(sp.train))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


_criteria = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(crit, "PASS")
        _criteria[crit] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_criteria.items()):
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
