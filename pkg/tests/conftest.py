import time

import pytest

from helpunits.orchestrator import HAS_NONTRIVIAL, REALIZED_TRIVIALLY, run_all
from helpunits.tables import bundled_tables


@pytest.fixture(scope="session")
def tables():
    return bundled_tables()


@pytest.fixture(scope="session")
def ordinary(tables):
    return tables[0]


@pytest.fixture(scope="session")
def full_run(tables):
    """Default run over every candidate order, with its wall-clock time."""
    start = time.perf_counter()
    verdicts = run_all(tables)
    return verdicts, time.perf_counter() - start


@pytest.fixture(scope="session")
def verdicts(full_run):
    return full_run[0]


@pytest.fixture(scope="session")
def admitted(verdicts):
    return {k: v.admitted() for k, v in verdicts.items()
            if v.status in (HAS_NONTRIVIAL, REALIZED_TRIVIALLY)}
