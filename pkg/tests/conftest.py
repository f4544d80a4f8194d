from pathlib import Path

import pytest

from tempclust.core import read_event_log

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def cs_log():
    return read_event_log(FIXTURES / "CS.csv")


@pytest.fixture(scope="session")
def rs_log():
    return read_event_log(FIXTURES / "RS.csv")
