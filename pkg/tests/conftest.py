import warnings

import pytest

from bibfactor import normalize_record
from bibfactor.fixture import fixture_table
from bibfactor.verify import run_verification


@pytest.fixture
def five_paper_record():
    return normalize_record("x", [10, 8, 5, 4, 3])


@pytest.fixture(scope="session")
def fixture():
    return fixture_table()


@pytest.fixture(scope="session")
def verification_report():
    # shared across the acceptance criteria; one full deterministic run
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_verification()
