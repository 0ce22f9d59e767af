import pathlib

import pytest

import support

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def gamma_ex():
    return support.gamma_ex()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def example2_path():
    return FIXTURES / "example2.rules"


@pytest.fixture
def example4_path():
    return FIXTURES / "example4.rules"
