import pytest


def pytest_addoption(parser):
    parser.addoption("--full", action="store_true", default=False,
                     help="include the finest h of the torus convergence study")


@pytest.fixture
def full(request):
    return request.config.getoption("--full")
