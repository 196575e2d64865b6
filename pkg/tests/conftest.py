import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--full", action="store_true", default=False,
        help="extend the exact-mode accuracy table to large registers (slow)",
    )


@pytest.fixture
def full_mode(request):
    return request.config.getoption("--full")
