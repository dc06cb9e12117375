# testing/conftest.py
"""
Shared fixtures: golden .dfir files, parse/preprocess/solve helpers
"""

import os
import sys
from pathlib import Path

import pytest

# Add app root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from app.clients import RoArgClient, TaintClient, TaintConfig  # noqa: E402
from app.config import settings  # noqa: E402
from app.core.interproc import solve_module  # noqa: E402
from app.core.preprocess import preprocess_module  # noqa: E402
from app.ir import ensure_valid, parse_module  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixture_path():
    """Absolute path of a file under testing/fixtures"""

    def _path(name: str) -> str:
        return str(FIXTURES / name)

    return _path


@pytest.fixture
def fixture_text():
    def _text(name: str) -> str:
        return (FIXTURES / name).read_text(encoding="utf-8")

    return _text


@pytest.fixture
def parse():
    """Parse and validate .dfir text"""

    def _parse(text: str):
        return ensure_valid(parse_module(text))

    return _parse


@pytest.fixture
def preprocessed(parse):
    """Parse, validate and preprocess .dfir text"""

    def _preprocessed(text: str):
        return preprocess_module(parse(text))

    return _preprocessed


@pytest.fixture
def solve(preprocessed):
    """Preprocess .dfir text and solve it with the named client"""

    def _solve(text: str, client: str = "taint", config: TaintConfig = None):
        m = preprocessed(text)
        analysis = TaintClient(config) if client == "taint" else RoArgClient()
        return m, solve_module(m, analysis)

    return _solve


@pytest.fixture(autouse=True)
def monotonic_checks():
    """Run every test with summary and Ψ monotonicity assertions enabled"""
    previous = settings.check_monotonic
    settings.check_monotonic = True
    yield
    settings.check_monotonic = previous
