import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"

# Make sibling helper modules (oracles, docgen) importable from any test.
sys.path.insert(0, str(TESTS_DIR))

from flexdoc.bundle import parse_document  # noqa: E402


@pytest.fixture(scope="session")
def news_bytes() -> bytes:
    return (FIXTURES / "news" / "doc.json").read_bytes()


@pytest.fixture(scope="session")
def news_doc(news_bytes):
    return parse_document(news_bytes)


@pytest.fixture(scope="session")
def news_dir() -> Path:
    return FIXTURES / "news"
