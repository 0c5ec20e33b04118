import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sessionforge import parse_context, parse_global, parse_local  # noqa: E402

import corpus  # noqa: E402


@pytest.fixture(scope="session")
def ring():
    return parse_global(corpus.RING)


@pytest.fixture(scope="session")
def ring_ctx0():
    return parse_context(corpus.RING_CTX0)


@pytest.fixture(scope="session")
def local():
    """Parse a local type by corpus name."""
    return lambda name: parse_local(getattr(corpus, name))
