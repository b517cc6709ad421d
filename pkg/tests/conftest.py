"""Shared fixtures: a hermetic BCH disk cache and memoized prepared contexts."""

from __future__ import annotations

import os

import pytest

from sigkit.logsig_engine import prepare


@pytest.fixture(scope="session", autouse=True)
def bch_cache_file(tmp_path_factory):
    """Point the BCH disk cache at a session-temporary file.

    Keeps the tests from touching (or depending on) the user cache directory.
    """
    path = tmp_path_factory.mktemp("bch") / "bch-lyndon.txt"
    old = os.environ.get("SIGKIT_BCH_CACHE")
    os.environ["SIGKIT_BCH_CACHE"] = str(path)
    yield str(path)
    if old is None:
        os.environ.pop("SIGKIT_BCH_CACHE", None)
    else:
        os.environ["SIGKIT_BCH_CACHE"] = old


@pytest.fixture(scope="session")
def ctx_cache():
    """Memoizing wrapper around prepare(); contexts are immutable, sharing is safe."""
    cache = {}

    def get(d: int, m: int, kind: str = "lyndon", methods: str = "S"):
        key = (d, m, kind, frozenset(methods.upper()))
        if key not in cache:
            cache[key] = prepare(d, m, kind, methods)
        return cache[key]

    return get
