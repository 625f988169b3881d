import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def isolated_cache(tmp_path_factory):
    """Keep shell and lift caches out of the user's home directory."""
    path = tmp_path_factory.mktemp("chl-cache")
    old = os.environ.get("CHL_CACHE_DIR")
    os.environ["CHL_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("CHL_CACHE_DIR", None)
    else:
        os.environ["CHL_CACHE_DIR"] = old
