from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from repo_fixture import build_fixture_repo  # noqa: E402


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory) -> dict:
    root = tmp_path_factory.mktemp("fixture-repo")
    return build_fixture_repo(root)


@pytest.fixture()
def motivating():
    from helpers import make_motivating

    return make_motivating()
