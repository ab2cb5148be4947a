import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("RIPE_CLI") or shutil.which("ripe")
    if not path:
        pytest.skip("ripe command-line tool not available")
    return path


@pytest.fixture(scope="session")
def schema():
    import json

    return json.loads((ROOT / "schema" / "result.schema.json").read_text())


@pytest.fixture(scope="session")
def root():
    return ROOT
