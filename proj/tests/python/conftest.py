import os
import pathlib

import pytest


@pytest.fixture(scope="session")
def source_dir():
    env = os.environ.get("PADKIT_SOURCE_DIR")
    return pathlib.Path(env) if env else pathlib.Path(__file__).resolve().parents[2]
