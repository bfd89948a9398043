import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
TESTS = ROOT / "tests"
WALK = ROOT / "walkthroughs"
GOLDEN = TESTS / "golden"
sys.path.insert(0, str(TESTS))

from corealm import library  # noqa: E402
from corealm.alm.parser import parse_system_description  # noqa: E402
from corealm.reasoning import History  # noqa: E402

DATA = Path(library.__file__).parent / "data" / "corealm"


@pytest.fixture(scope="session")
def lib():
    return library.load(DATA)


def load_sd(name: str, lib=None, include_optional: bool = False):
    sd = parse_system_description((WALK / name).read_text(), name)
    return library.resolve_imports(sd, lib or library.load(DATA), include_optional)


def load_history(name: str) -> History:
    return History.parse((WALK / name).read_text())


@pytest.fixture(scope="session")
def wrestler(lib):
    return load_sd("wrestler.alm", lib)


@pytest.fixture(scope="session")
def wrestler_ext(lib):
    return load_sd("wrestler_ext.alm", lib)
