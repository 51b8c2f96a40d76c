import pytest
from importlib import resources

from mallsim.semantic_map import load_map
from mallsim.svp import OccupancyGrid


@pytest.fixture(scope="session")
def minimall():
    doc = (resources.files("mallsim") / "data" / "maps" / "minimall.json").read_text(encoding="utf-8")
    return load_map(doc)


@pytest.fixture(scope="session")
def minimall_doc():
    return (resources.files("mallsim") / "data" / "maps" / "minimall.json").read_text(encoding="utf-8")


@pytest.fixture()
def square_grid(minimall):
    return OccupancyGrid.from_region(minimall.regions["square"])
