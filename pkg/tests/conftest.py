import pytest

from mcid_hub.core.models import Dataset, make_rng
from mcid_hub.simulation.scenarios import Pers1


@pytest.fixture
def toy():
    """[(1,+1),(2,+1),(0,-1)]"""
    return Dataset([1.0, 2.0, 0.0], [1, 1, -1])


@pytest.fixture
def pers1_train():
    train, _ = Pers1().draw(60, 1, seed=11)
    return train


@pytest.fixture
def rng():
    return make_rng(2024)


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
