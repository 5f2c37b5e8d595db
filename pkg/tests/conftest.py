"""Shared frames and models."""

import json

import pytest

from src.frame import KripkeFrame, TwoFrame, product
from src.semantics import Model


@pytest.fixture
def d2() -> TwoFrame:
    """Two-point chain x < y inside one E-cluster (a dirty cluster)."""
    return TwoFrame.from_pairs(["x", "y"], [("x", "x"), ("x", "y"), ("y", "y")], [("x", "y")])


@pytest.fixture
def sm4() -> TwoFrame:
    return TwoFrame.from_clusters(
        ["a", "b", "c", "d"],
        [("a", "a"), ("b", "b"), ("c", "c"), ("d", "d"), ("a", "d"), ("b", "c")],
        [["a", "b"], ["c", "d"]],
    )


@pytest.fixture
def com_r_model() -> Model:
    """An MGrz model refuting com_r at x; it does not satisfy right commutativity."""
    frame = TwoFrame.from_clusters(
        ["x", "y", "z"],
        [("x", "x"), ("y", "y"), ("z", "z"), ("x", "y")],
        [["x"], ["y", "z"]],
    )
    return Model(frame, {"p": {"z"}})


@pytest.fixture
def chain2() -> KripkeFrame:
    return KripkeFrame.from_pairs(["0", "1"], [("0", "0"), ("0", "1"), ("1", "1")])


@pytest.fixture
def strict_chain2() -> KripkeFrame:
    return KripkeFrame.from_pairs(["0", "1"], [("0", "1")])


@pytest.fixture
def ab_cluster() -> KripkeFrame:
    return KripkeFrame.from_pairs(["a", "b"], [(u, v) for u in "ab" for v in "ab"])


@pytest.fixture
def grz_product(chain2, ab_cluster) -> TwoFrame:
    """Worlds (0,a), (0,b), (1,a), (1,b)."""
    return product(chain2, ab_cluster)


@pytest.fixture
def gl_product(strict_chain2, ab_cluster) -> TwoFrame:
    return product(strict_chain2, ab_cluster)


@pytest.fixture
def write_json(tmp_path):
    def write(name: str, payload) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write
