"""
Pytest configuration and shared fixtures for all tests.
"""

from typing import List, Tuple

import numpy as np
import pytest

from kackit.fdca import MMAlgebra, TraceState, UnitalEmbedding, markov_trace, standard_embedding
from kackit.wha import (
    Groupoid,
    cyclic_group,
    discrete_groupoid,
    disjoint_union,
    klein_four_group,
    pair_groupoid,
    symmetric_group,
)


@pytest.fixture(autouse=True)
def _clear_tolerance_env(monkeypatch):
    """Tests run at the library default tolerance unless they set KACKIT_TOL themselves."""
    monkeypatch.delenv("KACKIT_TOL", raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def c_in_m2_plus_c() -> UnitalEmbedding:
    """C inside M_2 + C, inclusion matrix (2, 1)^T."""
    return standard_embedding(MMAlgebra((1,)), [[2], [1]])


@pytest.fixture
def c_in_m2_plus_c_markov(c_in_m2_plus_c) -> TraceState:
    return markov_trace(c_in_m2_plus_c).as_trace(c_in_m2_plus_c.target)


def build_groupoid_zoo() -> List[Tuple[str, Groupoid]]:
    """Every groupoid family member with at most six morphisms."""
    zoo = [(f"Z/{n}", cyclic_group(n)) for n in range(1, 7)]
    zoo += [
        ("S3", symmetric_group(3)),
        ("Klein", klein_four_group()),
        ("pair1", pair_groupoid(1)),
        ("pair2", pair_groupoid(2)),
        ("Z/2+pt", disjoint_union(cyclic_group(2), discrete_groupoid(1))),
        ("Z/2+Z/2", disjoint_union(cyclic_group(2), cyclic_group(2))),
        ("Z/3+Z/2", disjoint_union(cyclic_group(3), cyclic_group(2))),
        ("Z/3+Z/3", disjoint_union(cyclic_group(3), cyclic_group(3))),
        ("pair2+pt", disjoint_union(pair_groupoid(2), discrete_groupoid(1))),
        ("pair2+Z/2", disjoint_union(pair_groupoid(2), cyclic_group(2))),
    ]
    zoo += [(f"discrete{n}", discrete_groupoid(n)) for n in range(1, 7)]
    return zoo


GROUPOID_ZOO = build_groupoid_zoo()


@pytest.fixture(params=GROUPOID_ZOO, ids=[name for name, _ in GROUPOID_ZOO])
def zoo_groupoid(request) -> Groupoid:
    return request.param[1]
