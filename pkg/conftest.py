"""Shared pytest fixtures: small groups and seeded randomness"""

import random

import pytest

from group_core import GroupSpec, make_group, symmetric_group


@pytest.fixture
def cyclic():
    """Factory for cyclic groups"""

    def build(n: int):
        return make_group(GroupSpec(kind="cyclic", param=n))

    return build


@pytest.fixture
def integers():
    return make_group(GroupSpec(kind="free-abelian", param=1))


@pytest.fixture
def lattice2():
    return make_group(GroupSpec(kind="free-abelian", param=2))


@pytest.fixture
def heisenberg():
    return make_group(GroupSpec(kind="heisenberg-Z"))


@pytest.fixture
def free2():
    return make_group(GroupSpec(kind="free-group", param=2))


@pytest.fixture
def s4():
    return make_group(symmetric_group(4))


@pytest.fixture
def rng():
    return random.Random(0)


@pytest.fixture
def fixtures_file(tmp_path):
    """Empty versioned fixtures file in a temporary directory"""
    path = tmp_path / "regression.json"
    path.write_text('{"entries": {}, "version": 1}\n', encoding="utf-8")
    return str(path)
