from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from popcrit import Correspondence, Instance, parse_instance

DATA = Path(__file__).parent / "data"


def load_instance(name: str) -> Instance:
    return parse_instance((DATA / name).read_text())


def all_correspondences(inst, first, second):
    """Every correspondence usable in delta(first, second, corr)."""
    per_vertex = []
    for v in inst.all_vertices():
        xs = sorted(first.partners(v) - second.partners(v))
        ys = sorted(second.partners(v) - first.partners(v))
        size = max(len(xs), len(ys))
        if size == 0:
            continue
        rows = list(xs) + [None] * (size - len(xs))
        cols = list(ys) + [None] * (size - len(ys))
        options = list(
            dict.fromkeys(
                tuple(zip(rows, perm)) for perm in itertools.permutations(cols)
            )
        )
        per_vertex.append((v, options))
    vertices = [v for v, _ in per_vertex]
    for combo in itertools.product(*(opts for _, opts in per_vertex)):
        yield Correspondence(dict(zip(vertices, combo)))


@pytest.fixture(scope="session")
def short_supply() -> Instance:
    return load_instance("short_supply.inst")


@pytest.fixture(scope="session")
def capacity_switch() -> Instance:
    return load_instance("capacity_switch.inst")


@pytest.fixture(scope="session")
def one_post() -> Instance:
    return load_instance("one_post.inst")
