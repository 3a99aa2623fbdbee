import random

import pytest

from reachproof import Ars, builtin_peterson, canon, expand, parse_ars

A1_TEXT = """\
# four objects, two of them stuck
states a b c d
trans a b
trans a d
trans b a
trans b c
"""


@pytest.fixture
def a1() -> Ars:
    return parse_ars(A1_TEXT)


@pytest.fixture(scope="session")
def peterson():
    return expand(builtin_peterson())


def random_ars(rng: random.Random, max_states: int = 8) -> Ars:
    """Random system: up to `max_states` objects, 0..2 edges per object."""
    n = rng.randint(1, max_states)
    density = rng.uniform(0.0, 2.0)
    m = int(density * n)
    labels = [f"s{i}" for i in range(n)]
    edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(m)]
    return Ars(labels, edges)


def random_subset(rng: random.Random, n: int):
    bias = rng.choice([0.2, 0.5])
    return canon(i for i in range(n) if rng.random() < bias)
