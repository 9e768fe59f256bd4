import random

import pytest

from src.corpus import (
    B346_SOURCE,
    STAR_AC_SOURCE,
    STAR_ELL_SOURCE,
    TWIN_SOURCE,
    chain_source,
    single_vertex_source,
)
from src.graph_core import build_graph, ensure_valid, parse_graph, validate_graph
from src.lattice_engine import fundamental_vector

# --- Configuration ---
RANDOM_GRAPH_SEED = 20240601
RANDOM_GRAPH_COUNT = 200
RANDOM_GRAPH_MAX_VERTICES = 6
RANDOM_GRAPH_MAX_ZF = 4
ORACLE_BOX_CAP = 4096


def load(source):
    g, cycles = parse_graph(source)
    return ensure_valid(g), cycles


def ell_chain(p, m):
    return load(chain_source(p, m))[0]


def hypersurface(d):
    return load(single_vertex_source(f"HY{d}", -d, (d - 1) * (d - 2) // 2))[0]


def single(sq, genus=0):
    return load(single_vertex_source("S", sq, genus))[0]


def random_graph(rng, max_vertices=RANDOM_GRAPH_MAX_VERTICES):
    """Rejection-samples a connected negative definite graph with small Z_f."""
    while True:
        n = rng.randint(1, max_vertices)
        vertices = [(f"V{i}", -rng.randint(1, 4), rng.choice((0, 0, 0, 0, 1, 2))) for i in range(n)]
        edges = {tuple(sorted((rng.randrange(i), i))): 1 for i in range(1, n)}
        if n >= 3 and rng.random() < 0.15:
            a, b = rng.sample(range(n), 2)
            edges.setdefault(tuple(sorted((a, b))), 1)
        if edges and rng.random() < 0.1:
            key = rng.choice(sorted(edges))
            edges[key] = 2
        g = build_graph(vertices, [(f"V{a}", f"V{b}", m) for (a, b), m in sorted(edges.items())], name="R")
        if not validate_graph(g).ok:
            continue
        if max(fundamental_vector(g, range(n))) <= RANDOM_GRAPH_MAX_ZF:
            return g


def generate_random_graphs(seed=RANDOM_GRAPH_SEED, count=RANDOM_GRAPH_COUNT):
    rng = random.Random(seed)
    return [random_graph(rng) for _ in range(count)]


RANDOM_GRAPHS = generate_random_graphs()


def box_points(vec):
    total = 1
    for a in vec:
        total *= a + 1
    return total


@pytest.fixture
def chain3():
    return ell_chain(1, 3)


@pytest.fixture
def b346():
    return load(B346_SOURCE)[0]


@pytest.fixture
def twin():
    return load(TWIN_SOURCE)[0]


@pytest.fixture
def star_ac():
    return load(STAR_AC_SOURCE)


@pytest.fixture
def star_ell():
    return load(STAR_ELL_SOURCE)
