"""Shared generators and independent test oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from postqubo import EdgeRef, Graph, ProblemSpec, is_strongly_connected, odd_degree_vertices


def figure_example_graph() -> Graph:
    """Six-vertex undirected example used across the golden tests."""
    return Graph.build(
        range(6),
        undirected=[(3, 2, 5), (2, 1, 1), (1, 0, 1), (0, 5, 2), (5, 4, 5), (4, 2, 5)]
        + [(5, 2, 4)],
    )


def random_connected_undirected(
    rng: np.random.Generator,
    n_vertices: int,
    extra_edges: int,
    max_weight: int = 9,
) -> Graph:
    """Random connected undirected graph with integer symmetric weights."""
    vertices = list(range(n_vertices))
    perm = list(rng.permutation(n_vertices))
    edges = set()
    for a, b in zip(perm, perm[1:]):  # random spanning tree keeps it connected
        edges.add((min(a, b), max(a, b)))
    pool = [
        (a, b)
        for a in vertices
        for b in vertices
        if a < b and (a, b) not in edges
    ]
    rng.shuffle(pool)
    for pair in pool[:extra_edges]:
        edges.add(pair)
    weighted = [(a, b, int(rng.integers(1, max_weight + 1))) for a, b in sorted(edges)]
    return Graph.build(vertices, undirected=weighted)


def random_graph_with_odd_count(
    rng: np.random.Generator, odd_count: int, max_weight: int = 9
) -> Graph:
    """Connected undirected graph with exactly `odd_count` odd vertices."""
    while True:
        n = odd_count + int(rng.integers(0, 4))
        if n < 3:
            n = 3
        extra = int(rng.integers(0, n))
        g = random_connected_undirected(rng, n, extra, max_weight)
        if len(odd_degree_vertices(g)) == odd_count:
            return g


def random_mixed_graph(
    rng: np.random.Generator,
    n_vertices: int,
    n_edges: int,
    windy: bool,
    directed_frac: float,
    max_weight: int = 9,
) -> Graph | None:
    """Random strongly connected mixed graph, or None if the draw fails."""
    pairs = [
        (a, b) for a in range(n_vertices) for b in range(n_vertices) if a < b
    ]
    rng.shuffle(pairs)
    undirected, directed = [], []
    for a, b in pairs[:n_edges]:
        if rng.random() < directed_frac:
            if rng.random() < 0.5:
                a, b = b, a
            directed.append((a, b, int(rng.integers(1, max_weight + 1))))
        elif windy and rng.random() < 0.7:
            undirected.append(
                (a, b, int(rng.integers(1, max_weight + 1)), int(rng.integers(1, max_weight + 1)))
            )
        else:
            undirected.append((a, b, int(rng.integers(1, max_weight + 1))))
    if len(undirected) + len(directed) < n_edges:
        return None
    g = Graph.build(range(n_vertices), undirected=undirected, directed=directed)
    return g if is_strongly_connected(g) else None


def floyd_warshall(g: Graph) -> dict[tuple[int, int], float]:
    """Independent all-pairs reference (different algorithm family)."""
    vs = sorted(g.vertices)
    dist = {(a, b): (0.0 if a == b else float("inf")) for a in vs for b in vs}
    for arc in g.arcs():
        dist[(arc.tail, arc.head)] = min(dist[(arc.tail, arc.head)], arc.weight)
    for k in vs:
        for i in vs:
            for j in vs:
                via = dist[(i, k)] + dist[(k, j)]
                if via < dist[(i, j)]:
                    dist[(i, j)] = via
    return dist


def naive_energy(q, x) -> float:
    total = q.offset
    for i, c in q.linear.items():
        total += c * x[i]
    for (i, j), c in q.quadratic.items():
        total += c * x[i] * x[j]
    return total


def all_pairings(items: list[int]):
    """Every perfect pairing of an even-sized list."""
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1 :]
        for sub in all_pairings(rest):
            yield [(first, items[k])] + sub


def bits_from_index(index: int, n: int) -> list[int]:
    return [(index >> j) & 1 for j in range(n)]


@pytest.fixture
def figure_graph() -> Graph:
    return figure_example_graph()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
