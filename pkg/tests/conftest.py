"""Shared fixtures: reference graphs and a generator of random admissible graphs."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from eikonal_canon import MetricGraph

F = Fraction


@pytest.fixture
def interval():
    """Unit interval: two boundary vertices joined by one edge."""
    return MetricGraph([("e0", ("a", "b"), 1)], boundary=["a", "b"])


@pytest.fixture
def star3():
    """Unit 3-star: center c, tips g1, g2, g3."""
    return MetricGraph(
        [("e1", ("g1", "c"), 1), ("e2", ("c", "g2"), 1), ("e3", ("c", "g3"), 1)],
        boundary=["g1", "g2", "g3"],
    )


@pytest.fixture
def star123():
    """3-star with edge lengths 1, 2, 3 (tips g1, g2, g3)."""
    return MetricGraph(
        [("e1", ("g1", "c"), 1), ("e2", ("c", "g2"), 2), ("e3", ("c", "g3"), 3)],
        boundary=["g1", "g2", "g3"],
    )


def bump(a: float, b: float):
    """Smooth compactly supported bump on (a, b), peak value 1."""
    mid, half = (a + b) / 2, (b - a) / 2

    def phi(t: float) -> float:
        u = (t - mid) / half
        if abs(u) >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - u * u))

    return phi


def random_length(rng: random.Random, max_den: int = 12,
                  den: int | None = None) -> Fraction:
    """Length in [1/2, 3] with denominator <= max_den."""
    if den is None:
        den = rng.randint(1, max_den)
    num = rng.randint((den + 1) // 2, 3 * den)
    return F(num, den)


def random_admissible_graph(rng: random.Random, max_edges: int = 6,
                            common_denominator: bool = True) -> MetricGraph:
    """Random connected graph with boundary valence 1 and interior valence >= 3.

    With common_denominator all lengths share one denominator <= 12, which
    keeps lattice closures small (reflections then compose into translations
    on a coarse rational grid; mixed denominators make the closure size blow
    up with the lcm, which is valid but not desk-scale).
    """
    shape = rng.choice(["edge", "star", "tree", "triangle"])
    edges: list[tuple[str, tuple[str, str], Fraction]] = []
    den = rng.randint(1, 12) if common_denominator else None

    def add(u: str, v: str) -> None:
        edges.append((f"e{len(edges)}", (u, v), random_length(rng, den=den)))

    if shape == "edge":
        add("b0", "b1")
        boundary = {"b0", "b1"}
    elif shape == "star":
        n = rng.randint(3, min(5, max_edges))
        for i in range(n):
            add("c", f"b{i}")
        boundary = {f"b{i}" for i in range(n)}
    elif shape == "triangle":
        # 3-cycle, every cycle vertex carrying one pendant boundary edge
        for i in range(3):
            add(f"v{i}", f"v{(i + 1) % 3}")
        for i in range(3):
            add(f"v{i}", f"b{i}")
        boundary = {"b0", "b1", "b2"}
    else:
        # tree grown leaf-first: turning a leaf interior needs two new leaves
        add("c", "b0")
        add("c", "b1")
        add("c", "b2")
        boundary = {"b0", "b1", "b2"}
        while len(edges) + 2 <= max_edges and rng.random() < 0.6:
            leaf = rng.choice(sorted(boundary))
            boundary.discard(leaf)
            for _ in range(2):
                name = f"b{len(edges)}"
                add(leaf, name)
                boundary.add(name)
    return MetricGraph(edges, boundary=boundary)
