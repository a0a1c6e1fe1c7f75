"""Graph builders, unbounded generator rules, and wired truncation.

Finite builders (:func:`path`, :func:`cycle`, :func:`binary_tree`,
:func:`lattice`, :func:`geometric_line`, :func:`random_network`) return
plain :class:`~netenergy.network.Network` objects.

Unbounded graphs are never materialized.  They are described by a
:class:`GraphGenerator` rule: a nested family of finite level sets
``G_1 subset G_2 subset ...`` covering the vertex set, plus a local
neighbor rule.  :func:`truncate` realizes the wired truncation at level k:
the induced graph on ``G_k`` with every edge leaving ``G_k`` rewired to a
single grounded vertex, parallel conductances summed.  Solvers pin the
ground to potential zero, which is the wired (shorted exterior) boundary
condition.
"""

from __future__ import annotations

import abc
import itertools
from dataclasses import dataclass, field

import numpy as np

from .network import GROUND, Network, NetworkError


class GraphGenerator(abc.ABC):
    """Rule describing a graph one neighborhood at a time."""

    #: Whether the level sets grow without bound.
    unbounded: bool = True
    #: Largest admissible level for bounded generators (None if unbounded).
    max_level: int | None = None

    @property
    @abc.abstractmethod
    def origin(self):
        """Label of the origin vertex; must lie in every level set."""

    @abc.abstractmethod
    def level(self, k: int) -> list:
        """Vertex labels of the level-k set G_k."""

    @abc.abstractmethod
    def neighbors(self, v) -> list[tuple[object, float]]:
        """All ``(neighbor, conductance)`` pairs at ``v``."""


def truncate(generator: GraphGenerator, k: int) -> Network:
    """Wired truncation of a generated graph at level ``k``.

    Edges from ``G_k`` to the exterior are replaced by edges to one new
    grounded vertex, conductances of parallel rewired edges summed.  If no
    edge leaves ``G_k`` (the generator is exhausted) the plain induced
    network is returned with no ground vertex.
    """
    if k < 1:
        raise NetworkError(f"truncation level must be >= 1, got {k}")
    if generator.max_level is not None and k > generator.max_level:
        k = generator.max_level
    level = list(generator.level(k))
    inside = set(level)
    if generator.origin not in inside:
        raise NetworkError("origin is not contained in the level set")

    edges: list[tuple[object, object, float]] = []
    ground_c: dict = {}
    done: set = set()
    for x in level:
        for y, c in generator.neighbors(x):
            if y in inside:
                if x == y:
                    raise NetworkError(f"generator produced a self loop at {x!r}")
                pair = frozenset((x, y))
                if pair in done:
                    continue
                done.add(pair)
                edges.append((x, y, c))
            else:
                ground_c[x] = ground_c.get(x, 0.0) + c

    if ground_c:
        if GROUND in inside:
            raise NetworkError("level set collides with the ground label")
        for x, c in ground_c.items():
            edges.append((x, GROUND, c))
        return Network(edges, generator.origin, vertices=level + [GROUND], ground=GROUND)
    return Network(edges, generator.origin, vertices=level)


@dataclass(frozen=True)
class Exhaustion:
    """A generator together with the wired boundary convention.

    The only supported boundary mode is "wired": the exterior of each level
    is collapsed to a grounded vertex held at potential zero.
    """

    generator: GraphGenerator
    boundary_mode: str = "wired"

    def __post_init__(self):
        if self.boundary_mode != "wired":
            raise NetworkError(f"unsupported boundary mode {self.boundary_mode!r}")

    def truncation(self, k: int) -> Network:
        return truncate(self.generator, k)


# -- concrete generator rules ----------------------------------------------


@dataclass(frozen=True)
class BinaryTreeGen(GraphGenerator):
    """Rooted infinite binary tree with constant edge conductance.

    Labels are strings over {0, 1} prefixed by "r"; the root "r" is the
    origin and vertex depth is ``len(label) - 1``.  Level k holds all
    vertices of depth at most k.
    """

    conductance: float = 1.0

    @property
    def origin(self) -> str:
        return "r"

    def level(self, k: int) -> list[str]:
        out = ["r"]
        frontier = ["r"]
        for _ in range(k):
            frontier = [s + b for s in frontier for b in ("0", "1")]
            out.extend(frontier)
        return out

    def neighbors(self, v: str) -> list[tuple[str, float]]:
        c = self.conductance
        out = [(v + "0", c), (v + "1", c)]
        if len(v) > 1:
            out.append((v[:-1], c))
        return out


@dataclass(frozen=True)
class IntegerLineGen(GraphGenerator):
    """Two-sided integer line with constant conductance; levels are balls."""

    conductance: float = 1.0

    @property
    def origin(self) -> int:
        return 0

    def level(self, k: int) -> list[int]:
        return list(range(-k, k + 1))

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        return [(v - 1, self.conductance), (v + 1, self.conductance)]


@dataclass(frozen=True)
class GeometricLineGen(GraphGenerator):
    """Half line 0, 1, 2, ... with conductance c_{n,n+1} = ratio**n.

    Level k is the first k vertices {0, ..., k-1}, so the wired resistance
    of the level-k truncation is the k-term partial sum of the series
    sum_n ratio**-n (exactly k when ratio is 1).
    """

    ratio: float = 2.0

    def __post_init__(self):
        if self.ratio <= 0:
            raise NetworkError(f"ratio must be positive, got {self.ratio}")

    @property
    def origin(self) -> int:
        return 0

    def level(self, k: int) -> list[int]:
        return list(range(k))

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        out = [(v + 1, float(self.ratio) ** v)]
        if v > 0:
            out.append((v - 1, float(self.ratio) ** (v - 1)))
        return out


@dataclass(frozen=True)
class IntegerLatticeGen(GraphGenerator):
    """d-dimensional integer lattice, unit conductances, graph-ball levels."""

    d: int = 2
    conductance: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise NetworkError(f"lattice dimension must be >= 1, got {self.d}")

    @property
    def origin(self) -> tuple:
        return (0,) * self.d

    def level(self, k: int) -> list[tuple]:
        out = []
        for point in itertools.product(range(-k, k + 1), repeat=self.d):
            if sum(abs(x) for x in point) <= k:
                out.append(point)
        return out

    def neighbors(self, v: tuple) -> list[tuple[tuple, float]]:
        out = []
        for axis in range(self.d):
            for step in (-1, 1):
                w = list(v)
                w[axis] += step
                out.append((tuple(w), self.conductance))
        return out


# -- finite builders -------------------------------------------------------


def _induced(generator: GraphGenerator, k: int) -> Network:
    """Induced (ungrounded) network on the level-k set of a generator."""
    level = list(generator.level(k))
    inside = set(level)
    edges = []
    done: set = set()
    for x in level:
        for y, c in generator.neighbors(x):
            if y in inside:
                pair = frozenset((x, y))
                if pair in done:
                    continue
                done.add(pair)
                edges.append((x, y, c))
    return Network(edges, generator.origin, vertices=level)


def path(n: int, conductance: float = 1.0) -> Network:
    """Path on vertices 0..n-1 with constant conductance, origin 0."""
    if n < 1:
        raise NetworkError(f"path needs n >= 1 vertices, got {n}")
    if n == 1:
        raise NetworkError("path with a single vertex has no edges")
    edges = [(i, i + 1, conductance) for i in range(n - 1)]
    return Network(edges, origin=0)


def cycle(n: int, conductance: float = 1.0) -> Network:
    """Cycle on vertices 0..n-1 with constant conductance, origin 0."""
    if n < 3:
        raise NetworkError(f"cycle needs n >= 3 vertices, got {n}")
    edges = [(i, (i + 1) % n, conductance) for i in range(n)]
    return Network(edges, origin=0)


def binary_tree(depth: int, conductance: float = 1.0) -> Network:
    """Finite rooted binary tree of the given depth, origin at the root."""
    if depth < 1:
        raise NetworkError(f"binary tree needs depth >= 1, got {depth}")
    return _induced(BinaryTreeGen(conductance=conductance), depth)


def lattice(d: int, radius: int, conductance: float = 1.0) -> Network:
    """Graph ball of the given radius in the d-dimensional integer lattice."""
    if radius < 1:
        raise NetworkError(f"lattice ball needs radius >= 1, got {radius}")
    return _induced(IntegerLatticeGen(d=d, conductance=conductance), radius)


def geometric_line(ratio: float, n: int) -> Network:
    """First n vertices of the half line with c_{k,k+1} = ratio**k."""
    if n < 2:
        raise NetworkError(f"geometric line needs n >= 2 vertices, got {n}")
    return _induced(GeometricLineGen(ratio=ratio), n)


def random_network(
    n: int,
    seed: int | np.random.Generator = 0,
    extra_edges: float = 0.5,
    c_max: float = 10.0,
) -> Network:
    """Random connected network: a random tree plus extra random edges.

    Conductances are drawn uniformly from (0, c_max].  Used by the
    randomized identity checks; deterministic for a fixed seed.
    """
    if n < 2:
        raise NetworkError(f"random network needs n >= 2 vertices, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def draw_c() -> float:
        # uniform on (0, c_max]: 1 - U is in (0, 1] when U is in [0, 1)
        return float(c_max * (1.0 - rng.random()))

    edges = []
    used = set()
    for v in range(1, n):
        parent = int(rng.integers(0, v))
        edges.append((v, parent, draw_c()))
        used.add((min(v, parent), max(v, parent)))
    n_extra = int(round(extra_edges * n))
    for _ in range(n_extra):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in used:
            continue
        used.add(key)
        edges.append((u, v, draw_c()))
    return Network(edges, origin=0)
