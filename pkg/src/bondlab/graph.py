"""Graph representation, seeded random-graph samplers and graph file formats.

Vertices are labelled ``0..n-1``. A graph stores one adjacency bitmask per
vertex as a Python ``int`` (bit ``v`` of ``rows[u]`` is set iff ``uv`` is an
edge), which keeps set operations on neighbourhoods to single ``&``/``|``
operations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb
from os import PathLike
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Graph",
    "GraphStats",
    "PairSet",
    "RandomSource",
    "as_generator",
    "sample_gnp",
    "sample_gnm",
    "process_stream",
    "graph_stats",
    "pair_universe",
    "iter_bits",
    "mask_of",
    "read_graph",
    "write_graph",
    "parse_edge_list",
    "format_edge_list",
]

_U64 = (1 << 64) - 1


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


class Graph:
    """Immutable undirected simple graph on ``n`` vertices."""

    __slots__ = ("n", "rows", "_edges")

    def __init__(self, n: int, rows: Sequence[int]):
        if n < 0:
            raise DomainError(f"vertex count must be non-negative, got {n}")
        if len(rows) != n:
            raise DomainError(f"expected {n} adjacency rows, got {len(rows)}")
        full = (1 << n) - 1
        for u, row in enumerate(rows):
            if row & ~full:
                raise DomainError(f"row {u} references a vertex outside 0..{n - 1}")
            if (row >> u) & 1:
                raise DomainError(f"self-loop at vertex {u}")
            for v in iter_bits(row):
                if not (rows[v] >> u) & 1:
                    raise DomainError(f"adjacency not symmetric at ({u}, {v})")
        self.n = n
        self.rows: tuple[int, ...] = tuple(rows)
        self._edges: tuple[tuple[int, int], ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        rows = [0] * n
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows)

    @classmethod
    def _trusted(cls, n: int, rows: Sequence[int]) -> Graph:
        """Build without validation; callers guarantee symmetric loop-free rows."""
        g = cls.__new__(cls)
        g.n = n
        g.rows = tuple(rows)
        g._edges = None
        return g

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, [0] * n)

    @classmethod
    def complete(cls, n: int) -> Graph:
        full = (1 << n) - 1
        return cls(n, [full ^ (1 << v) for v in range(n)])

    @classmethod
    def cycle(cls, n: int) -> Graph:
        if n < 3:
            raise DomainError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> Graph:
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def star(cls, leaves: int) -> Graph:
        return cls.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def m(self) -> int:
        return sum(row.bit_count() for row in self.rows) // 2

    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(u, v)`` with ``u < v`` in lexicographic order."""
        if self._edges is None:
            self._edges = tuple(
                (u, v) for u, row in enumerate(self.rows) for v in iter_bits(row >> (u + 1) << (u + 1))
            )
        return self._edges

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, v: int) -> int:
        return self.rows[v]

    def closed_neighbors(self, v: int) -> int:
        return self.rows[v] | (1 << v)

    def closed_rows(self) -> list[int]:
        return [row | (1 << v) for v, row in enumerate(self.rows)]

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.rows]

    def common_neighbors(self, u: int, v: int) -> int:
        """``|N(u) & N(v)|``; u and v themselves are never counted."""
        return (self.rows[u] & self.rows[v] & ~((1 << u) | (1 << v))).bit_count()

    def with_edges(self, pairs: Iterable[tuple[int, int]]) -> Graph:
        rows = list(self.rows)
        for u, v in pairs:
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(self.n, rows)

    def without_edges(self, pairs: Iterable[tuple[int, int]]) -> Graph:
        """Remove the given pairs; pairs that are not edges are ignored."""
        rows = list(self.rows)
        for u, v in pairs:
            rows[u] &= ~(1 << v)
            rows[v] &= ~(1 << u)
        return Graph._trusted(self.n, rows)

    def components(self) -> list[int]:
        """Vertex masks of the connected components, ordered by lowest vertex."""
        seen = 0
        comps = []
        for s in range(self.n):
            if (seen >> s) & 1:
                continue
            comp = frontier = 1 << s
            while frontier:
                nxt = 0
                for v in iter_bits(frontier):
                    nxt |= self.rows[v]
                frontier = nxt & ~comp
                comp |= frontier
            seen |= comp
            comps.append(comp)
        return comps

    def induced(self, vertex_mask: int) -> tuple[Graph, list[int]]:
        """Subgraph induced by ``vertex_mask``, relabelled ``0..k-1``.

        Returns the subgraph and the list mapping new labels to old ones.
        """
        labels = list(iter_bits(vertex_mask))
        index = {v: i for i, v in enumerate(labels)}
        rows = []
        for v in labels:
            rows.append(mask_of(index[w] for w in iter_bits(self.rows[v] & vertex_mask)))
        return Graph._trusted(len(labels), rows), labels

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}


@dataclass(frozen=True)
class PairSet:
    """A set of unordered vertex pairs, not necessarily edges of any graph."""

    pairs: frozenset[tuple[int, int]]

    def __init__(self, pairs: Iterable[Sequence[int]] = ()):
        norm = set()
        for p in pairs:
            u, v = int(p[0]), int(p[1])
            if u == v:
                raise DomainError(f"pair ({u}, {v}) is not a pair of distinct vertices")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "pairs", frozenset(norm))

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        u, v = pair
        return (min(u, v), max(u, v)) in self.pairs


@dataclass(frozen=True)
class RandomSource:
    """Seed plus stream index; ``generator()`` gives a fresh numpy Generator.

    The stream for ``(seed, stream)`` is PCG64 seeded from
    ``SeedSequence(seed mod 2**64, spawn_key=(stream,))``, so distinct stream
    indices give statistically independent streams and equal pairs give
    identical ones.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.stream < 0:
            raise DomainError(f"stream index must be non-negative, got {self.stream}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & _U64, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> RandomSource:
        return RandomSource(self.seed, index)


def as_generator(rng: RandomSource | np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomSource):
        return rng.generator()
    return RandomSource(int(rng)).generator()


def pair_universe(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All pairs ``u < v`` of ``0..n-1`` in lexicographic order, as index arrays."""
    return np.triu_indices(n, 1)


def _from_pair_arrays(n: int, us: Iterable[int], vs: Iterable[int]) -> Graph:
    rows = [0] * n
    for u, v in zip(us, vs):
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph._trusted(n, rows)


def sample_gnp(n: int, p: float, rng: RandomSource | np.random.Generator | int) -> Graph:
    """G(n, p): one Bernoulli(p) draw per pair, pairs in lexicographic order."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    gen = as_generator(rng)
    us, vs = pair_universe(n)
    hit = gen.random(us.size) < p
    return _from_pair_arrays(n, us[hit].tolist(), vs[hit].tolist())


def sample_gnm(n: int, m: int, rng: RandomSource | np.random.Generator | int) -> Graph:
    """G(n, m): ``m`` pairs chosen uniformly without replacement."""
    total = comb(n, 2)
    if not 0 <= m <= total:
        raise DomainError(f"m must lie in [0, {total}], got {m}")
    gen = as_generator(rng)
    us, vs = pair_universe(n)
    idx = np.sort(gen.choice(total, size=m, replace=False))
    return _from_pair_arrays(n, us[idx].tolist(), vs[idx].tolist())


def process_stream(n: int, rng: RandomSource | np.random.Generator | int) -> list[tuple[int, int]]:
    """Uniformly random ordering of all pairs of K_n (the random graph process)."""
    if n < 2:
        raise DomainError(f"the graph process needs n >= 2, got {n}")
    gen = as_generator(rng)
    us, vs = pair_universe(n)
    order = gen.permutation(us.size)
    return list(zip(us[order].tolist(), vs[order].tolist()))


@dataclass(frozen=True)
class GraphStats:
    max_degree: int
    min_degree: int
    m: int
    graph: Graph

    def common_neighbors(self, u: int, v: int) -> int:
        return self.graph.common_neighbors(u, v)


def graph_stats(g: Graph) -> GraphStats:
    degs = g.degrees()
    return GraphStats(
        max_degree=max(degs, default=0),
        min_degree=min(degs, default=0),
        m=sum(degs) // 2,
        graph=g,
    )


# -- file formats -----------------------------------------------------------


def parse_edge_list(text: str) -> Graph:
    """Parse ``n <n>`` followed by ``u v`` lines; blanks and ``#`` comments skipped."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise DomainError(f"line {lineno}: expected header 'n <count>', got {raw!r}")
            n = int(parts[1])
            continue
        if len(parts) != 2:
            raise DomainError(f"line {lineno}: expected 'u v', got {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise DomainError("edge list has no 'n <count>' header")
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def read_graph(path: str | PathLike) -> Graph:
    """Read a graph from JSON (``{"n":..,"edges":..}``) or edge-list text."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid graph JSON: {exc}") from exc
        return Graph.from_edges(int(data["n"]), data.get("edges", []))
    return parse_edge_list(text)


def write_graph(g: Graph, path: str | PathLike, fmt: str = "json") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "json":
            json.dump(g.to_dict(), fh)
            fh.write("\n")
        elif fmt == "edges":
            fh.write(format_edge_list(g))
        else:
            raise DomainError(f"unknown graph format {fmt!r}")


def all_pairs(n: int) -> Iterator[tuple[int, int]]:
    return combinations(range(n), 2)
