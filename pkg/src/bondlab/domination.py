"""Exact domination number, dominating-set counting and enumeration.

All searches share one branching scheme. Some undominated vertex ``v`` must be
dominated, so one of its closed neighbours enters the set. Candidates of ``v``
are tried in order; once candidate ``c`` has been explored it is excluded from
every later branch. Each dominating set therefore corresponds to exactly one
root-to-leaf path, which lets the same search count, enumerate and compute
per-vertex statistics without duplicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

from .errors import CapacityError, DomainError
from .graph import Graph, iter_bits

__all__ = [
    "DEFAULT_CAP",
    "DominationReport",
    "IntersectionProfile",
    "is_dominating",
    "gamma_exact",
    "min_dominating_set",
    "greedy_dominating_set",
    "count_dominating_sets",
    "iter_dominating_sets",
    "enumerate_dominating_sets",
    "enumerate_min_sets",
    "z_per_vertex",
    "intersection_profile",
    "domination_report",
]

DEFAULT_CAP = 1_000_000


def is_dominating(g: Graph, dset: int) -> bool:
    covered = dset
    for v in iter_bits(dset):
        covered |= g.rows[v]
    return covered == g.full_mask


def greedy_dominating_set(g: Graph) -> int:
    """Greedy max-coverage dominating set (ties to the lowest index)."""
    closed = g.closed_rows()
    undominated = g.full_mask
    chosen = 0
    while undominated:
        best, best_cov = -1, -1
        for w in range(g.n):
            cov = (closed[w] & undominated).bit_count()
            if cov > best_cov:
                best, best_cov = w, cov
        chosen |= 1 << best
        undominated &= ~closed[best]
    return chosen


class _Brancher:
    """Closed-neighbourhood branching over one graph."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.full = g.full_mask
        self.closed = g.closed_rows()
        self.degree = g.degrees()

    def pick(self, undominated: int, allowed: int) -> int:
        """Candidates for the most constrained undominated vertex (0 if stuck)."""
        closed = self.closed
        best_opts = 0
        best_cnt = self.n + 1
        for u in iter_bits(undominated):
            opts = closed[u] & allowed
            cnt = opts.bit_count()
            if cnt < best_cnt:
                best_opts, best_cnt = opts, cnt
                if cnt <= 1:
                    break
        return best_opts

    def order(self, cands: int, undominated: int) -> list[int]:
        closed, degree = self.closed, self.degree
        return sorted(
            iter_bits(cands),
            key=lambda c: (-(closed[c] & undominated).bit_count(), -degree[c], c),
        )

    def universal(self, undominated: int, allowed: int) -> int:
        """Allowed vertices whose closed neighbourhood covers ``undominated``."""
        common = allowed
        closed = self.closed
        for u in iter_bits(undominated):
            common &= closed[u]
            if not common:
                break
        return common

    def coverage_bound_fails(self, undominated: int, allowed: int, picks: int) -> bool:
        """True if ``picks`` allowed vertices cannot cover ``undominated``.

        Compares against the sum of the ``picks`` largest coverages, a bound
        at least as strong as ceil(u / (max degree + 1)).
        """
        need = undominated.bit_count()
        closed = self.closed
        covs = sorted(((closed[w] & undominated).bit_count() for w in iter_bits(allowed)), reverse=True)
        return sum(covs[:picks]) < need

    # -- searches ---------------------------------------------------------

    def minimum(self, upper: int, upper_set: int) -> tuple[int, int]:
        """Branch and bound for a minimum dominating set below ``upper``."""
        best = [upper, upper_set]

        def dfs(undominated: int, excluded: int, chosen: int, depth: int) -> None:
            if not undominated:
                best[0], best[1] = depth, chosen
                return
            rem = best[0] - 1 - depth
            if rem <= 0:
                return
            allowed = self.full & ~excluded & ~chosen
            if rem == 1:
                hit = self.universal(undominated, allowed)
                if hit:
                    c = (hit & -hit).bit_length() - 1
                    best[0], best[1] = depth + 1, chosen | (1 << c)
                return
            if self.coverage_bound_fails(undominated, allowed, rem):
                return
            cands = self.pick(undominated, allowed)
            for c in self.order(cands, undominated):
                dfs(undominated & ~self.closed[c], excluded, chosen | (1 << c), depth + 1)
                if best[0] - 1 - depth <= 0:
                    return
                excluded |= 1 << c

        dfs(self.full, 0, 0, 0)
        return best[0], best[1]

    def count(self, k: int) -> int:
        """Number of dominating sets of size exactly ``k``."""
        n = self.n

        def dfs(undominated: int, excluded: int, chosen: int, depth: int) -> int:
            rem = k - depth
            if not undominated:
                free = n - (excluded | chosen).bit_count()
                return comb(free, rem)
            if rem <= 0:
                return 0
            allowed = self.full & ~excluded & ~chosen
            if rem == 1:
                return self.universal(undominated, allowed).bit_count()
            if self.coverage_bound_fails(undominated, allowed, rem):
                return 0
            total = 0
            for c in iter_bits(self.pick(undominated, allowed)):
                total += dfs(undominated & ~self.closed[c], excluded, chosen | (1 << c), depth + 1)
                excluded |= 1 << c
            return total

        return dfs(self.full, 0, 0, 0)

    def leaves(self, k: int, chosen: int = 0, excluded: int = 0) -> Iterator[tuple[int, int, int]]:
        """Yield ``(chosen, free, picks)`` blocks partitioning the size-``k`` dominating sets.

        Each block stands for every set ``chosen | S`` with ``S`` a ``picks``-subset
        of the vertex mask ``free``. ``chosen``/``excluded`` force vertices in/out.
        """
        full = self.full
        closed = self.closed

        def dfs(undominated: int, excluded: int, chosen: int, depth: int):
            rem = k - depth
            allowed = full & ~excluded & ~chosen
            if not undominated:
                if rem <= allowed.bit_count():
                    yield chosen, allowed, rem
                return
            if rem <= 0:
                return
            if rem == 1:
                for c in iter_bits(self.universal(undominated, allowed)):
                    yield chosen | (1 << c), 0, 0
                return
            if self.coverage_bound_fails(undominated, allowed, rem):
                return
            for c in iter_bits(self.pick(undominated, allowed)):
                yield from dfs(undominated & ~closed[c], excluded, chosen | (1 << c), depth + 1)
                excluded |= 1 << c

        if chosen.bit_count() > k:
            return
        undominated = full
        for v in iter_bits(chosen):
            undominated &= ~closed[v]
        yield from dfs(undominated, excluded, chosen, chosen.bit_count())


def _component_graphs(g: Graph) -> list[tuple[Graph, list[int]]]:
    return [g.induced(c) for c in g.components()]


def min_dominating_set(g: Graph) -> int:
    """A minimum dominating set (as a bitmask), solved per connected component."""
    result = 0
    for sub, labels in _component_graphs(g):
        b = _Brancher(sub)
        greedy = greedy_dominating_set(sub)
        _, best = b.minimum(greedy.bit_count(), greedy)
        for i in iter_bits(best):
            result |= 1 << labels[i]
    return result


def gamma_exact(g: Graph) -> int:
    """Domination number by branch and bound (sum over connected components)."""
    return min_dominating_set(g).bit_count()


def count_dominating_sets(g: Graph, k: int) -> int:
    """X_k, the number of dominating sets of size exactly ``k``."""
    if not 0 <= k <= g.n:
        raise DomainError(f"k must lie in [0, {g.n}], got {k}")
    if g.n == 0:
        return 1 if k == 0 else 0
    return _Brancher(g).count(k)


def _expand(chosen: int, free: int, picks: int) -> Iterator[int]:
    if picks == 0:
        yield chosen
        return
    for combo in combinations(iter_bits(free), picks):
        mask = chosen
        for v in combo:
            mask |= 1 << v
        yield mask


def iter_dominating_sets(g: Graph, k: int, include: int = 0, exclude: int = 0) -> Iterator[int]:
    """Every size-``k`` dominating set containing ``include`` and avoiding ``exclude``."""
    if not 0 <= k <= g.n:
        raise DomainError(f"k must lie in [0, {g.n}], got {k}")
    if include & exclude:
        return
    for chosen, free, picks in _Brancher(g).leaves(k, include, exclude):
        yield from _expand(chosen, free, picks)


def enumerate_dominating_sets(g: Graph, k: int, cap: int = DEFAULT_CAP, include: int = 0, exclude: int = 0) -> list[int]:
    """All size-``k`` dominating sets; raises CapacityError beyond ``cap``."""
    out = []
    for d in iter_dominating_sets(g, k, include, exclude):
        if len(out) >= cap:
            raise CapacityError(f"more than {cap} dominating sets of size {k}", cap)
        out.append(d)
    return out


def enumerate_min_sets(g: Graph, cap: int = DEFAULT_CAP) -> tuple[list[int], bool]:
    """Minimum dominating sets, at most ``cap`` of them, plus an overflow flag."""
    if cap < 1:
        raise DomainError(f"cap must be at least 1, got {cap}")
    gamma = gamma_exact(g)
    out = []
    overflow = False
    for d in iter_dominating_sets(g, gamma):
        if len(out) >= cap:
            overflow = True
            break
        out.append(d)
    out.sort(key=lambda d: list(iter_bits(d)))
    return out, overflow


def z_per_vertex(g: Graph, r: int) -> list[int]:
    """Z_v: the number of size-``r`` dominating sets containing each vertex ``v``.

    Computed from the search blocks directly; no set is materialised.
    """
    if not 1 <= r <= g.n:
        raise DomainError(f"r must lie in [1, {g.n}], got {r}")
    z = [0] * g.n
    for chosen, free, picks in _Brancher(g).leaves(r):
        size = free.bit_count()
        whole = comb(size, picks)
        for v in iter_bits(chosen):
            z[v] += whole
        if picks:
            part = comb(size - 1, picks - 1)
            for v in iter_bits(free):
                z[v] += part
    return z


@dataclass(frozen=True)
class IntersectionProfile:
    r: int
    W: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.W)


def _indicator_matrix(sets: list[int], n: int) -> np.ndarray:
    mat = np.zeros((len(sets), n), dtype=np.int32)
    for row, d in enumerate(sets):
        mat[row, list(iter_bits(d))] = 1
    return mat


def intersection_profile(g: Graph, r: int, cap: int = DEFAULT_CAP, chunk: int = 2048) -> IntersectionProfile:
    """W_i: ordered pairs of size-``r`` dominating sets meeting in ``i`` vertices."""
    if not 1 <= r <= g.n:
        raise DomainError(f"r must lie in [1, {g.n}], got {r}")
    sets = enumerate_dominating_sets(g, r, cap)
    w = np.zeros(r + 1, dtype=np.int64)
    if sets:
        mat = _indicator_matrix(sets, g.n)
        for start in range(0, len(sets), chunk):
            inter = mat[start:start + chunk] @ mat.T
            w += np.bincount(inter.ravel(), minlength=r + 1)
    return IntersectionProfile(r, tuple(int(x) for x in w))


@dataclass
class DominationReport:
    gamma: int
    counts: dict[int, int] = field(default_factory=dict)
    min_sets: list[int] | None = None
    overflow: bool = False

    @property
    def x_gamma(self) -> int:
        return self.counts[self.gamma]


def domination_report(g: Graph, ks: list[int] | None = None, enumerate_cap: int | None = None) -> DominationReport:
    gamma = gamma_exact(g)
    counts = {gamma: count_dominating_sets(g, gamma)}
    for k in ks or ():
        counts[k] = count_dominating_sets(g, k)
    report = DominationReport(gamma, dict(sorted(counts.items())))
    if enumerate_cap is not None:
        report.min_sets, report.overflow = enumerate_min_sets(g, enumerate_cap)
    return report
