"""Bondage number: classical upper bounds, exact search, and damage bounds.

The damage of a directed pair u->v weighs every size-r dominating set D of
G + uv with v in D, u not in D by 1/j, where j = |N(u) & D| in G + uv.
Deleting a set of pairs A destroys at most Z_A = sum of damages over A
dominating sets, so if even the largest a edge damages sum to less than X
(the number of minimum dominating sets), no a edges can raise the
domination number. All damages are exact fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .domination import (
    DEFAULT_CAP,
    enumerate_dominating_sets,
    gamma_exact,
    is_dominating,
)
from .errors import DomainError
from .graph import Graph, PairSet, iter_bits

__all__ = [
    "INFINITY",
    "DirectedDamage",
    "DamageTable",
    "BondageResult",
    "Certificate",
    "fink_bauer_bound",
    "hartnell_rall_bound",
    "min_dom_count_bound",
    "bondage_exact",
    "bondage_bounds",
    "damage_directed",
    "damage_split",
    "damage_table",
    "edge_damages",
    "y_destroyed",
    "certified_lower_bound",
    "pair_damage",
]

INFINITY = math.inf


def fink_bauer_bound(g: Graph) -> int | float:
    """min over edges xy of deg(x) + deg(y) - 1 (infinite without edges)."""
    deg = g.degrees()
    return min((deg[x] + deg[y] - 1 for x, y in g.edges()), default=INFINITY)


def hartnell_rall_bound(g: Graph) -> int | float:
    """Fink-Bauer bound tightened by the common neighbours of each edge."""
    deg = g.degrees()
    return min(
        (deg[x] + deg[y] - 1 - g.common_neighbors(x, y) for x, y in g.edges()),
        default=INFINITY,
    )


def _has_unique_dominator_witness(g: Graph, dset: int) -> bool:
    for v in iter_bits(g.full_mask & ~dset):
        if (g.rows[v] & dset).bit_count() == 1:
            return True
    return False


def min_dom_count_bound(g: Graph, cap: int = DEFAULT_CAP) -> int | float | None:
    """Number of minimum dominating sets, if it provably bounds b(G).

    Each minimum set with an outside vertex that has exactly one neighbour in
    the set is destroyed by deleting that one edge. The count is returned
    only if every minimum set has such a vertex; otherwise ``None``
    (inapplicable). Edgeless graphs give infinity.
    """
    if g.m == 0:
        return INFINITY
    sets = enumerate_dominating_sets(g, gamma_exact(g), cap)
    if all(_has_unique_dominator_witness(g, d) for d in sets):
        return len(sets)
    return None


def _lcm_upto(r: int) -> int:
    return math.lcm(*range(1, r + 1)) if r >= 1 else 1


@dataclass(frozen=True)
class DirectedDamage:
    """Damage of u->v split by j = |N(u) & D| in G + uv."""

    u: int
    v: int
    r: int
    buckets: dict[int, int]

    @property
    def total(self) -> Fraction:
        return sum((Fraction(c, j) for j, c in self.buckets.items()), Fraction(0))

    def split(self, L: int) -> tuple[Fraction, Fraction]:
        """(light, heavy): light sums buckets j > L, heavy buckets j <= L."""
        light = sum((Fraction(c, j) for j, c in self.buckets.items() if j > L), Fraction(0))
        heavy = sum((Fraction(c, j) for j, c in self.buckets.items() if j <= L), Fraction(0))
        return light, heavy


def _check_pair(g: Graph, u: int, v: int, r: int) -> None:
    if u == v:
        raise DomainError(f"damage needs distinct vertices, got u = v = {u}")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise DomainError(f"pair ({u}, {v}) outside vertex range")
    if not 1 <= r <= g.n:
        raise DomainError(f"r must lie in [1, {g.n}], got {r}")


def damage_directed(g: Graph, u: int, v: int, r: int, cap: int = DEFAULT_CAP) -> DirectedDamage:
    """Damage of the directed pair u->v at set size ``r`` (uv need not be an edge)."""
    _check_pair(g, u, v, r)
    plus = g if g.has_edge(u, v) else g.with_edges([(u, v)])
    nu = plus.rows[u]
    buckets: dict[int, int] = {}
    for d in enumerate_dominating_sets(plus, r, cap, include=1 << v, exclude=1 << u):
        j = (nu & d).bit_count()
        buckets[j] = buckets.get(j, 0) + 1
    return DirectedDamage(u, v, r, dict(sorted(buckets.items())))


def damage_split(g: Graph, u: int, v: int, r: int, L: int, cap: int = DEFAULT_CAP) -> tuple[Fraction, Fraction]:
    if L < 0:
        raise DomainError(f"L must be non-negative, got {L}")
    return damage_directed(g, u, v, r, cap).split(L)


def pair_damage(g: Graph, u: int, v: int, r: int, cap: int = DEFAULT_CAP) -> Fraction:
    """Z_uv = Z_{u->v} + Z_{v->u}."""
    return damage_directed(g, u, v, r, cap).total + damage_directed(g, v, u, r, cap).total


def _edge_buckets(g: Graph, sets: Iterable[int], r: int) -> dict[tuple[int, int], dict[int, int]]:
    """Per directed edge (u, v) the bucket counts, from one pass over D_r(G).

    For an edge uv, G + uv = G, so the sets counted for u->v are exactly the
    size-r dominating sets of G containing v but not u.
    """
    out: dict[tuple[int, int], dict[int, int]] = {}
    full = g.full_mask
    rows = g.rows
    for d in sets:
        for u in iter_bits(full & ~d):
            nb = rows[u] & d
            j = nb.bit_count()
            for v in iter_bits(nb):
                b = out.setdefault((u, v), {})
                b[j] = b.get(j, 0) + 1
    return out


@dataclass
class DamageTable:
    """Damages of directed pairs of one graph at set size ``r``."""

    r: int
    L: int
    X: int
    pairs: dict[tuple[int, int], DirectedDamage]
    z_vertex: list[int] = field(default_factory=list)

    def rows(self):
        """Yield ``(u, v, Z, Z_light, Z_heavy, buckets)`` in (u, v) order."""
        for (u, v), dmg in sorted(self.pairs.items()):
            light, heavy = dmg.split(self.L)
            yield u, v, dmg.total, light, heavy, dmg.buckets

    def pair_total(self, u: int, v: int) -> Fraction:
        zero = Fraction(0)
        a = self.pairs.get((u, v))
        b = self.pairs.get((v, u))
        return (a.total if a else zero) + (b.total if b else zero)


def damage_table(
    g: Graph,
    r: int | None = None,
    L: int = 0,
    all_pairs: bool = False,
    cap: int = DEFAULT_CAP,
) -> DamageTable:
    """Damage of every directed edge (or every directed pair) of ``g``.

    ``r`` defaults to the domination number of ``g``.
    """
    if r is None:
        r = gamma_exact(g)
    if not 1 <= r <= g.n:
        raise DomainError(f"r must lie in [1, {g.n}], got {r}")
    sets = enumerate_dominating_sets(g, r, cap)
    z_vertex = [0] * g.n
    for d in sets:
        for v in iter_bits(d):
            z_vertex[v] += 1
    buckets = _edge_buckets(g, sets, r)
    pairs = {}
    for u, v in g.edges():
        for a, b in ((u, v), (v, u)):
            pairs[(a, b)] = DirectedDamage(a, b, r, dict(sorted(buckets.get((a, b), {}).items())))
    if all_pairs:
        for a in range(g.n):
            for b in range(g.n):
                if a != b and not g.has_edge(a, b):
                    pairs[(a, b)] = damage_directed(g, a, b, r, cap)
    return DamageTable(r=r, L=L, X=len(sets), pairs=pairs, z_vertex=z_vertex)


def edge_damages(g: Graph, sets: list[int], r: int) -> dict[tuple[int, int], Fraction]:
    """Z_e for every edge e = (u, v), u < v, given the size-r dominating sets."""
    lcm = _lcm_upto(r)
    acc = {e: 0 for e in g.edges()}
    full = g.full_mask
    rows = g.rows
    for d in sets:
        for u in iter_bits(full & ~d):
            nb = rows[u] & d
            w = lcm // nb.bit_count() if nb else 0
            for v in iter_bits(nb):
                acc[(u, v) if u < v else (v, u)] += w
    return {e: Fraction(a, lcm) for e, a in acc.items()}


def y_destroyed(g: Graph, pairs: PairSet | Iterable[tuple[int, int]], r: int, cap: int = DEFAULT_CAP) -> int:
    """Y_A: size-r dominating sets of G that stop dominating once A is deleted."""
    if not 1 <= r <= g.n:
        raise DomainError(f"r must lie in [1, {g.n}], got {r}")
    pairs = list(pairs)
    if not pairs:
        return 0
    reduced = g.without_edges(pairs)
    return sum(1 for d in enumerate_dominating_sets(g, r, cap) if not is_dominating(reduced, d))


@dataclass(frozen=True)
class Certificate:
    """Evidence for b(G) > a: the a+1 largest edge damages (scaled per
    component) and the minimum-set count X they are compared against."""

    a: int
    X: int
    top: tuple[tuple[tuple[int, int], Fraction], ...]

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "X": self.X,
            "top_damages": [
                {"edge": list(e), "Z_num": z.numerator, "Z_den": z.denominator} for e, z in self.top
            ],
        }


@dataclass
class BondageResult:
    """Outcome of a bondage computation.

    ``value`` is the exact bondage number when known (``inf`` for edgeless
    graphs); ``lower`` records a proven strict lower bound ``b > lower``.
    """

    mode: str
    value: int | float | None = None
    lower: int | None = None
    upper_bounds: dict[str, int | float | None] = field(default_factory=dict)
    certificate: Certificate | None = None

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if x == INFINITY:
                return "infinity"
            return int(x)

        out: dict = {}
        if self.mode == "exact":
            out["b"] = enc(self.value) if self.value is not None else None
        if self.lower is not None:
            out["b_greater_than"] = self.lower
        if self.upper_bounds:
            out["upper_bounds"] = {
                k: ("inapplicable" if v is None else enc(v)) for k, v in self.upper_bounds.items()
            }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def bondage_bounds(g: Graph, cap: int = DEFAULT_CAP) -> BondageResult:
    return BondageResult(
        mode="bounds",
        upper_bounds={
            "fink_bauer": fink_bauer_bound(g),
            "hartnell_rall": hartnell_rall_bound(g),
            "min_dom_count": min_dom_count_bound(g, cap),
        },
    )


def bondage_exact(g: Graph, limit: int | None = None, prune: bool = True, cap: int = DEFAULT_CAP) -> BondageResult:
    """Exact b(G) by trying edge subsets of increasing size.

    A subset B raises the domination number iff it destroys every minimum
    dominating set (deleting edges never creates new ones). With ``prune``,
    subsets whose total damage is below X are skipped without checking.
    If nothing works up to ``limit`` the result only certifies b > limit.
    """
    if limit is not None and limit < 1:
        raise DomainError(f"limit must be at least 1, got {limit}")
    if g.m == 0:
        return BondageResult(mode="exact", value=INFINITY)
    fb = fink_bauer_bound(g)
    depth = min(g.m, fb) if limit is None else min(limit, g.m)
    gamma = gamma_exact(g)
    sets = enumerate_dominating_sets(g, gamma, cap)
    X = len(sets)
    edges = list(g.edges())
    lcm = _lcm_upto(gamma)
    zs = edge_damages(g, sets, gamma)
    scaled = {e: int(z * lcm) for e, z in zs.items()}
    threshold = X * lcm
    rows = g.rows
    full = g.full_mask
    for a in range(1, depth + 1):
        for combo in combinations(edges, a):
            if prune and sum(scaled[e] for e in combo) < threshold:
                continue
            cut = list(rows)
            for u, v in combo:
                cut[u] &= ~(1 << v)
                cut[v] &= ~(1 << u)
            if all(_still_dominates(cut, d, full) is False for d in sets):
                return BondageResult(mode="exact", value=a, lower=a - 1)
    return BondageResult(mode="exact", value=None, lower=depth)


def _still_dominates(rows: list[int], d: int, full: int) -> bool:
    covered = d
    for v in iter_bits(d):
        covered |= rows[v]
    return covered == full


def certified_lower_bound(g: Graph, cap: int = DEFAULT_CAP) -> BondageResult:
    """Largest a such that the a largest edge damages sum to less than X.

    Works component by component: a minimum dominating set of G is a union
    of minimum dominating sets of the components, so the damage of an edge
    inside component C equals (its damage within C) * X / X_C. Comparing
    Z_e / X against 1 is therefore exact and needs only per-component
    enumeration. ``cap`` bounds the enumeration in each component.
    """
    if g.m == 0:
        raise DomainError("the certified bound needs a graph with at least one edge")
    ratios: list[tuple[Fraction, tuple[int, int]]] = []
    X = 1
    for comp in g.components():
        sub, labels = g.induced(comp)
        if sub.n == 1:
            continue
        gamma_c = gamma_exact(sub)
        sets = enumerate_dominating_sets(sub, gamma_c, cap)
        X *= len(sets)
        for (a, b), z in edge_damages(sub, sets, gamma_c).items():
            ratios.append((z / len(sets), (labels[a], labels[b])))
    ratios.sort(key=lambda t: (-t[0], t[1]))
    total = Fraction(0)
    a = 0
    for ratio, _ in ratios:
        if total + ratio < 1:
            total += ratio
            a += 1
        else:
            break
    top = tuple((e, ratio * X) for ratio, e in ratios[: a + 1])
    return BondageResult(mode="certified", lower=a, certificate=Certificate(a=a, X=X, top=top))
