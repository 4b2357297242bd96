"""Generalized Feynman graphs of a phi^p interaction.

A graph has ``n`` labeled outer vertices, ``m`` labeled inner (interaction)
vertices with ``p`` labeled legs each, and anonymous empty vertices. Every
outer vertex and every leg carries exactly one edge, and that edge ends on an
empty vertex. Forgetting the empty-vertex labels leaves exactly one piece of
data: which legs share an empty vertex. A graph is therefore stored as a
partition of the leg set, and the quotient by empty-vertex relabeling is
taken by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import DomainError
from .partitions import (
    Partition,
    _blocks_from_rgs,
    check_capacity,
    family_components,
    restricted_growth_strings,
)

DEFAULT_DEGREE = 4

OUTER = 0
INNER = 1


@dataclass(frozen=True, order=True)
class Leg:
    """A leg label. Outer vertices sort before inner legs, then lexicographically."""

    kind: int
    vertex: int
    leg: int = 0

    def __str__(self):
        if self.kind == OUTER:
            return f"x{self.vertex}"
        return f"v{self.vertex}.{self.leg}"

    @property
    def is_outer(self) -> bool:
        return self.kind == OUTER


def outer(i: int) -> Leg:
    return Leg(OUTER, i)


def inner_leg(v: int, leg: int) -> Leg:
    return Leg(INNER, v, leg)


def parse_leg(text: str) -> Leg:
    """Parse ``"x3"`` or ``"v2.4"``."""
    text = text.strip()
    try:
        if text.startswith("x"):
            return outer(int(text[1:]))
        if text.startswith("v"):
            v, leg = text[1:].split(".")
            return inner_leg(int(v), int(leg))
    except ValueError:
        pass
    raise DomainError(f"not a leg label: {text!r}")


def leg_set(n: int, m: int, p: int) -> tuple[Leg, ...]:
    """All leg labels for ``n`` outer and ``m`` inner vertices, in canonical order."""
    if n < 0 or m < 0:
        raise DomainError("vertex counts must be non-negative")
    if p < 1:
        raise DomainError(f"interaction degree must be >= 1, got {p}")
    return tuple(outer(i) for i in range(1, n + 1)) + tuple(
        inner_leg(v, k) for v in range(1, m + 1) for k in range(1, p + 1)
    )


def vertex_families(n: int, m: int, p: int) -> list[tuple[Leg, ...]]:
    """Outer singletons followed by per-inner-vertex leg sets."""
    return [(outer(i),) for i in range(1, n + 1)] + [
        tuple(inner_leg(v, k) for k in range(1, p + 1)) for v in range(1, m + 1)
    ]


class FeynmanGraph:
    """A generalized Feynman graph, held as its canonical leg partition."""

    __slots__ = ("n", "m", "p", "partition")

    def __init__(self, n: int, m: int, p: int, partition: Partition):
        if partition.ground != leg_set(n, m, p):
            raise DomainError(
                f"partition ground set does not match the leg set for n={n}, m={m}, p={p}"
            )
        self.n, self.m, self.p, self.partition = n, m, p, partition

    @classmethod
    def _trusted(cls, n, m, p, partition):
        g = cls.__new__(cls)
        g.n, g.m, g.p, g.partition = n, m, p, partition
        return g

    @classmethod
    def parse(cls, text: str, n: int, m: int, p: int) -> "FeynmanGraph":
        return cls(n, m, p, Partition.parse(text, parse_leg))

    @property
    def blocks(self) -> tuple:
        return self.partition.blocks

    @property
    def num_empty(self) -> int:
        return len(self.partition.blocks)

    def __eq__(self, other):
        if not isinstance(other, FeynmanGraph):
            return NotImplemented
        return (self.n, self.m, self.p, self.partition) == (other.n, other.m, other.p, other.partition)

    def __hash__(self):
        return hash((self.n, self.m, self.p, self.partition))

    def __str__(self):
        return str(self.partition)

    def __repr__(self):
        return f"FeynmanGraph(n={self.n}, m={self.m}, p={self.p}, {str(self)!r})"

    def edges(self) -> list[tuple[Leg, int]]:
        """(leg, empty-vertex index) pairs; empty vertices are numbered 1..k in block order."""
        return [(leg, e) for e, b in enumerate(self.blocks, start=1) for leg in b]


def alpha(g: FeynmanGraph) -> Partition:
    """Graph -> partition of the leg set (one block per empty vertex)."""
    return g.partition


def alpha_inverse(part: Partition, n: int, m: int, p: int) -> FeynmanGraph:
    """Partition of the leg set -> graph with one empty vertex per block."""
    return FeynmanGraph(n, m, p, part)


def enumerate_graphs(n: int, m: int, p: int = DEFAULT_DEGREE, capacity: int | None = None) -> Iterator[FeynmanGraph]:
    """Stream all graphs with ``n`` outer and ``m`` inner vertices of degree ``p``.

    There are Bell(n + p*m) of them; the order follows the leg-set partition
    enumeration and is deterministic.
    """
    legs = leg_set(n, m, p)
    check_capacity(len(legs), capacity)
    for a in restricted_growth_strings(len(legs)):
        yield FeynmanGraph._trusted(n, m, p, Partition._trusted(_blocks_from_rgs(a, legs)))


def relabel(g: FeynmanGraph, outer_map: Mapping[int, int], inner_map: Mapping[int, int]) -> FeynmanGraph:
    """Permute outer vertices and inner vertices (legs keep their index)."""
    sigma = leg_bijection(g.n, g.m, g.p, outer_map, inner_map)
    return FeynmanGraph(g.n, g.m, g.p, Partition(tuple(sigma[x] for x in b) for b in g.blocks))


def leg_bijection(n, m, p, outer_map, inner_map) -> dict[Leg, Leg]:
    """The leg-set bijection induced by vertex permutations."""
    if sorted(outer_map) != list(range(1, n + 1)) or sorted(outer_map.values()) != list(range(1, n + 1)):
        raise DomainError("outer_map must be a permutation of 1..n")
    if sorted(inner_map) != list(range(1, m + 1)) or sorted(inner_map.values()) != list(range(1, m + 1)):
        raise DomainError("inner_map must be a permutation of 1..m")
    sigma = {outer(i): outer(outer_map[i]) for i in range(1, n + 1)}
    for v in range(1, m + 1):
        for k in range(1, p + 1):
            sigma[inner_leg(v, k)] = inner_leg(inner_map[v], k)
    return sigma


def is_connected(g: FeynmanGraph) -> bool:
    """Connectivity with each inner vertex's legs glued into a single node.

    The empty graph counts as connected.
    """
    if g.n == 0 and g.m == 0:
        return True
    return len(family_components(g.partition, vertex_families(g.n, g.m, g.p))) == 1


def has_self_contraction(g: FeynmanGraph) -> bool:
    """True if some empty vertex touches exactly one inner vertex and no outer vertex."""
    for b in g.blocks:
        first = b[0]
        if first.kind == INNER and all(x.kind == INNER and x.vertex == first.vertex for x in b):
            return True
    return False


def to_dot(g: FeynmanGraph, name: str = "G") -> str:
    """Undirected DOT text: outer vertices as points, inner as filled circles,
    empty vertices as open circles named e1..ek in block order."""
    lines = [f"graph {name} {{"]
    for i in range(1, g.n + 1):
        lines.append(f'  x{i} [shape=point, label="x_{i}", xlabel="x_{i}"];')
    for v in range(1, g.m + 1):
        lines.append(f'  v{v} [shape=circle, style=filled, fillcolor=black, label="", xlabel="v_{v}"];')
    for e in range(1, g.num_empty + 1):
        lines.append(f'  e{e} [shape=circle, label=""];')
    for leg, e in g.edges():
        if leg.is_outer:
            lines.append(f"  x{leg.vertex} -- e{e};")
        else:
            lines.append(f'  v{leg.vertex} -- e{e} [taillabel="{leg.leg}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
