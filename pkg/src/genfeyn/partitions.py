"""Set partitions: enumeration, transport and the restricted families used by
Wick ordering (self-contraction-free partitions) and the linked-cluster
expansion (connected partitions).

Partitions are kept in canonical form: elements sorted inside each block,
blocks ordered by their least element. Enumeration walks restricted growth
strings in lexicographic order, so the one-block partition comes first and
the all-singletons partition last.
"""

from __future__ import annotations

import os
from itertools import chain, combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import CapacityError, DomainError

DEFAULT_CAPACITY = 14
CAPACITY_ENV = "FEYN_CAPACITY"


def get_capacity() -> int:
    """Ground-set size limit, overridable through ``FEYN_CAPACITY``."""
    raw = os.environ.get(CAPACITY_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_CAPACITY
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{CAPACITY_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise DomainError(f"{CAPACITY_ENV} must be non-negative, got {value}")
    return value


def check_capacity(size: int, capacity: int | None = None) -> None:
    limit = get_capacity() if capacity is None else capacity
    if size > limit:
        raise CapacityError(
            f"ground set of size {size} exceeds capacity {limit} "
            f"(set {CAPACITY_ENV} to raise it)"
        )


class Partition:
    """An immutable set partition in canonical form.

    ``blocks`` is a tuple of sorted tuples ordered by least element. Labels
    must be hashable and mutually comparable.
    """

    __slots__ = ("blocks", "_ground")

    def __init__(self, blocks: Iterable[Iterable[Hashable]]):
        raw = [tuple(sorted(b)) for b in blocks]
        seen = set()
        for b in raw:
            if not b:
                raise DomainError("partition blocks must be nonempty")
            for x in b:
                if x in seen:
                    raise DomainError(f"label {x!r} appears in more than one block")
                seen.add(x)
            if len(set(b)) != len(b):
                raise DomainError(f"repeated label inside block {b!r}")
        raw.sort(key=lambda b: b[0])
        self.blocks = tuple(raw)
        self._ground = None

    @classmethod
    def _trusted(cls, blocks: tuple) -> "Partition":
        # caller guarantees canonical form
        obj = cls.__new__(cls)
        obj.blocks = blocks
        obj._ground = None
        return obj

    @classmethod
    def parse(cls, text: str, label: Callable[[str], Hashable] = int) -> "Partition":
        """Inverse of ``str``: ``"1,2|3"`` -> {{1,2},{3}}."""
        text = text.strip()
        if not text:
            return cls(())
        return cls(tuple(label(x.strip()) for x in part.split(",")) for part in text.split("|"))

    @property
    def ground(self) -> tuple:
        if self._ground is None:
            self._ground = tuple(sorted(chain.from_iterable(self.blocks)))
        return self._ground

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Partition({str(self)!r})"

    def __str__(self):
        return "|".join(",".join(str(x) for x in b) for b in self.blocks)

    def block_of(self, label: Hashable) -> tuple:
        for b in self.blocks:
            if label in b:
                return b
        raise KeyError(label)


def restricted_growth_strings(n: int) -> Iterator[list[int]]:
    """Yield every restricted growth string of length ``n`` in lexicographic order.

    The same list object is mutated between yields; copy it if you keep it.
    """
    if n == 0:
        yield []
        return
    a = [0] * n
    # prefix_max[i] = max(a[:i]); a[i] may range over 0..prefix_max[i] + 1
    prefix_max = [0] * n
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] == prefix_max[i] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            prefix_max[j] = max(prefix_max[j - 1], a[j - 1])


def _blocks_from_rgs(a: list[int], labels: Sequence) -> tuple:
    blocks: list[list] = []
    for x, k in zip(labels, a):
        if k == len(blocks):
            blocks.append([x])
        else:
            blocks[k].append(x)
    return tuple(tuple(b) for b in blocks)


def index_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Partitions of ``range(n)`` as raw canonical block tuples (no capacity check)."""
    labels = range(n)
    for a in restricted_growth_strings(n):
        yield _blocks_from_rgs(a, labels)


def enumerate_partitions(ground: Iterable[Hashable], capacity: int | None = None) -> Iterator[Partition]:
    """Stream every partition of ``ground`` exactly once, in canonical form."""
    labels = sorted(set(ground))
    check_capacity(len(labels), capacity)
    return (Partition._trusted(_blocks_from_rgs(a, labels)) for a in restricted_growth_strings(len(labels)))


def enumerate_pair_partitions(ground: Iterable[Hashable], capacity: int | None = None) -> Iterator[Partition]:
    """Stream the perfect matchings of ``ground``; empty when its size is odd."""
    labels = sorted(set(ground))
    check_capacity(len(labels), capacity)
    if len(labels) % 2:
        return iter(())

    def pairings(rest):
        if not rest:
            yield ()
            return
        first = rest[0]
        for j in range(1, len(rest)):
            pair = (first, rest[j])
            remaining = rest[1:j] + rest[j + 1:]
            for tail in pairings(remaining):
                yield (pair,) + tail

    return (Partition._trusted(blocks) for blocks in pairings(tuple(labels)))


def transport(p: Partition, sigma: Mapping) -> Partition:
    """Image of ``p`` under the relabeling ``sigma`` (the species action)."""
    images = {}
    for x in p.ground:
        if x not in sigma:
            raise DomainError(f"relabeling is not defined on {x!r}")
        images[x] = sigma[x]
    if len(set(images.values())) != len(images):
        raise DomainError("relabeling is not injective on the ground set")
    return Partition(tuple(images[x] for x in b) for b in p.blocks)


def _family_index(families: Sequence[Iterable[Hashable]]) -> tuple[list[frozenset], dict]:
    fams = [frozenset(f) for f in families]
    owner: dict = {}
    for q, f in enumerate(fams):
        if not f:
            raise DomainError(f"family {q} is empty")
        for x in f:
            if x in owner:
                raise DomainError(f"label {x!r} belongs to families {owner[x]} and {q}")
            owner[x] = q
    return fams, owner


def is_sc_free(p: Partition, families: Sequence[Iterable[Hashable]]) -> bool:
    """True when no block of ``p`` lies inside a single family."""
    _, owner = _family_index(families)
    return _sc_free(p.blocks, owner)


def _sc_free(blocks, owner) -> bool:
    for b in blocks:
        q = owner.get(b[0])
        if q is not None and all(owner.get(x) == q for x in b):
            return False
    return True


def enumerate_sc_free_partitions(
    families: Sequence[Iterable[Hashable]],
    external: Iterable[Hashable] = (),
    capacity: int | None = None,
) -> Iterator[Partition]:
    """Partitions of the families plus ``external`` with no block inside one family."""
    fams, owner = _family_index(families)
    ext = set(external)
    clash = ext.intersection(owner)
    if clash:
        raise DomainError(f"external labels overlap the families: {sorted(clash)!r}")
    ground = set(owner) | ext
    return (p for p in enumerate_partitions(ground, capacity) if _sc_free(p.blocks, owner))


def family_components(p: Partition, families: Sequence[Iterable[Hashable]]) -> list[list[int]]:
    """Group family indices that are linked through shared blocks (union-find)."""
    fams, owner = _family_index(families)
    parent = list(range(len(fams)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for b in p.blocks:
        roots = {find(owner[x]) for x in b if x in owner}
        if len(roots) > 1:
            r0, *others = roots
            for r in others:
                parent[r] = r0
    groups: dict[int, list[int]] = {}
    for i in range(len(fams)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def is_connected_partition(p: Partition, families: Sequence[Iterable[Hashable]]) -> bool:
    return len(family_components(p, families)) <= 1


def is_connected_partition_literal(p: Partition, families: Sequence[Iterable[Hashable]]) -> bool:
    """Slow check: no proper nonempty subfamily has a union equal to a union of blocks.

    A union of families equals some union of blocks exactly when every block
    is either inside it or disjoint from it, so each subfamily costs one pass.
    """
    fams = [frozenset(f) for f in families]
    blocks = [frozenset(b) for b in p.blocks]
    n = len(fams)
    for size in range(1, n):
        for chosen in combinations(fams, size):
            union = frozenset().union(*chosen)
            if all(b <= union or not (b & union) for b in blocks):
                return False
    return True


def enumerate_connected_partitions(
    families: Sequence[Iterable[Hashable]], capacity: int | None = None
) -> Iterator[Partition]:
    """Partitions of the union of ``families`` that link all families together."""
    fams, owner = _family_index(families)
    if not fams:
        raise DomainError("at least one family is required")
    return (p for p in enumerate_partitions(owner, capacity) if is_connected_partition(p, fams))
