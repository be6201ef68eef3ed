"""Community containers and size grouping."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np


class SizeGroup(str, Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"


# lower bounds of G1, G2, G3: G1 = {3}, G2 = [4, 10), G3 = [10, inf)
DEFAULT_BOUNDS = (3, 4, 10)


def size_group(size: int, bounds: Sequence[int] = DEFAULT_BOUNDS) -> SizeGroup | None:
    b1, b2, b3 = bounds
    if size >= b3:
        return SizeGroup.G3
    if size >= b2:
        return SizeGroup.G2
    if size >= b1:
        return SizeGroup.G1
    return None


@dataclass(frozen=True)
class Community:
    id: int
    members: frozenset[int]
    algorithm: str  # "cpm" or "cnm"
    k: int | None = None
    size_group: SizeGroup | None = None

    def __post_init__(self):
        if self.size_group is None:
            object.__setattr__(self, "size_group", size_group(len(self.members)))

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))


@dataclass
class Merge:
    """One accepted CNM agglomeration step."""

    survivor: int
    absorbed: int
    gain: float
    modularity: float


@dataclass
class CommunityCover:
    communities: list[Community]
    algorithm: str
    k: int | None = None
    disjoint: bool = False
    min_size: int = 3
    # CNM only: full partition label per node (before the size filter)
    partition: np.ndarray | None = field(default=None, repr=False)
    modularity: float | None = None
    history: list[Merge] = field(default_factory=list, repr=False)

    @property
    def label(self) -> str:
        return f"CPM(k={self.k})" if self.algorithm == "cpm" else "CNM"

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self) -> Iterator[Community]:
        return iter(self.communities)

    def __getitem__(self, i: int) -> Community:
        return self.communities[i]

    def member_sets(self) -> list[frozenset[int]]:
        return [c.members for c in self.communities]

    def blocks(self) -> list[frozenset[int]]:
        """All partition blocks for CNM, including ones below ``min_size``."""
        if self.partition is None:
            return self.member_sets()
        order = np.argsort(self.partition, kind="stable")
        labels = self.partition[order]
        cuts = np.flatnonzero(np.diff(labels)) + 1
        return [frozenset(chunk.tolist()) for chunk in np.split(order, cuts)] if len(order) else []

    def filtered(self, min_size: int) -> CommunityCover:
        kept = [c for c in self.communities if c.size >= min_size]
        return CommunityCover(
            renumber(kept),
            self.algorithm,
            self.k,
            self.disjoint,
            max(min_size, self.min_size),
            self.partition,
            self.modularity,
            self.history,
        )

    def raw(self) -> CommunityCover:
        """Unfiltered cover built from every CNM partition block of size >= 3."""
        if self.partition is None:
            return self
        comms = [
            Community(i, b, self.algorithm, self.k)
            for i, b in enumerate(sorted(self.blocks(), key=min))
        ]
        cover = CommunityCover(
            [c for c in comms if c.size >= 3],
            self.algorithm,
            self.k,
            self.disjoint,
            3,
            self.partition,
            self.modularity,
            self.history,
        )
        cover.communities = renumber(cover.communities)
        return cover


def renumber(communities: Iterable[Community]) -> list[Community]:
    return [
        Community(i, c.members, c.algorithm, c.k, c.size_group)
        for i, c in enumerate(communities)
    ]


def group_by_size(
    cover: CommunityCover | Iterable[Community], bounds: Sequence[int] = DEFAULT_BOUNDS
) -> dict[SizeGroup, list[Community]]:
    """Split communities into G1/G2/G3; smaller ones are dropped."""
    groups: dict[SizeGroup, list[Community]] = {g: [] for g in SizeGroup}
    for c in cover:
        g = size_group(c.size, bounds)
        if g is not None:
            groups[g].append(c)
    return groups
