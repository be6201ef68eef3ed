from .cliques import UnionFind, cpm, enumerate_k_cliques
from .cover import (
    DEFAULT_BOUNDS,
    Community,
    CommunityCover,
    Merge,
    SizeGroup,
    group_by_size,
    size_group,
)
from .modularity import cnm, modularity, partition_labels

__all__ = [
    "DEFAULT_BOUNDS",
    "Community",
    "CommunityCover",
    "Merge",
    "SizeGroup",
    "UnionFind",
    "cnm",
    "cpm",
    "enumerate_k_cliques",
    "group_by_size",
    "modularity",
    "partition_labels",
    "size_group",
]
