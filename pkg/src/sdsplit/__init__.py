"""Lossless a priori demand splitting for split-delivery vehicle routing."""

__version__ = "0.1.0"

from .instance import (
    Node,
    ParseError,
    Route,
    Solution,
    Visit,
    VrpInstance,
    edge_cost,
    generate_random,
    k_min,
    parse_solomon,
    parse_tsplib,
    solution_cost,
)
from .partitions import (
    CoalesceAssignment,
    CoalesceError,
    Partition,
    coalesces_to,
    coalesces_to_all,
    enumerate_partitions,
    greedy_coalesce,
    mscp,
    mscp_size,
    mscp_table,
    size_bound,
    verify_minimality,
)
from .rules import (
    SplitPolicy,
    denomination_split,
    expanded_size,
    full_size,
    lossless_split,
    problem_size,
    rescale_granularity,
)
from .transform import OriginMap, count_splits, expand, gap, merge_back, validate
