from editflow.flow.graph import (
    FlowGraph,
    OrderLabel,
    PairLabelSet,
    build_flow_graph,
    export_graph,
    graph_from_dict,
    load_annotation,
    min_indegree_candidates,
    reflect,
    successors,
    write_annotation,
)
from editflow.flow.classify import (
    FlowCategory,
    MatchResult,
    PredictedEdit,
    category_predicates,
    classify,
    match_edit,
    normalize_region,
)

__all__ = [
    "FlowCategory",
    "FlowGraph",
    "MatchResult",
    "OrderLabel",
    "PairLabelSet",
    "PredictedEdit",
    "build_flow_graph",
    "category_predicates",
    "classify",
    "export_graph",
    "graph_from_dict",
    "load_annotation",
    "match_edit",
    "min_indegree_candidates",
    "normalize_region",
    "reflect",
    "successors",
    "write_annotation",
]
