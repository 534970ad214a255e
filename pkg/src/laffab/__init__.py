"""Stand-off annotation graphs: parse, compile to a binary bundle, walk and analyse."""
from .compiler import ALL, CompiledCorpus, compile_graph, decompile, load, save
from .fabric import (RankTable, cmp_nodes, feature_value, neighbourhood, sorted_nodes,
                     text_of, walk)
from .graf import parse_header, parse_resource, write_resource
from .model import (Annotation, EdgeRecord, FeatureKey, Graph, NodeRecord, PrimaryData,
                    Region, validate)

__version__ = "0.1.0"

__all__ = [
    "ALL", "Annotation", "CompiledCorpus", "EdgeRecord", "FeatureKey", "Graph", "NodeRecord",
    "PrimaryData", "RankTable", "Region", "cmp_nodes", "compile_graph", "decompile",
    "feature_value", "load", "neighbourhood", "parse_header", "parse_resource", "save",
    "sorted_nodes", "text_of", "validate", "walk", "write_resource",
]
