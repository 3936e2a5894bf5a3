"""Most reliable (theta,k)-core community search over dynamic weighted graphs."""
from .dyngraph import DynamicNetwork, GraphInstance, QueryParams, ingest_edge_stream
from .eef_search import eef_query
from .reliability import Community
from .wcf_index import WcfIndex, build as build_index, query_c1
from .wcf_search import alpha_sweep, wcf_query

__version__ = "0.1.0"

__all__ = [
    "Community",
    "DynamicNetwork",
    "GraphInstance",
    "QueryParams",
    "WcfIndex",
    "alpha_sweep",
    "build_index",
    "eef_query",
    "ingest_edge_stream",
    "query_c1",
    "wcf_query",
]
