"""KNN similarity graph, hop neighborhoods and datasets."""

from .dataset import Dataset, load_dataset_csv, save_dataset_csv
from .hops import (
    HopIndex,
    NeighborLists,
    build_hop_index,
    khop_neighbors,
    lists_for_choice,
    lists_for_order,
    support_mask,
)
from .knn import FeatureMatrix, SparseGraph, build_knn_graph, export_edge_list, load_edge_list

__all__ = [
    "Dataset",
    "FeatureMatrix",
    "HopIndex",
    "NeighborLists",
    "SparseGraph",
    "build_hop_index",
    "build_knn_graph",
    "export_edge_list",
    "khop_neighbors",
    "lists_for_choice",
    "lists_for_order",
    "load_dataset_csv",
    "load_edge_list",
    "save_dataset_csv",
    "support_mask",
]
