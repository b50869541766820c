"""Hierarchy-path scoring, prompting, and evaluation for discourse relations."""

from sensepath.hierarchy import (
    LabelHierarchy,
    LabelNode,
    SensePath,
    ancestor_at,
    enumerate_paths,
    load_hierarchy,
)

__all__ = [
    "LabelHierarchy",
    "LabelNode",
    "SensePath",
    "ancestor_at",
    "enumerate_paths",
    "load_hierarchy",
]

__version__ = "0.1.0"
