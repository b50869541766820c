"""Discourse sense label hierarchy: loading, validation, path enumeration.

The label scheme is a tree: a virtual root at depth 0, top-level relation
classes at depth 1, second-level subtypes at depth 2, and (optionally) one
discourse connective per subtype as the deepest layer.  A root-to-leaf chain
is a sense path, the unit of prediction everywhere in this package.

Two label sets ship as built-in configs, ``pdtb2`` and ``conll16``.  Custom
hierarchies load from the same JSON document format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

PATH_SEPARATOR = " -> "

# Mask roles and the tree depth each one selects.
ROLE_TOP = "top"
ROLE_SECOND = "second"
ROLE_CONNECTIVE = "connective"
ROLE_WHOLE_PATH = "whole_path"
ROLE_DEPTH = {ROLE_TOP: 1, ROLE_SECOND: 2, ROLE_CONNECTIVE: 3}


class HierarchyError(ValueError):
    """Raised when a hierarchy config fails validation; names the bad node."""


@dataclass(frozen=True)
class LabelNode:
    """One labelled node: canonical label plus the verbalizer surface."""

    label: str
    depth: int
    parent: str | None  # label of the depth-1 ancestor; None at depth 1
    surface: str


@dataclass(frozen=True)
class SensePath:
    """A root-to-leaf chain [top, second, ..., leaf] with a stable id."""

    nodes: tuple[LabelNode, ...]
    id: int

    @property
    def top(self) -> LabelNode:
        return self.nodes[0]

    @property
    def second(self) -> LabelNode:
        return self.nodes[1]

    @property
    def leaf(self) -> LabelNode:
        return self.nodes[-1]

    def serialize(self) -> str:
        """Canonical text form, e.g. ``Comparison -> Contrast -> however``."""
        return PATH_SEPARATOR.join(n.label for n in self.nodes)


def ancestor_at(path: SensePath, depth: int) -> LabelNode:
    """The node of this path at the requested depth (1-based)."""
    if not 1 <= depth <= len(path.nodes):
        raise HierarchyError(
            f"depth {depth} out of range 1..{len(path.nodes)} for path {path.serialize()!r}"
        )
    return path.nodes[depth - 1]


@dataclass(frozen=True)
class LabelHierarchy:
    """Validated, immutable label tree.

    ``nodes`` keeps config order, which fixes path enumeration order and
    therefore path ids and every candidate-set ordering downstream.
    """

    name: str
    depth: int
    nodes: tuple[LabelNode, ...]
    comment: str = ""
    _children: dict[tuple[int, str], tuple[LabelNode, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )
    _by_key: dict[tuple[int, str], LabelNode] = field(
        default_factory=dict, repr=False, compare=False
    )
    _paths: tuple[SensePath, ...] = field(default=(), repr=False, compare=False)

    def nodes_at(self, depth: int) -> tuple[LabelNode, ...]:
        return tuple(n for n in self.nodes if n.depth == depth)

    def labels_at(self, depth: int) -> tuple[str, ...]:
        return tuple(n.label for n in self.nodes_at(depth))

    def surfaces_at(self, depth: int) -> tuple[str, ...]:
        return tuple(n.surface for n in self.nodes_at(depth))

    def node(self, depth: int, label: str) -> LabelNode:
        """Case-insensitive node lookup; raises HierarchyError when absent."""
        found = self.find(depth, label)
        if found is None:
            raise HierarchyError(f"no node {label!r} at depth {depth} in {self.name!r}")
        return found

    def find(self, depth: int, label: str) -> LabelNode | None:
        return self._by_key.get((depth, _fold(label)))

    def children(self, node: LabelNode) -> tuple[LabelNode, ...]:
        return self._children.get((node.depth, _fold(node.label)), ())

    def index_at(self, depth: int, label: str) -> int:
        """Position of a label within its level, in config order."""
        folded = _fold(label)
        for i, n in enumerate(self.nodes_at(depth)):
            if _fold(n.label) == folded:
                return i
        raise HierarchyError(f"no node {label!r} at depth {depth} in {self.name!r}")

    @property
    def paths(self) -> tuple[SensePath, ...]:
        return self._paths

    def path_for(self, top: str, second: str, connective: str | None = None) -> SensePath:
        """Resolve labels to an enumerated path.

        With ``connective`` omitted the first (config-order) leaf under the
        (top, second) pair is used.
        """
        for p in self._paths:
            if _fold(p.top.label) != _fold(top) or _fold(p.second.label) != _fold(second):
                continue
            if connective is None or _fold(p.leaf.label) == _fold(connective):
                return p
        raise HierarchyError(
            f"no path for ({top!r}, {second!r}, {connective!r}) in {self.name!r}"
        )


def _fold(label: str) -> str:
    return " ".join(label.split()).casefold()


def _validate_and_index(h: LabelHierarchy) -> None:
    if h.depth < 2:
        raise HierarchyError(f"hierarchy {h.name!r} must have depth >= 2, got {h.depth}")
    by_key: dict[tuple[int, str], LabelNode] = {}
    for n in h.nodes:
        if not 1 <= n.depth <= h.depth:
            raise HierarchyError(f"node {n.label!r} has depth {n.depth} outside 1..{h.depth}")
        if PATH_SEPARATOR.strip() in n.label:
            raise HierarchyError(f"node label {n.label!r} contains the path separator '->'")
        if not n.surface.strip():
            raise HierarchyError(f"node {n.label!r} has an empty surface")
        key = (n.depth, _fold(n.label))
        if key in by_key:
            raise HierarchyError(f"duplicate label {n.label!r} at depth {n.depth}")
        by_key[key] = n
    for d in range(1, h.depth + 1):
        if not any(n.depth == d for n in h.nodes):
            raise HierarchyError(f"hierarchy {h.name!r} has an empty level at depth {d}")
    children: dict[tuple[int, str], list[LabelNode]] = {}
    for n in h.nodes:
        if n.depth == 1:
            if n.parent is not None:
                raise HierarchyError(f"top-level node {n.label!r} must not declare a parent")
            continue
        if n.parent is None:
            raise HierarchyError(f"node {n.label!r} at depth {n.depth} has no parent")
        pkey = (n.depth - 1, _fold(n.parent))
        if pkey not in by_key:
            raise HierarchyError(
                f"node {n.label!r} is an orphan: parent {n.parent!r} not found at depth {n.depth - 1}"
            )
        children.setdefault(pkey, []).append(n)
    for n in h.nodes:
        if n.depth < h.depth and (n.depth, _fold(n.label)) not in children:
            raise HierarchyError(f"node {n.label!r} at depth {n.depth} has no children")
    object.__setattr__(h, "_by_key", by_key)
    object.__setattr__(h, "_children", {k: tuple(v) for k, v in children.items()})
    object.__setattr__(h, "_paths", tuple(_enumerate(h)))


def _enumerate(h: LabelHierarchy) -> list[SensePath]:
    paths: list[SensePath] = []

    def walk(chain: tuple[LabelNode, ...]) -> None:
        node = chain[-1]
        if node.depth == h.depth:
            paths.append(SensePath(nodes=chain, id=len(paths)))
            return
        for child in h.children(node):
            walk(chain + (child,))

    for top in h.nodes_at(1):
        walk((top,))
    return paths


def enumerate_paths(h: LabelHierarchy) -> tuple[SensePath, ...]:
    """All root-to-leaf paths, depth-first in config order, ids 0..n-1."""
    return h.paths


def load_hierarchy(source: str | Path | dict) -> LabelHierarchy:
    """Load and validate a hierarchy.

    ``source`` may be a built-in name (``pdtb2``, ``conll16``), a path to a
    JSON config document, or an already-parsed config dict.
    """
    if isinstance(source, str) and source in BUILTIN_CONFIGS:
        doc = BUILTIN_CONFIGS[source]
    elif isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        if not path.exists():
            raise HierarchyError(
                f"unknown hierarchy {source!r}: not a built-in name "
                f"({', '.join(sorted(BUILTIN_CONFIGS))}) and no such file"
            )
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise HierarchyError(f"hierarchy config {path} is not valid JSON: {exc}") from exc
    try:
        nodes = tuple(
            LabelNode(
                label=str(n["label"]),
                depth=int(n["depth"]),
                parent=None if n.get("parent") is None else str(n["parent"]),
                surface=str(n.get("surface", n["label"])),
            )
            for n in doc["nodes"]
        )
        h = LabelHierarchy(
            name=str(doc["name"]),
            depth=int(doc["depth"]),
            nodes=nodes,
            comment=str(doc.get("comment", "")),
        )
    except (KeyError, TypeError) as exc:
        raise HierarchyError(f"malformed hierarchy config: {exc}") from exc
    _validate_and_index(h)
    return h


def to_config(h: LabelHierarchy) -> dict:
    """Inverse of load_hierarchy for round-tripping configs to JSON."""
    doc: dict = {
        "name": h.name,
        "depth": h.depth,
        "nodes": [
            {"label": n.label, "depth": n.depth, "parent": n.parent, "surface": n.surface}
            for n in h.nodes
        ],
    }
    if h.comment:
        doc["comment"] = h.comment
    return doc


def _nodes(rows: list[tuple[str, int, str | None, str | None]]) -> list[dict]:
    return [
        {"label": label, "depth": depth, "parent": parent, "surface": surface or label}
        for label, depth, parent, surface in rows
    ]


# PDTB 2.0 label word set: 4 top-level relations, 11 second-level subtypes,
# one connective per subtype.  The Contingency subtype "Pragmatic cause" is
# carried under the short canonical label "Pragmatic"; its verbalizer surface
# is "Justification".
BUILTIN_CONFIGS: dict[str, dict] = {
    "pdtb2": {
        "name": "pdtb2",
        "depth": 3,
        "comment": (
            "The 11-subtype PDTB 2.0 scheme. 'Pragmatic' abbreviates the corpus "
            "label 'Pragmatic cause'; its verbalizer surface is 'Justification'."
        ),
        "nodes": _nodes(
            [
                ("Comparison", 1, None, None),
                ("Contingency", 1, None, None),
                ("Expansion", 1, None, None),
                ("Temporal", 1, None, None),
                ("Concession", 2, "Comparison", None),
                ("Contrast", 2, "Comparison", None),
                ("Cause", 2, "Contingency", None),
                ("Pragmatic", 2, "Contingency", "Justification"),
                ("Alternative", 2, "Expansion", None),
                ("Conjunction", 2, "Expansion", None),
                ("Instantiation", 2, "Expansion", None),
                ("List", 2, "Expansion", None),
                ("Restatement", 2, "Expansion", None),
                ("Asynchronous", 2, "Temporal", None),
                ("Synchrony", 2, "Temporal", None),
                ("if", 3, "Concession", None),
                ("however", 3, "Contrast", None),
                ("so", 3, "Cause", None),
                ("indeed", 3, "Pragmatic", None),
                ("instead", 3, "Alternative", None),
                ("also", 3, "Conjunction", None),
                ("for example", 3, "Instantiation", None),
                ("and", 3, "List", None),
                ("specifically", 3, "Restatement", None),
                ("before", 3, "Asynchronous", None),
                ("when", 3, "Synchrony", None),
            ]
        ),
    },
    # CoNLL-2016 label word set: 4 top-level relations, 14 second-level
    # labels, one connective each.  Task write-ups sometimes count 15
    # second-level senses; this config enumerates the 14-label scheme used
    # for path prediction.
    "conll16": {
        "name": "conll16",
        "depth": 3,
        "comment": (
            "CoNLL-2016 shared-task scheme. Often described as 15 second-level "
            "senses; this config enumerates the 14 labels used for path prediction."
        ),
        "nodes": _nodes(
            [
                ("Comparison", 1, None, None),
                ("Contingency", 1, None, None),
                ("Expansion", 1, None, None),
                ("Temporal", 1, None, None),
                ("Concession", 2, "Comparison", None),
                ("Contrast", 2, "Comparison", None),
                ("Reason", 2, "Contingency", None),
                ("Result", 2, "Contingency", None),
                ("Condition", 2, "Contingency", None),
                ("Alternative", 2, "Expansion", None),
                ("Chosen", 2, "Expansion", None),
                ("Conjunction", 2, "Expansion", None),
                ("Instantiation", 2, "Expansion", None),
                ("Exception", 2, "Expansion", None),
                ("Restatement", 2, "Expansion", None),
                ("Precedence", 2, "Temporal", None),
                ("Succession", 2, "Temporal", None),
                ("Synchrony", 2, "Temporal", None),
                ("nonetheless", 3, "Concession", None),
                ("but", 3, "Contrast", None),
                ("because", 3, "Reason", None),
                ("so", 3, "Result", None),
                ("if", 3, "Condition", None),
                ("unless", 3, "Alternative", None),
                ("instead", 3, "Chosen", None),
                ("and", 3, "Conjunction", None),
                ("for example", 3, "Instantiation", None),
                ("except", 3, "Exception", None),
                ("indeed", 3, "Restatement", None),
                ("before", 3, "Precedence", None),
                ("previously", 3, "Succession", None),
                ("when", 3, "Synchrony", None),
            ]
        ),
    },
}
