"""Scene-graph data model: boxes, nodes, predicate edges, and JSON serialization.

A scene graph is the interchange format between the analysis side (the
predictor decodes one from an image) and the synthesis side (the
reconstructor turns one back into a 3D scene). Boxes are center-based
(u, v, w, h) in pixels and may extend beyond the image bounds; clamping
happens only at annotation/render time.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "BBox",
    "CategoryRegistry",
    "Edge",
    "GraphFormatError",
    "Node",
    "Predicate",
    "SceneGraph",
    "decode_graph",
    "encode_graph",
    "invert",
    "iou",
    "validate",
]


class Predicate(enum.Enum):
    """Spatial relationship labels between two scene objects."""

    LEFT = "left"
    RIGHT = "right"
    FRONT = "front"
    BEHIND = "behind"
    ON = "on"

    def __str__(self) -> str:
        return self.value


_INVERSES = {
    Predicate.LEFT: Predicate.RIGHT,
    Predicate.RIGHT: Predicate.LEFT,
    Predicate.FRONT: Predicate.BEHIND,
    Predicate.BEHIND: Predicate.FRONT,
}


def invert(p: Predicate) -> Predicate | None:
    """Opposite predicate for the reversed pair, or None for asymmetric ones."""
    return _INVERSES.get(p)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned 2D box: center (u, v) plus width/height, in pixels."""

    u: float
    v: float
    w: float
    h: float

    def corners(self) -> tuple[float, float, float, float]:
        """(left, top, right, bottom) edge coordinates."""
        return (
            self.u - self.w / 2.0,
            self.v - self.h / 2.0,
            self.u + self.w / 2.0,
            self.v + self.h / 2.0,
        )

    def area(self) -> float:
        return self.w * self.h


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, computed analytically."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area() + b.area() - inter)


class CategoryRegistry:
    """Ordered, immutable list of object class names with stable indices."""

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate class names in registry: {names}")
        self._names = names
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        return self._index[name]

    def name(self, index: int) -> str:
        return self._names[index]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CategoryRegistry) and other._names == self._names

    def __hash__(self) -> int:
        return hash(self._names)

    def __repr__(self) -> str:
        return f"CategoryRegistry({list(self._names)!r})"


@dataclass(frozen=True)
class Node:
    """Detected or ground-truth object: class + box + confidence."""

    id: int
    category: int
    bbox: BBox
    score: float = 1.0


@dataclass(frozen=True)
class Edge:
    """Directed relationship triplet (subject, predicate, object)."""

    subject: int
    predicate: Predicate
    object: int
    score: float = 1.0


@dataclass
class SceneGraph:
    """Nodes plus predicate edges for one image of a given pixel size."""

    width: int
    height: int
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def node_by_id(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def triples(self) -> set[tuple[int, Predicate, int]]:
        return {(e.subject, e.predicate, e.object) for e in self.edges}


def validate(g: SceneGraph, registry: CategoryRegistry | None = None) -> list[str]:
    """Collect every invariant violation; an empty list means the graph is valid."""
    problems: list[str] = []
    seen_ids: set[int] = set()
    for n in g.nodes:
        if n.id in seen_ids:
            problems.append(f"duplicate node id {n.id}")
        seen_ids.add(n.id)
        if not (0.0 <= n.score <= 1.0):
            problems.append(f"node {n.id}: score {n.score} outside [0, 1]")
        if not (n.bbox.w > 0 and n.bbox.h > 0):
            problems.append(f"node {n.id}: non-positive box size {n.bbox.w}x{n.bbox.h}")
        if registry is not None and not (0 <= n.category < len(registry)):
            problems.append(f"node {n.id}: category {n.category} not in registry")
    seen_triples: set[tuple[int, Predicate, int]] = set()
    for e in g.edges:
        if e.subject == e.object:
            problems.append(f"self-edge ({e.subject}, {e.predicate}, {e.object})")
        for end in (e.subject, e.object):
            if end not in seen_ids:
                problems.append(f"edge ({e.subject}, {e.predicate}, {e.object}) references missing node {end}")
        if not (0.0 <= e.score <= 1.0):
            problems.append(f"edge ({e.subject}, {e.predicate}, {e.object}): score {e.score} outside [0, 1]")
        triple = (e.subject, e.predicate, e.object)
        if triple in seen_triples:
            problems.append(f"duplicate triple ({e.subject}, {e.predicate}, {e.object})")
        seen_triples.add(triple)
    return problems


class GraphFormatError(ValueError):
    """Raised by decode_graph on malformed input, with field context."""


GRAPH_FORMAT_VERSION = 1


def encode_graph(g: SceneGraph, registry: CategoryRegistry) -> str:
    """Serialize a graph to the versioned JSON document format."""
    doc = {
        "version": GRAPH_FORMAT_VERSION,
        "width": g.width,
        "height": g.height,
        "nodes": [
            {
                "id": n.id,
                "class": registry.name(n.category),
                "bbox": [n.bbox.u, n.bbox.v, n.bbox.w, n.bbox.h],
                "score": n.score,
            }
            for n in g.nodes
        ],
        "edges": [
            {"sub": e.subject, "pred": e.predicate.value, "obj": e.object, "score": e.score}
            for e in g.edges
        ],
    }
    return json.dumps(doc, sort_keys=True)


def _require(doc: dict, key: str, kind: type, where: str):
    if key not in doc:
        raise GraphFormatError(f"{where}: missing field '{key}'")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise GraphFormatError(f"{where}: field '{key}' must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise GraphFormatError(f"{where}: field '{key}' must be {kind.__name__}, got {value!r}")
    return value


def decode_graph(text: str, registry: CategoryRegistry) -> SceneGraph:
    """Parse the JSON document format back into a SceneGraph.

    Unknown class or predicate names, missing fields, and version
    mismatches all raise GraphFormatError naming the offending element.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError(f"top level must be an object, got {type(doc).__name__}")
    version = _require(doc, "version", int, "document")
    if version != GRAPH_FORMAT_VERSION:
        raise GraphFormatError(f"unsupported graph format version {version}")
    width = _require(doc, "width", int, "document")
    height = _require(doc, "height", int, "document")
    nodes_raw = _require(doc, "nodes", list, "document")
    edges_raw = _require(doc, "edges", list, "document")

    predicates = {p.value: p for p in Predicate}
    nodes = []
    for i, nd in enumerate(nodes_raw):
        where = f"nodes[{i}]"
        if not isinstance(nd, dict):
            raise GraphFormatError(f"{where}: must be an object")
        cls = _require(nd, "class", str, where)
        if cls not in registry:
            raise GraphFormatError(f"{where}: unknown class '{cls}'")
        bbox = _require(nd, "bbox", list, where)
        if len(bbox) != 4 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in bbox):
            raise GraphFormatError(f"{where}: bbox must be [u, v, w, h], got {bbox!r}")
        nodes.append(
            Node(
                id=_require(nd, "id", int, where),
                category=registry.index(cls),
                bbox=BBox(*(float(x) for x in bbox)),
                score=_require(nd, "score", float, where),
            )
        )
    edges = []
    for i, ed in enumerate(edges_raw):
        where = f"edges[{i}]"
        if not isinstance(ed, dict):
            raise GraphFormatError(f"{where}: must be an object")
        pred = _require(ed, "pred", str, where)
        if pred not in predicates:
            raise GraphFormatError(f"{where}: unknown predicate '{pred}'")
        edges.append(
            Edge(
                subject=_require(ed, "sub", int, where),
                predicate=predicates[pred],
                object=_require(ed, "obj", int, where),
                score=_require(ed, "score", float, where),
            )
        )
    return SceneGraph(width=width, height=height, nodes=nodes, edges=edges)
