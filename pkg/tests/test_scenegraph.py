from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenesynth.scenegraph import (
    BBox,
    CategoryRegistry,
    Edge,
    GraphFormatError,
    Node,
    Predicate,
    SceneGraph,
    decode_graph,
    encode_graph,
    invert,
    iou,
    validate,
)

REGISTRY = CategoryRegistry(["cube", "sphere", "cylinder"])


def pixel_count_iou(a: BBox, b: BBox) -> float:
    """Oracle: count unit pixels inside each integer-aligned box on a grid."""
    ax0, ay0, ax1, ay1 = (int(c) for c in a.corners())
    bx0, by0, bx1, by1 = (int(c) for c in b.corners())
    x0, y0 = min(ax0, bx0), min(ay0, by0)
    x1, y1 = max(ax1, bx1), max(ay1, by1)
    xs, ys = np.meshgrid(np.arange(x0, x1) + 0.5, np.arange(y0, y1) + 0.5)
    in_a = (xs > ax0) & (xs < ax1) & (ys > ay0) & (ys < ay1)
    in_b = (xs > bx0) & (xs < bx1) & (ys > by0) & (ys < by1)
    union = (in_a | in_b).sum()
    return float((in_a & in_b).sum() / union) if union else 0.0


class TestIou:
    def test_identity(self):
        a = BBox(2, 2, 4, 4)
        assert iou(a, a) == 1.0

    def test_disjoint(self):
        assert iou(BBox(2, 2, 4, 4), BBox(100, 100, 4, 4)) == 0.0

    def test_partial_overlap_matches_pixel_oracle(self):
        a, b = BBox(2, 2, 4, 4), BBox(4, 2, 4, 4)
        assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)
        assert iou(a, b) == pytest.approx(pixel_count_iou(a, b), abs=1e-9)

    @given(st.data())
    @settings(max_examples=200, deadline=None)
    def test_integer_boxes_match_pixel_oracle(self, data):
        def int_box():
            w = data.draw(st.integers(1, 12))
            h = data.draw(st.integers(1, 12))
            # keep centers on the integer/half-integer lattice so corners are integers
            x0 = data.draw(st.integers(-10, 10))
            y0 = data.draw(st.integers(-10, 10))
            return BBox(x0 + w / 2, y0 + h / 2, w, h)

        a, b = int_box(), int_box()
        assert iou(a, b) == pytest.approx(pixel_count_iou(a, b), abs=1e-9)

    @given(st.data())
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_bounded(self, data):
        def box():
            return BBox(
                data.draw(st.floats(-50, 50)),
                data.draw(st.floats(-50, 50)),
                data.draw(st.floats(0.01, 40)),
                data.draw(st.floats(0.01, 40)),
            )

        a, b = box(), box()
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0
        assert iou(a, a) == pytest.approx(1.0)


class TestInvert:
    @pytest.mark.parametrize(
        "p,expected",
        [
            (Predicate.LEFT, Predicate.RIGHT),
            (Predicate.RIGHT, Predicate.LEFT),
            (Predicate.FRONT, Predicate.BEHIND),
            (Predicate.BEHIND, Predicate.FRONT),
            (Predicate.ON, None),
        ],
    )
    def test_definition(self, p, expected):
        assert invert(p) is expected

    def test_involution(self):
        for p in (Predicate.LEFT, Predicate.RIGHT, Predicate.FRONT, Predicate.BEHIND):
            assert invert(invert(p)) is p


def node(i, cat=0, u=10, v=10, w=4, h=4, score=1.0):
    return Node(id=i, category=cat, bbox=BBox(u, v, w, h), score=score)


class TestValidate:
    def test_empty_graph_ok(self):
        assert validate(SceneGraph(64, 64)) == []

    def test_edge_to_missing_node(self):
        g = SceneGraph(64, 64, nodes=[node(0)], edges=[Edge(0, Predicate.LEFT, 7)])
        problems = validate(g)
        assert len(problems) == 1
        assert "missing node 7" in problems[0]

    def test_self_edge(self):
        g = SceneGraph(64, 64, nodes=[node(0)], edges=[Edge(0, Predicate.LEFT, 0)])
        problems = validate(g)
        assert len(problems) == 1
        assert "self-edge" in problems[0]

    def test_duplicate_triple_and_node_id(self):
        g = SceneGraph(
            64,
            64,
            nodes=[node(0), node(0, cat=1)],
            edges=[Edge(0, Predicate.ON, 0), Edge(0, Predicate.ON, 0)],
        )
        msgs = " | ".join(validate(g))
        assert "duplicate node id" in msgs
        assert "duplicate triple" in msgs

    def test_same_pair_different_predicates_allowed(self):
        g = SceneGraph(
            64,
            64,
            nodes=[node(0), node(1)],
            edges=[Edge(0, Predicate.LEFT, 1), Edge(0, Predicate.FRONT, 1)],
        )
        assert validate(g) == []

    def test_score_out_of_range(self):
        g = SceneGraph(64, 64, nodes=[node(0, score=1.5)])
        assert any("score" in p for p in validate(g))


@st.composite
def graphs(draw):
    n = draw(st.integers(0, 6))
    nodes = []
    for i in range(n):
        nodes.append(
            Node(
                id=i,
                category=draw(st.integers(0, 2)),
                bbox=BBox(
                    draw(st.floats(0, 64)),
                    draw(st.floats(0, 64)),
                    draw(st.floats(0.5, 30)),
                    draw(st.floats(0.5, 30)),
                ),
                score=draw(st.floats(0, 1)),
            )
        )
    edges = []
    if n >= 2:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for sub, obj in pairs:
            for pred in draw(st.sets(st.sampled_from(list(Predicate)), max_size=2)):
                edges.append(Edge(sub, pred, obj, draw(st.floats(0, 1))))
    return SceneGraph(64, 64, nodes=nodes, edges=edges)


class TestSerialization:
    @given(graphs())
    @settings(max_examples=100, deadline=None)
    def test_round_trip_identity(self, g):
        assert validate(g, REGISTRY) == []
        back = decode_graph(encode_graph(g, REGISTRY), REGISTRY)
        assert back == g  # includes node and edge order

    def test_three_node_graph_preserves_edge_order(self):
        g = SceneGraph(
            64,
            64,
            nodes=[node(0), node(1, cat=1), node(2, cat=2)],
            edges=[Edge(2, Predicate.BEHIND, 0, 0.5), Edge(0, Predicate.LEFT, 1, 0.25)],
        )
        back = decode_graph(encode_graph(g, REGISTRY), REGISTRY)
        assert [ (e.subject, e.predicate, e.object) for e in back.edges ] == [
            (2, Predicate.BEHIND, 0),
            (0, Predicate.LEFT, 1),
        ]

    def test_truncated_document(self):
        text = encode_graph(SceneGraph(64, 64, nodes=[node(0)]), REGISTRY)
        with pytest.raises(GraphFormatError, match="line"):
            decode_graph(text[: len(text) // 2], REGISTRY)

    def test_unknown_class(self):
        text = '{"version":1,"width":64,"height":64,"nodes":[{"id":0,"class":"pyramid","bbox":[1,1,2,2],"score":1.0}],"edges":[]}'
        with pytest.raises(GraphFormatError, match="pyramid"):
            decode_graph(text, REGISTRY)

    def test_unknown_predicate(self):
        text = (
            '{"version":1,"width":64,"height":64,'
            '"nodes":[{"id":0,"class":"cube","bbox":[1,1,2,2],"score":1.0},'
            '{"id":1,"class":"cube","bbox":[9,9,2,2],"score":1.0}],'
            '"edges":[{"sub":0,"pred":"above","obj":1,"score":1.0}]}'
        )
        with pytest.raises(GraphFormatError, match="above"):
            decode_graph(text, REGISTRY)

    def test_version_and_missing_field(self):
        with pytest.raises(GraphFormatError, match="version"):
            decode_graph('{"version":9,"width":64,"height":64,"nodes":[],"edges":[]}', REGISTRY)
        with pytest.raises(GraphFormatError, match="missing field"):
            decode_graph('{"version":1,"width":64,"nodes":[],"edges":[]}', REGISTRY)


def test_registry_rejects_duplicates():
    with pytest.raises(ValueError):
        CategoryRegistry(["cube", "cube"])
