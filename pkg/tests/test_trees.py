import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsimony_threshold import trees
from parsimony_threshold.errors import (
    CoverError,
    MinimalityError,
    RangeError,
    ResourceLimitError,
    ValidationError,
)

from conftest import random_irregular_cutset

VID = st.integers(min_value=0, max_value=(1 << 40) - 2)


class TestVertexAlgebra:
    def test_known_values(self):
        assert [trees.level(v) for v in (0, 1, 2, 3, 6, 7, 14)] == [0, 1, 1, 2, 2, 3, 3]
        assert trees.children(0) == (1, 2)
        assert trees.children(2) == (5, 6)
        assert trees.parent(5) == 2
        assert trees.sibling(5) == 6
        assert trees.sibling(6) == 5
        assert trees.path_to_root(11) == [11, 5, 2, 0]
        assert trees.ancestor_at_level(11, 1) == 2
        assert trees.is_ancestor(2, 11) and not trees.is_ancestor(1, 11)
        assert trees.graph_distance(3, 4) == 2
        assert trees.graph_distance(0, 0) == 0
        assert trees.graph_distance(7, 2) == trees.graph_distance(2, 7) == 4

    def test_root_has_no_parent(self):
        with pytest.raises(RangeError):
            trees.parent(0)
        with pytest.raises(RangeError):
            trees.sibling(0)

    @given(v=VID)
    @settings(max_examples=300, deadline=None)
    def test_parent_child_roundtrip(self, v):
        left, right = trees.children(v)
        assert trees.parent(left) == v and trees.parent(right) == v
        assert trees.level(left) == trees.level(v) + 1
        assert trees.sibling(left) == right

    @given(v=VID)
    @settings(max_examples=300, deadline=None)
    def test_path_and_ancestors(self, v):
        path = trees.path_to_root(v)
        assert path[0] == v and path[-1] == 0
        assert len(path) == trees.level(v) + 1
        for lv, anc in enumerate(reversed(path)):
            assert trees.ancestor_at_level(v, lv) == anc
            assert trees.is_ancestor(anc, v) or anc == v


class TestWeightModels:
    def test_mean_weights_exact(self):
        assert trees.mean_weight(trees.Yule(6.0)) == 0.75
        assert trees.mean_weight(trees.Fixed(0.9)) == 0.9
        assert trees.mean_weight(trees.IID(trees.Uniform(0.5, 1.0))) == 0.75
        assert trees.mean_weight(trees.IID(trees.PointMass(0.6))) == 0.6
        two = trees.IID(trees.TwoPoint(0.2, 0.8, 0.25))  # high value w.p. 0.25
        assert math.isclose(trees.mean_weight(two), 0.75 * 0.2 + 0.25 * 0.8)

    def test_yule_sample_mean(self):
        ids = np.arange(1, 200_001, dtype=np.int64)
        w = trees.sample_weights(trees.Yule(6.0), seed=5, ids=ids)
        assert abs(float(w.mean()) - 0.75) < 4 * float(w.std()) / math.sqrt(len(ids))

    def test_samples_in_support(self):
        ids = np.arange(1, 50_001, dtype=np.int64)
        for model, lo, hi in [
            (trees.IID(trees.Uniform(0.3, 0.8)), 0.3, 0.8),
            (trees.Yule(4.0), 0.0, 1.0),
            (trees.IID(trees.ExpDecay(3.0)), 0.0, 1.0),
        ]:
            w = trees.sample_weights(model, seed=3, ids=ids)
            assert float(w.min()) > lo and float(w.max()) <= hi

    def test_spec_roundtrip(self):
        for spec in ["fixed:0.8", "yule:6", "iid:point:0.5", "iid:uniform:0.25,0.75",
                     "iid:expdecay:2.5", "iid:twopoint:0.2,0.9,0.3"]:
            model = trees.parse_model(spec)
            again = trees.parse_model(trees.model_spec(model))
            assert again == model

    def test_bad_specs_rejected(self):
        for bad in ["nope", "fixed:0", "fixed:1.5", "yule:-1", "iid:uniform:0.9,0.2",
                    "iid:uniform:0.5", "fixed:abc", "iid:twopoint:0.5,0.6,1.5", ""]:
            with pytest.raises(ValidationError):
                trees.parse_model(bad)


class TestBuildTree:
    def test_deterministic_and_prefix_stable(self):
        a = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 4, seed=9)
        b = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 4, seed=9)
        np.testing.assert_array_equal(a.weights, b.weights)
        deeper = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 6, seed=9)
        np.testing.assert_array_equal(deeper.weights[: a.heap_size], a.weights)

    def test_seed_changes_weights(self):
        a = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 4, seed=9)
        c = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 4, seed=10)
        assert not np.array_equal(a.weights, c.weights)

    def test_truncate(self):
        full = trees.build_tree(trees.IID(trees.Uniform(0.2, 1.0)), 6, seed=9)
        cut = trees.truncate(full, 3)
        assert cut.depth_bound == 3
        np.testing.assert_array_equal(
            cut.weights[: cut.heap_size], full.weights[: cut.heap_size]
        )
        assert list(cut.boundary.ids) == list(range(7, 15))
        with pytest.raises(RangeError):
            trees.truncate(full, 7)

    def test_depth_cap(self):
        with pytest.raises(ResourceLimitError):
            trees.build_tree(trees.Fixed(0.5), 26)
        with pytest.raises(ResourceLimitError):
            trees.build_tree(trees.Fixed(0.5), 11, depth_cap=10)

    def test_weight_accessors(self):
        t = trees.build_tree(trees.Fixed(0.8), 2)
        assert t.weight(3) == 0.8
        assert t.num_vertices == 7 and t.heap_size == 7
        assert t.in_tree(6) and not t.in_tree(7)
        with pytest.raises(RangeError):
            t.weight(0)  # the root has no incoming edge
        with pytest.raises(ValidationError):
            t.weight(7)


class TestCutsets:
    def test_regular(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        cs = trees.regular_cutset(t, 2)
        assert list(cs.ids) == [3, 4, 5, 6]
        assert cs.min_level == cs.max_level == 2
        assert trees.regular_cutset(t, 0).ids.tolist() == [0]
        with pytest.raises(RangeError):
            trees.regular_cutset(t, 4)

    def test_validate_irregular(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        cs = trees.validate_cutset(t, [1, 5, 13, 14])
        assert list(cs.ids) == [1, 5, 13, 14]
        assert cs.min_level == 1 and cs.max_level == 3

    def test_duplicate_rejected(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        with pytest.raises(ValidationError):
            trees.validate_cutset(t, [1, 5, 5, 13, 14])

    def test_too_deep_rejected(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        with pytest.raises(ValidationError):
            trees.validate_cutset(t, [1, 5, 13, 29])

    def test_antichain_violation(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        with pytest.raises(MinimalityError) as exc_info:
            trees.validate_cutset(t, [1, 2, 5])
        assert exc_info.value.removable_vertex == 5

    def test_cover_violation(self):
        t = trees.build_tree(trees.Fixed(0.8), 3)
        with pytest.raises(CoverError) as exc_info:
            trees.validate_cutset(t, [1, 5])
        escaped = exc_info.value.escaping_vertex
        assert trees.level(escaped) <= 3
        assert not any(trees.is_ancestor(v, escaped) or v == escaped for v in (1, 5))

    def test_cutset_equality_and_membership(self):
        t = trees.build_tree(trees.Fixed(0.8), 2)
        a = trees.validate_cutset(t, [1, 5, 6])
        b = trees.validate_cutset(t, [6, 1, 5])
        assert a == b and hash(a) == hash(b)
        assert 5 in a and 2 not in a

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_random_refinements_validate(self, seed):
        t = trees.build_tree(trees.Fixed(0.9), 4)
        cs = random_irregular_cutset(t, seed)
        ids = set(int(v) for v in cs.ids)
        # every deepest-level vertex must have an ancestor-or-self in the cutset
        for v in range((1 << 4) - 1, (1 << 5) - 1):
            assert any(a in ids for a in trees.path_to_root(v))


class TestTreeLevels:
    def test_structure(self, small_iid_tree):
        t = small_iid_tree
        cs = trees.validate_cutset(t, [1, 5, 6])
        levels = trees.tree_levels(t, cs)
        assert [list(lv.vids) for lv in levels] == [[0], [1, 2], [5, 6]]
        assert list(levels[0].boundary_mask) == [False]
        assert list(levels[1].boundary_mask) == [True, False]
        assert list(levels[2].boundary_mask) == [True, True]
        # internal vertices' children interleave to exactly the next level
        assert [v for u in levels[1].vids[~levels[1].boundary_mask]
                for v in trees.children(int(u))] == [5, 6]

    def test_boundary_order(self, small_iid_tree):
        cs = trees.validate_cutset(small_iid_tree, [1, 5, 6])
        order = trees.boundary_ids_in_order(trees.tree_levels(small_iid_tree, cs))
        assert list(order) == [1, 5, 6]


class TestJson:
    def test_roundtrip_bit_exact(self, small_iid_tree):
        doc = trees.tree_to_document(small_iid_tree)
        again = trees.tree_from_document(doc)
        np.testing.assert_array_equal(again.weights, small_iid_tree.weights)
        assert again.boundary == small_iid_tree.boundary

    def test_text_roundtrip(self, small_iid_tree):
        text = trees.tree_to_json(small_iid_tree)
        again = trees.tree_from_json(text)
        np.testing.assert_array_equal(again.weights, small_iid_tree.weights)

    def test_files(self, tmp_path, small_iid_tree):
        path = str(tmp_path / "tree.json")
        trees.write_tree(small_iid_tree, path)
        again = trees.read_tree(path)
        np.testing.assert_array_equal(again.weights, small_iid_tree.weights)

    def test_irregular_document_nulls(self):
        t = trees.build_tree(trees.Fixed(0.8), 2)
        cs = trees.validate_cutset(t, [1, 5, 6])
        padded = t.weights[: t.heap_size].copy()
        padded[[3, 4]] = np.nan  # vertices below the cutset carry no weight
        sub = trees.WeightedTree(2, cs, padded)
        weights = trees.tree_to_document(sub)["weights"]
        # grid entry i is the edge weight into vertex i + 1 (no root edge)
        assert len(weights) == sub.heap_size - 1
        assert weights[0] == 0.8 and weights[4] == 0.8
        assert weights[2] is None and weights[3] is None  # vertices 3, 4

    def test_malformed_documents(self):
        with pytest.raises(ValidationError):
            trees.tree_from_document({"weights": [None, 0.5]})  # not a full level set
        with pytest.raises(ValidationError):
            trees.tree_from_document({})
        with pytest.raises(ValidationError):
            trees.tree_from_json("[1, 2")

    def test_rejects_weight_below_boundary(self):
        t = trees.build_tree(trees.Fixed(0.8), 2)
        doc = trees.tree_to_document(t)
        doc["cutset"] = [1, 5, 6]
        with pytest.raises(ValidationError):
            trees.tree_from_document(doc)  # weights 3, 4 sit below cutset vertex 1

    def test_json_is_plain_ascii(self, small_iid_tree):
        text = trees.tree_to_json(small_iid_tree)
        parsed = json.loads(text)
        assert set(parsed) >= {"weights", "cutset"}
