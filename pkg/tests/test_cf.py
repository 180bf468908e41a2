import math

import numpy as np
import pytest

from parsimony_threshold import cf, trees
from parsimony_threshold.errors import RangeError, ValidationError

from conftest import random_irregular_cutset


def test_probability_maps():
    assert cf.substitution_probability(1.0) == 0.0
    assert cf.substitution_probability(0.5) == 0.25
    assert cf.agreement_probability(0.5) == 0.75
    assert cf.weight_for_substitution_probability(0.25) == 0.5
    for w in (0.1, 0.37, 0.99):
        p = cf.substitution_probability(w)
        assert math.isclose(cf.weight_for_substitution_probability(p), w)
    with pytest.raises(RangeError):
        cf.substitution_probability(1.5)
    with pytest.raises(RangeError):
        cf.weight_for_substitution_probability(0.7)


def test_root_is_uniform():
    t = trees.build_tree(trees.Fixed(0.9), 1)
    batch = cf.sample_states(t, seed=11, trials=40_000, keep_internal=True)
    roots = batch.level_states[0][:, 0]
    assert abs(float(roots.mean()) - 0.5) < 4 * 0.5 / math.sqrt(batch.trials)


def test_edge_agreement_matches_weight():
    w = 0.62
    t = trees.build_tree(trees.Fixed(w), 1)
    batch = cf.sample_states(t, seed=3, trials=50_000, keep_internal=True)
    roots = batch.level_states[0][:, 0]
    q = cf.agreement_probability(w)
    for j in range(2):
        agree = (batch.boundary[:, j] == roots).mean()
        assert abs(float(agree) - q) < 4 * math.sqrt(q * (1 - q) / batch.trials)


def test_children_conditionally_independent():
    w = 0.7
    t = trees.build_tree(trees.Fixed(w), 1)
    batch = cf.sample_states(t, seed=5, trials=60_000, keep_internal=True)
    roots = batch.level_states[0][:, 0]
    q = cf.agreement_probability(w)
    for r in (0, 1):
        sel = roots == r
        n = int(sel.sum())
        both_agree = float(((batch.boundary[sel, 0] == r) & (batch.boundary[sel, 1] == r)).mean())
        assert abs(both_agree - q * q) < 4 * math.sqrt(q * q * (1 - q * q) / n)


def test_trial_offset_composition():
    t = trees.build_tree(trees.IID(trees.Uniform(0.4, 1.0)), 4, seed=2)
    whole = cf.sample_states(t, seed=9, trials=10)
    first = cf.sample_states(t, seed=9, trials=4)
    rest = cf.sample_states(t, seed=9, trials=6, trial_offset=4)
    np.testing.assert_array_equal(whole.boundary[:4], first.boundary)
    np.testing.assert_array_equal(whole.boundary[4:], rest.boundary)
    np.testing.assert_array_equal(whole.root[:4], first.root)
    np.testing.assert_array_equal(whole.root[4:], rest.root)


def test_seed_sensitivity():
    t = trees.build_tree(trees.Fixed(0.8), 4)
    a = cf.sample_states(t, seed=1, trials=64)
    b = cf.sample_states(t, seed=2, trials=64)
    assert not np.array_equal(a.boundary, b.boundary)


def test_irregular_cutset_states(small_iid_tree):
    cs = trees.validate_cutset(small_iid_tree, [1, 5, 13, 14])
    batch = cf.sample_states(small_iid_tree, cs, seed=7, trials=8, keep_internal=True)
    assert batch.boundary.shape == (8, 4)
    # boundary columns must match the level-state arrays at cutset positions
    for t_idx in range(8):
        assign = batch.assignment(t_idx)
        for j, v in enumerate(cs.ids):
            assert assign[int(v)] == int(batch.boundary[t_idx, j])


def test_assignment_mapping_api(small_iid_tree):
    batch = cf.sample_states(small_iid_tree, seed=7, trials=2, keep_internal=True)
    assign = batch.assignment(0)
    assert len(assign) == 15
    assert set(iter(assign)) == set(range(15))
    assert 3 in assign and 99 not in assign
    with pytest.raises(KeyError):
        assign[99]
    items = dict(assign.items())
    assert all(items[v] in (0, 1) for v in range(15))
    with pytest.raises(RangeError):
        batch.assignment(5)


def test_states_depend_only_on_ancestor_draws():
    """Sampling with a deeper cutset must not change shallower states:
    vertex randomness is keyed by (seed, trial, vertex)."""
    t = trees.build_tree(trees.IID(trees.Uniform(0.4, 1.0)), 4, seed=6)
    shallow = cf.sample_states(t, trees.regular_cutset(t, 2), seed=3, trials=5)
    deep = cf.sample_states(t, trees.regular_cutset(t, 4), seed=3, trials=5, keep_internal=True)
    level2 = deep.level_states[2]
    np.testing.assert_array_equal(shallow.boundary, level2)


def test_boundary_matches_keep_internal_tail(small_iid_tree):
    plain = cf.sample_states(small_iid_tree, seed=4, trials=6)
    kept = cf.sample_states(small_iid_tree, seed=4, trials=6, keep_internal=True)
    np.testing.assert_array_equal(plain.boundary, kept.boundary)
    np.testing.assert_array_equal(plain.root, kept.root)


def test_zero_trials_and_bad_args(small_iid_tree):
    batch = cf.sample_states(small_iid_tree, trials=0)
    assert batch.trials == 0 and batch.boundary.shape[0] == 0
    with pytest.raises(RangeError):
        cf.sample_states(small_iid_tree, trials=-1)
    with pytest.raises(RangeError):
        cf.sample_states(small_iid_tree, trial_offset=-2)


def test_weight_one_copies_weight_epsilon_randomizes():
    t1 = trees.build_tree(trees.Fixed(1.0), 5)
    batch = cf.sample_states(t1, seed=8, trials=200)
    same = batch.boundary == batch.root[:, None]
    assert bool(same.all())
    t0 = trees.build_tree(trees.Fixed(1e-12), 3, seed=0)
    b0 = cf.sample_states(t0, seed=8, trials=50_000)
    agree = float((b0.boundary[:, 0] == b0.root).mean())
    assert abs(agree - 0.5) < 4 * 0.5 / math.sqrt(b0.trials)


def test_random_cutsets_shapes(small_iid_tree):
    for seed in range(5):
        cs = random_irregular_cutset(small_iid_tree, seed)
        batch = cf.sample_states(small_iid_tree, cs, seed=1, trials=3)
        assert batch.boundary.shape == (3, len(cs.ids))
