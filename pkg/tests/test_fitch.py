import itertools

import numpy as np
import pytest

from parsimony_threshold import cf, parsimony, rng, trees
from parsimony_threshold.errors import ValidationError

import oracles
from conftest import random_irregular_cutset


def all_cutsets_of(tree):
    return [trees.validate_cutset(tree, ids) for ids in oracles.enumerate_cutsets(tree.depth_bound)]


class TestExhaustiveOracle:
    """Every cutset of the depth-3 tree, every boundary pattern: masks,
    score, and root set must match naive recursion."""

    def test_against_recursive_fitch(self, small_iid_tree):
        for cutset in all_cutsets_of(small_iid_tree):
            k = len(cutset.ids)
            levels = trees.tree_levels(small_iid_tree, cutset)
            patterns = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8)
            root_mask, score, _ = parsimony.fitch_masks(levels, patterns)
            order = [int(v) for v in trees.boundary_ids_in_order(levels)]
            for row, bits in enumerate(patterns):
                assignment = dict(zip(order, (int(b) for b in bits)))
                oracle_set, oracle_score = oracles.recursive_fitch(
                    small_iid_tree, cutset, assignment
                )
                got = parsimony.FitchSet(int(root_mask[row]))
                assert got.value == oracle_set
                assert int(score[row]) == oracle_score

    def test_flip_symmetry(self, small_iid_tree):
        cutset = trees.validate_cutset(small_iid_tree, [1, 5, 13, 14])
        levels = trees.tree_levels(small_iid_tree, cutset)
        patterns = np.array(list(itertools.product((0, 1), repeat=4)), dtype=np.uint8)
        mask, score, _ = parsimony.fitch_masks(levels, patterns)
        mask_f, score_f, _ = parsimony.fitch_masks(levels, 1 - patterns)
        np.testing.assert_array_equal(score, score_f)
        # swapping 0<->1 swaps the singleton masks and fixes the tie mask
        swap = {parsimony.MASK_ZERO: parsimony.MASK_ONE,
                parsimony.MASK_ONE: parsimony.MASK_ZERO,
                parsimony.MASK_BOTH: parsimony.MASK_BOTH}
        np.testing.assert_array_equal(np.vectorize(swap.get)(mask), mask_f)


class TestFitchSet:
    def test_values(self):
        assert parsimony.FitchSet(parsimony.MASK_ZERO).value == frozenset([0])
        assert parsimony.FitchSet(parsimony.MASK_ONE).value == frozenset([1])
        both = parsimony.FitchSet(parsimony.MASK_BOTH)
        assert both.value == frozenset([0, 1]) and both.is_ambiguous
        assert 0 in both and 1 in both
        assert 1 not in parsimony.FitchSet(parsimony.MASK_ZERO)
        with pytest.raises(ValidationError):
            parsimony.FitchSet(0)


class TestBottomUpMap:
    def test_levelmap_contents(self, small_iid_tree):
        cutset = trees.validate_cutset(small_iid_tree, [1, 5, 6])
        batch = cf.sample_states(small_iid_tree, cutset, seed=2, trials=1)
        assign = batch.assignment(0)
        fmap = parsimony.fitch_bottom_up(small_iid_tree, cutset, assign)
        for v in (0, 1, 2, 5, 6):
            assert v in fmap
        assert 3 not in fmap and 7 not in fmap
        for v in (1, 5, 6):
            assert fmap[v].value == frozenset([assign[v]])
        oracle_set, _ = oracles.recursive_fitch(small_iid_tree, cutset, assign)
        assert fmap[0].value == oracle_set

    def test_parsimony_score_function(self, small_iid_tree):
        cutset = trees.regular_cutset(small_iid_tree, 3)
        batch = cf.sample_states(small_iid_tree, cutset, seed=5, trials=1)
        assign = batch.assignment(0)
        _, oracle_score = oracles.recursive_fitch(small_iid_tree, cutset, dict(assign.items()))
        assert parsimony.parsimony_score(small_iid_tree, cutset, assign) == oracle_score

    def test_constant_pattern_scores_zero(self, small_iid_tree):
        cutset = trees.regular_cutset(small_iid_tree, 3)
        ones = {int(v): 1 for v in cutset.ids}
        assert parsimony.parsimony_score(small_iid_tree, cutset, ones) == 0
        fmap = parsimony.fitch_bottom_up(small_iid_tree, cutset, ones)
        assert fmap[0].value == frozenset([1])

    def test_bad_states_rejected(self, small_iid_tree):
        cutset = trees.regular_cutset(small_iid_tree, 3)
        missing = {int(v): 1 for v in cutset.ids[:-1]}
        with pytest.raises(ValidationError):
            parsimony.parsimony_score(small_iid_tree, cutset, missing)
        wrong_value = {int(v): 2 for v in cutset.ids}
        with pytest.raises(ValidationError):
            parsimony.parsimony_score(small_iid_tree, cutset, wrong_value)


class TestTieBreak:
    def test_matches_coin_stream(self):
        tie = parsimony.FitchSet(parsimony.MASK_BOTH)
        key = rng.derive_key(3, rng.TAG_TIE)
        for trial in range(50):
            est = parsimony.mp_root_estimate(tie, seed=3, trial=trial)
            assert est == rng.bit_scalar(key, trial)

    def test_singletons_ignore_coin(self):
        for seed in (0, 1):
            assert parsimony.mp_root_estimate(parsimony.FitchSet(parsimony.MASK_ZERO), seed=seed) == 0
            assert parsimony.mp_root_estimate(parsimony.FitchSet(parsimony.MASK_ONE), seed=seed) == 1

    def test_vector_matches_scalar(self):
        masks = np.array([1, 2, 3, 3, 1, 3, 2, 3], dtype=np.uint8)
        trials = np.arange(8, dtype=np.uint64)
        vec = parsimony.mp_root_estimates(masks, 7, trials)
        for i, m in enumerate(masks):
            assert int(vec[i]) == parsimony.mp_root_estimate(
                parsimony.FitchSet(int(m)), seed=7, trial=i
            )

    def test_tie_rate_is_fair(self):
        masks = np.full(20_000, parsimony.MASK_BOTH, dtype=np.uint8)
        est = parsimony.mp_root_estimates(masks, 11, np.arange(20_000, dtype=np.uint64))
        assert abs(float(est.mean()) - 0.5) < 4 * 0.5 / np.sqrt(20_000)


class TestReconstructBatch:
    def test_fields_consistent(self, small_iid_tree):
        cutset = trees.regular_cutset(small_iid_tree, 3)
        batch = cf.sample_states(small_iid_tree, cutset, seed=6, trials=200)
        rec = parsimony.reconstruct_batch(small_iid_tree, batch)
        assert rec.root_mask.shape == (200,)
        assert rec.estimate.shape == (200,)
        np.testing.assert_array_equal(rec.correct, rec.estimate == batch.root)
        # per-trial scalar reconstruction agrees with the batch
        for t_idx in range(20):
            fmap = parsimony.fitch_bottom_up(
                small_iid_tree, cutset, batch.assignment(t_idx)
            )
            assert fmap[0].mask == int(rec.root_mask[t_idx])
            est = parsimony.mp_root_estimate(fmap[0], seed=6, trial=t_idx)
            assert est == int(rec.estimate[t_idx])

    def test_offset_trials_use_absolute_coins(self, small_iid_tree):
        cutset = trees.regular_cutset(small_iid_tree, 3)
        whole = cf.sample_states(small_iid_tree, cutset, seed=6, trials=10)
        shifted = cf.sample_states(small_iid_tree, cutset, seed=6, trials=6, trial_offset=4)
        rec_whole = parsimony.reconstruct_batch(small_iid_tree, whole)
        rec_shift = parsimony.reconstruct_batch(small_iid_tree, shifted)
        np.testing.assert_array_equal(rec_whole.estimate[4:], rec_shift.estimate)

    def test_irregular_cutsets(self, small_iid_tree):
        for seed in range(4):
            cutset = random_irregular_cutset(small_iid_tree, seed + 100)
            batch = cf.sample_states(small_iid_tree, cutset, seed=1, trials=50)
            rec = parsimony.reconstruct_batch(small_iid_tree, batch)
            assert rec.correct.dtype == bool and rec.correct.shape == (50,)
