"""Bottom-up maximum-parsimony reconstruction of the root state.

Per-vertex candidate sets are encoded as 2-bit masks (1 = {0}, 2 = {1},
3 = {0,1}): a parent takes the intersection of its children's masks when
it is non-empty and their union otherwise, and the minimum number of
state changes equals the number of union events. A tied root set is
resolved by a fair coin drawn from a reserved per-trial stream.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from . import rng
from .cf import SimulationBatch, StateAssignment
from .errors import RangeError, ValidationError
from .maps import LevelMap
from .trees import Cutset, TreeLevel, WeightedTree, tree_levels

MASK_ZERO = 1
MASK_ONE = 2
MASK_BOTH = 3


@dataclass(frozen=True)
class FitchSet:
    """Non-empty subset of {0, 1} as a 2-bit mask."""

    mask: int

    def __post_init__(self):
        if self.mask not in (MASK_ZERO, MASK_ONE, MASK_BOTH):
            raise ValidationError(f"candidate-set mask must be 1, 2, or 3, got {self.mask}")

    @property
    def value(self) -> frozenset:
        return frozenset(s for s in (0, 1) if self.mask >> s & 1)

    @property
    def is_ambiguous(self) -> bool:
        return self.mask == MASK_BOTH

    def __contains__(self, state) -> bool:
        return state in (0, 1) and bool(self.mask >> state & 1)

    def __repr__(self) -> str:
        return f"FitchSet({{{', '.join(str(s) for s in sorted(self.value))}}})"


def _boundary_bits(cutset: Cutset, states) -> np.ndarray:
    """Normalize single-trial cutset states to a (1, |cutset|) uint8 row."""
    if isinstance(states, SimulationBatch):
        raise ValidationError("pass a single trial (batch.assignment(t)) or a map/array")
    if isinstance(states, (StateAssignment, Mapping)):
        try:
            row = np.array([states[int(v)] for v in cutset.ids], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"missing state for cutset vertex {exc.args[0]}") from None
    else:
        row = np.asarray(states, dtype=np.int64)
        if row.shape != (len(cutset.ids),):
            raise ValidationError(
                f"expected {len(cutset.ids)} states in cutset order, got shape {row.shape}"
            )
    if not np.isin(row, (0, 1)).all():
        raise ValidationError("states must be 0 or 1")
    return row.astype(np.uint8)[None, :]


def fitch_masks(
    levels: list[TreeLevel] | tuple[TreeLevel, ...],
    boundary_bits: np.ndarray,
    keep_levels: bool = False,
):
    """Vectorized bottom-up pass.

    boundary_bits: (trials, k) uint8, columns in ascending-cutset-id
    order (level-major). Returns (root_mask (trials,), score (trials,),
    level_masks or None).
    """
    trials = boundary_bits.shape[0]
    n_levels = len(levels)
    offsets = np.zeros(n_levels + 1, dtype=np.int64)
    for i, lv in enumerate(levels):
        offsets[i + 1] = offsets[i] + int(lv.boundary_mask.sum())
    if offsets[-1] != boundary_bits.shape[1]:
        raise ValidationError(
            f"expected {offsets[-1]} boundary states, got {boundary_bits.shape[1]}"
        )
    score = np.zeros(trials, dtype=np.int64)
    level_masks: list[np.ndarray | None] = [None] * n_levels
    below: np.ndarray | None = None
    for li in range(n_levels - 1, -1, -1):
        lv = levels[li]
        cur = np.empty((trials, len(lv.vids)), dtype=np.uint8)
        bslice = boundary_bits[:, offsets[li]:offsets[li + 1]]
        cur[:, lv.boundary_mask] = bslice + 1
        if len(lv.internal_pos):
            left = below[:, 0::2]
            right = below[:, 1::2]
            inter = left & right
            union = left | right
            tied = inter == 0
            score += tied.sum(axis=1)
            cur[:, lv.internal_pos] = np.where(tied, union, inter)
        if keep_levels:
            level_masks[li] = cur
        below = cur
    return below[:, 0], score, (level_masks if keep_levels else None)


def fitch_bottom_up(tree: WeightedTree, cutset: Cutset, states) -> LevelMap:
    """Candidate sets for every vertex of the truncated tree, as a map
    vid -> FitchSet. `states` maps each cutset vertex to its state (or is
    an array in ascending cutset-id order)."""
    levels = tree_levels(tree, cutset)
    bits = _boundary_bits(cutset, states)
    _, _, level_masks = fitch_masks(levels, bits, keep_levels=True)
    return LevelMap(levels, [m[0] for m in level_masks], wrap=lambda m: FitchSet(int(m)))


def parsimony_score(tree: WeightedTree, cutset: Cutset, states) -> int:
    """Minimum number of state changes over all extensions of the cutset
    states to the full truncated tree."""
    levels = tree_levels(tree, cutset)
    bits = _boundary_bits(cutset, states)
    _, score, _ = fitch_masks(levels, bits)
    return int(score[0])


def mp_root_estimate(root_set, seed: int = 0, trial: int = 0) -> int:
    """Root estimate from the root candidate set; fair coin on a tie.

    The coin is a pure function of (seed, trial) on a reserved stream, so
    estimates are reproducible and independent of the chain randomness.
    """
    mask = root_set.mask if isinstance(root_set, FitchSet) else int(root_set)
    if mask == MASK_ZERO:
        return 0
    if mask == MASK_ONE:
        return 1
    if mask == MASK_BOTH:
        return rng.bit_scalar(rng.derive_key(seed, rng.TAG_TIE), trial)
    raise ValidationError(f"candidate-set mask must be 1, 2, or 3, got {mask}")


def mp_root_estimates(root_masks: np.ndarray, seed: int, trial_ids: np.ndarray) -> np.ndarray:
    """Vectorized mp_root_estimate over trials (bit-identical to it)."""
    coins = rng.hash_bit(rng.derive_key(seed, rng.TAG_TIE), trial_ids)
    singles = (root_masks - 1).astype(np.uint8)
    return np.where(root_masks == MASK_BOTH, coins, singles)


@dataclass(frozen=True)
class ReconstructionBatch:
    """Per-trial root reconstruction results for a simulation batch."""

    root_mask: np.ndarray   # (trials,) uint8 candidate-set masks
    score: np.ndarray       # (trials,) int64 parsimony scores
    estimate: np.ndarray    # (trials,) uint8 root estimates
    correct: np.ndarray     # (trials,) bool, estimate == true root


def reconstruct_batch(
    tree: WeightedTree,
    batch: SimulationBatch,
    levels: list[TreeLevel] | tuple[TreeLevel, ...] | None = None,
) -> ReconstructionBatch:
    """End-to-end: candidate sets, scores, tie-broken estimates, and
    comparison against the batch's true root states."""
    if levels is None:
        levels = tree_levels(tree, batch.cutset)
    root_mask, score, _ = fitch_masks(levels, batch.boundary)
    estimate = mp_root_estimates(root_mask, batch.seed, batch.trial_ids)
    correct = estimate == batch.root
    return ReconstructionBatch(root_mask=root_mask, score=score, estimate=estimate, correct=correct)
