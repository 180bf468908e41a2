"""Forward simulation of the two-state symmetric chain on a weighted tree.

The root state is uniform on {0, 1}; each child copies its parent with
probability equal to its edge weight w and is resampled uniformly
otherwise, so it disagrees with the parent with probability (1 - w) / 2.

All randomness is counter-based: the bits consumed by (seed, trial,
vertex) never depend on batch boundaries, so chunked or parallel runs
reproduce single-shot runs bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import RangeError, ResourceLimitError, ValidationError
from .trees import Cutset, TreeLevel, WeightedTree, tree_levels

# soft cap on trials x vertices cells handled by one sample_states call
_MAX_CELLS = 200_000_000


def substitution_probability(w: float) -> float:
    """Probability that a child's state differs from its parent's."""
    if not 0.0 <= w <= 1.0:
        raise RangeError(f"edge weight must sit in [0, 1], got {w}")
    return (1.0 - w) / 2.0


def agreement_probability(w: float) -> float:
    """Complementary probability that a child copies its parent."""
    if not 0.0 <= w <= 1.0:
        raise RangeError(f"edge weight must sit in [0, 1], got {w}")
    return (1.0 + w) / 2.0


def weight_for_substitution_probability(p: float) -> float:
    """Inverse map: the edge weight whose flip probability is p."""
    if not 0.0 <= p <= 0.5:
        raise RangeError(f"flip probability must sit in [0, 1/2], got {p}")
    return 1.0 - 2.0 * p


class StateAssignment:
    """States of one trial as a read-only map vertex id -> {0, 1}.

    Defined exactly on the vertices of the tree truncated at the sampled
    cutset; stored bit-packed.
    """

    __slots__ = ("_vids", "_packed", "_n")

    def __init__(self, vids: np.ndarray, states: np.ndarray):
        vids = np.asarray(vids, dtype=np.int64)
        states = np.asarray(states, dtype=np.uint8)
        if vids.shape != states.shape or vids.ndim != 1:
            raise ValidationError("state assignment needs matching flat id/state arrays")
        order = np.argsort(vids)
        self._vids = vids[order]
        self._packed = np.packbits(states[order])
        self._n = len(vids)

    def __len__(self) -> int:
        return self._n

    def __iter__(self):
        return iter(int(v) for v in self._vids)

    def __contains__(self, v) -> bool:
        i = int(np.searchsorted(self._vids, v))
        return i < self._n and int(self._vids[i]) == int(v)

    def __getitem__(self, v) -> int:
        i = int(np.searchsorted(self._vids, v))
        if i >= self._n or int(self._vids[i]) != int(v):
            raise KeyError(v)
        return int((self._packed[i >> 3] >> (7 - (i & 7))) & 1)

    def items(self):
        bits = np.unpackbits(self._packed, count=self._n)
        return [(int(v), int(b)) for v, b in zip(self._vids, bits)]

    def __repr__(self) -> str:
        return f"StateAssignment(<{self._n} vertices>)"


@dataclass(frozen=True)
class SimulationBatch:
    """Vectorized trials of the chain on one tree/cutset.

    boundary[t, j] is the state of cutset vertex cutset.ids[j] in trial
    trial_offset + t; root[t] is the true root state of that trial.
    """

    cutset: Cutset
    seed: int
    trial_offset: int
    root: np.ndarray      # (trials,) uint8
    boundary: np.ndarray  # (trials, |cutset|) uint8
    levels: tuple[TreeLevel, ...] | None = None
    level_states: tuple[np.ndarray, ...] | None = None

    @property
    def trials(self) -> int:
        return len(self.root)

    @property
    def trial_ids(self) -> np.ndarray:
        return np.arange(self.trial_offset, self.trial_offset + self.trials, dtype=np.uint64)

    def assignment(self, t: int) -> StateAssignment:
        """Single-trial view as a vertex->state map."""
        if not 0 <= t < self.trials:
            raise RangeError(f"trial index {t} out of range")
        if self.level_states is not None:
            vids = np.concatenate([lv.vids for lv in self.levels])
            states = np.concatenate([s[t] for s in self.level_states])
        else:
            vids = self.cutset.ids
            states = self.boundary[t]
        return StateAssignment(vids, states)


def sample_states(
    tree: WeightedTree,
    cutset: Cutset | None = None,
    seed: int = 0,
    trials: int = 1,
    trial_offset: int = 0,
    keep_internal: bool = False,
    levels: list[TreeLevel] | tuple[TreeLevel, ...] | None = None,
) -> SimulationBatch:
    """Run `trials` independent chains and collect cutset (and optionally
    all internal) states.

    Trial t of a call with trial_offset=k is identical to trial t+k of a
    call with trial_offset=0: results depend only on (seed, absolute
    trial index, vertex id).
    """
    if cutset is None:
        cutset = tree.boundary
    if trials < 0:
        raise RangeError(f"trials must be non-negative, got {trials}")
    if trial_offset < 0:
        raise RangeError(f"trial offset must be non-negative, got {trial_offset}")
    if levels is None:
        levels = tree_levels(tree, cutset)
    k = len(cutset.ids)
    if trials * max(1, 2 * k - 1) > _MAX_CELLS:
        raise ResourceLimitError(
            f"{trials} trials x {k} cutset vertices exceeds the in-memory cap; "
            "split into chunks with trial_offset"
        )
    trial_ids = np.arange(trial_offset, trial_offset + trials, dtype=np.uint64)
    key_root = rng.derive_key(seed, rng.TAG_ROOT)
    key_copy = rng.derive_key(seed, rng.TAG_COPY)
    key_refresh = rng.derive_key(seed, rng.TAG_REFRESH)

    cur = rng.hash_bit(key_root, trial_ids)[:, None] if trials else np.zeros((0, 1), np.uint8)
    root = cur[:, 0].copy()
    boundary_chunks: list[np.ndarray] = []
    level_states: list[np.ndarray] = []
    for li, lv in enumerate(levels):
        if keep_internal:
            level_states.append(cur)
        if lv.boundary_mask.any():
            boundary_chunks.append(cur[:, lv.boundary_mask])
        if len(lv.internal_pos) == 0:
            break
        child_vids = levels[li + 1].vids
        parent_states = np.repeat(cur[:, lv.internal_pos], 2, axis=1)
        weights = tree.weights[child_vids]
        copy_draw = rng.hash_unit_grid(key_copy, trial_ids, child_vids.astype(np.uint64))
        refresh = rng.hash_bit_grid(key_refresh, trial_ids, child_vids.astype(np.uint64))
        cur = np.where(copy_draw < weights[None, :], parent_states, refresh)
    boundary = (
        np.hstack(boundary_chunks) if boundary_chunks else np.zeros((trials, 0), np.uint8)
    )
    boundary.flags.writeable = False
    root.flags.writeable = False
    return SimulationBatch(
        cutset=cutset,
        seed=seed,
        trial_offset=trial_offset,
        root=root,
        boundary=boundary,
        levels=tuple(levels) if keep_internal else None,
        level_states=tuple(level_states) if keep_internal else None,
    )
