"""Read-only vertex-id keyed mappings backed by per-level arrays.

Level-structured algorithms (state sampling, set propagation, accuracy
recurrences, cutset DP) naturally produce one value array per tree
level; this wrapper exposes them as a Mapping[vid, value] without
materializing per-vertex Python objects.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .errors import RangeError
from .trees import TreeLevel, level


class LevelMap(Mapping):
    """Mapping vid -> wrap(*[arr[pos] for arr in level_arrays])."""

    __slots__ = ("levels", "arrays", "_wrap")

    def __init__(self, levels, arrays, wrap=None):
        # arrays: one tuple of ndarrays per level, aligned with levels[i].vids
        self.levels: tuple[TreeLevel, ...] = tuple(levels)
        self.arrays: tuple[tuple[np.ndarray, ...], ...] = tuple(
            tuple(a) if isinstance(a, (tuple, list)) else (a,) for a in arrays
        )
        self._wrap = wrap
        for lv, arrs in zip(self.levels, self.arrays):
            for a in arrs:
                if len(a) != len(lv.vids):
                    raise ValueError("level array misaligned with level ids")

    def _lookup(self, vid) -> tuple[int, int]:
        li = level(int(vid))
        if li >= len(self.levels):
            raise KeyError(vid)
        vids = self.levels[li].vids
        pos = int(np.searchsorted(vids, vid))
        if pos >= len(vids) or int(vids[pos]) != int(vid):
            raise KeyError(vid)
        return li, pos

    def __getitem__(self, vid):
        li, pos = self._lookup(vid)
        vals = tuple(a[pos] for a in self.arrays[li])
        return self._wrap(*vals) if self._wrap is not None else (
            vals[0] if len(vals) == 1 else vals
        )

    def __contains__(self, vid) -> bool:
        try:
            self._lookup(vid)
        except (KeyError, RangeError):
            return False
        return True

    def __len__(self) -> int:
        return sum(len(lv.vids) for lv in self.levels)

    def __iter__(self):
        for lv in self.levels:
            yield from (int(v) for v in lv.vids)
