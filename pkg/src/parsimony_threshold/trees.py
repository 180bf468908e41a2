"""Weighted complete binary trees, cutsets, and weight models.

Vertices are heap-indexed: the root is 0 and vertex v has children 2v+1
and 2v+2, so a complete tree of depth n occupies ids [0, 2^(n+1)-1) and
level L occupies [2^L - 1, 2^(L+1) - 1). Every non-root vertex carries a
weight in (0, 1], the correlation of its state with its parent's.

A tree is materialized down to a boundary cutset (regular, at its
depth bound, for built trees; possibly irregular for ingested ones) and
stores no descendants of boundary vertices. Cutsets queried against a
tree may sit anywhere on or above that boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import (
    CoverError,
    MinimalityError,
    RangeError,
    ResourceLimitError,
    ValidationError,
)

DEFAULT_DEPTH_CAP = 25


# ---------------------------------------------------------------------------
# vertex algebra
# ---------------------------------------------------------------------------

def level(v: int) -> int:
    """Depth of vertex v (root is 0)."""
    if v < 0:
        raise RangeError(f"vertex id must be non-negative, got {v}")
    return (v + 1).bit_length() - 1


def parent(v: int) -> int:
    if v <= 0:
        raise RangeError(f"vertex {v} has no parent")
    return (v - 1) >> 1


def children(v: int) -> tuple[int, int]:
    if v < 0:
        raise RangeError(f"vertex id must be non-negative, got {v}")
    return 2 * v + 1, 2 * v + 2


def sibling(v: int) -> int:
    if v <= 0:
        raise RangeError(f"vertex {v} has no sibling")
    return v + 1 if v % 2 == 1 else v - 1


def ancestor_at_level(v: int, lev: int) -> int:
    """Ancestor of v at depth lev (v itself when lev == level(v))."""
    lv = level(v)
    if not 0 <= lev <= lv:
        raise RangeError(f"vertex {v} has no ancestor at level {lev}")
    return ((v + 1) >> (lv - lev)) - 1


def is_ancestor(a: int, b: int) -> bool:
    """True when a lies on the root-to-b path (inclusive)."""
    la, lb = level(a), level(b)
    return la <= lb and ancestor_at_level(b, la) == a


def path_to_root(v: int) -> list[int]:
    """Vertices from v up to and including the root."""
    if v < 0:
        raise RangeError(f"vertex id must be non-negative, got {v}")
    path = [v]
    while v > 0:
        v = (v - 1) >> 1
        path.append(v)
    return path


def graph_distance(a: int, b: int) -> int:
    """Edge count of the tree path between a and b."""
    la, lb = level(a), level(b)
    dist = 0
    while lb > la:
        b = (b - 1) >> 1
        lb -= 1
        dist += 1
    while la > lb:
        a = (a - 1) >> 1
        la -= 1
        dist += 1
    while a != b:
        a = (a - 1) >> 1
        b = (b - 1) >> 1
        dist += 2
    return dist


# ---------------------------------------------------------------------------
# weight distributions and models
# ---------------------------------------------------------------------------

class WeightDistribution:
    """Sampler interface for i.i.d. edge weights supported inside (0, 1].

    Implementations must be deterministic functions of (key, ids) and
    declare their exact mean.
    """

    mean: float

    def sample(self, key: int, ids: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(WeightDistribution):
    value: float

    def __post_init__(self):
        if not (isinstance(self.value, (int, float)) and 0.0 < self.value <= 1.0):
            raise RangeError(f"point mass must sit in (0, 1], got {self.value}")

    @property
    def mean(self) -> float:
        return float(self.value)

    def sample(self, key: int, ids: np.ndarray) -> np.ndarray:
        return np.full(len(ids), float(self.value))

    @property
    def spec(self) -> str:
        return f"point:{self.value!r}"


@dataclass(frozen=True)
class Uniform(WeightDistribution):
    """Uniform on (low, high], which must sit inside (0, 1]."""

    low: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.low < self.high <= 1.0):
            raise RangeError(
                f"uniform support must satisfy 0 <= low < high <= 1, got ({self.low}, {self.high}]"
            )

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def sample(self, key: int, ids: np.ndarray) -> np.ndarray:
        u = 1.0 - rng.hash_unit(key, ids)  # in (0, 1], keeps the left end open
        return self.low + (self.high - self.low) * u

    @property
    def spec(self) -> str:
        return f"uniform:{self.low!r},{self.high!r}"


@dataclass(frozen=True)
class ExpDecay(WeightDistribution):
    """w = exp(-2 T) with T exponential of the given rate.

    This is the edge-weight law induced by a pure-birth tree with
    branching rate `rate`; its mean is rate / (rate + 2).
    """

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise RangeError(f"rate must be positive, got {self.rate}")

    @property
    def mean(self) -> float:
        return self.rate / (self.rate + 2.0)

    def sample(self, key: int, ids: np.ndarray) -> np.ndarray:
        u = 1.0 - rng.hash_unit(key, ids)  # (0, 1]
        # exp(-2 * (-ln u) / rate) == u ** (2 / rate)
        return u ** (2.0 / self.rate)

    @property
    def spec(self) -> str:
        return f"expdecay:{self.rate!r}"


@dataclass(frozen=True)
class TwoPoint(WeightDistribution):
    low: float
    high: float
    high_prob: float

    def __post_init__(self):
        if not (0.0 < self.low <= 1.0 and 0.0 < self.high <= 1.0):
            raise RangeError("two-point values must sit in (0, 1]")
        if not 0.0 <= self.high_prob <= 1.0:
            raise RangeError(f"mixture probability must sit in [0, 1], got {self.high_prob}")

    @property
    def mean(self) -> float:
        return self.high_prob * self.high + (1.0 - self.high_prob) * self.low

    def sample(self, key: int, ids: np.ndarray) -> np.ndarray:
        u = rng.hash_unit(key, ids)
        return np.where(u < self.high_prob, self.high, self.low)

    @property
    def spec(self) -> str:
        return f"twopoint:{self.low!r},{self.high!r},{self.high_prob!r}"


@dataclass(frozen=True)
class Fixed:
    """Every edge carries the same weight."""

    value: float

    def __post_init__(self):
        if not (isinstance(self.value, (int, float)) and 0.0 < self.value <= 1.0):
            raise RangeError(f"fixed weight must sit in (0, 1], got {self.value}")


@dataclass(frozen=True)
class IID:
    """Edge weights drawn i.i.d. from a declared distribution."""

    dist: WeightDistribution

    def __post_init__(self):
        if not isinstance(self.dist, WeightDistribution):
            raise ValidationError("IID model needs a WeightDistribution")


@dataclass(frozen=True)
class Yule:
    """Pure-birth tree with branching rate `rate`; each edge spans an
    exponential time T and carries weight exp(-2 T)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise RangeError(f"birth rate must be positive, got {self.rate}")


WeightModel = Fixed | IID | Yule


def mean_weight(model: WeightModel) -> float:
    """Exact mean edge weight of the model."""
    if isinstance(model, Fixed):
        return float(model.value)
    if isinstance(model, IID):
        return float(model.dist.mean)
    if isinstance(model, Yule):
        return model.rate / (model.rate + 2.0)
    raise ValidationError(f"unknown weight model {model!r}")


def sample_weights(model: WeightModel, seed: int, ids: np.ndarray) -> np.ndarray:
    """Weights for the given vertex ids; a pure function of (model, seed)."""
    key = rng.derive_key(seed, rng.TAG_WEIGHT)
    if isinstance(model, Fixed):
        return np.full(len(ids), float(model.value))
    if isinstance(model, IID):
        return model.dist.sample(key, ids)
    if isinstance(model, Yule):
        return ExpDecay(model.rate).sample(key, ids)
    raise ValidationError(f"unknown weight model {model!r}")


def parse_model(text: str) -> WeightModel:
    """Parse the compact model syntax used by the CLI and service.

    fixed:W | yule:RATE | iid:point:V | iid:uniform:LOW,HIGH
    | iid:expdecay:RATE | iid:twopoint:LOW,HIGH,PROB
    """
    if not isinstance(text, str):
        raise ValidationError(f"model spec must be a string, got {text!r}")
    parts = text.strip().split(":")
    try:
        if parts[0] == "fixed" and len(parts) == 2:
            return Fixed(float(parts[1]))
        if parts[0] == "yule" and len(parts) == 2:
            return Yule(float(parts[1]))
        if parts[0] == "iid" and len(parts) == 3:
            args = [float(x) for x in parts[2].split(",")] if parts[2] else []
            kind = parts[1]
            if kind == "point" and len(args) == 1:
                return IID(PointMass(args[0]))
            if kind == "uniform" and len(args) == 2:
                return IID(Uniform(args[0], args[1]))
            if kind == "expdecay" and len(args) == 1:
                return IID(ExpDecay(args[0]))
            if kind == "twopoint" and len(args) == 3:
                return IID(TwoPoint(args[0], args[1], args[2]))
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"bad model spec {text!r}: {exc}") from None
    raise ValidationError(f"bad model spec {text!r}")


def model_spec(model: WeightModel) -> str:
    """Canonical compact string for a model; parse_model round-trips it."""
    if isinstance(model, Fixed):
        return f"fixed:{model.value!r}"
    if isinstance(model, Yule):
        return f"yule:{model.rate!r}"
    if isinstance(model, IID):
        return f"iid:{model.dist.spec}"
    raise ValidationError(f"unknown weight model {model!r}")


# ---------------------------------------------------------------------------
# cutsets
# ---------------------------------------------------------------------------

def _antichain_violation(ids: np.ndarray) -> tuple[int, int] | None:
    """Return (removable_descendant, its_ancestor) if ids is not an
    antichain, else None. ids must be sorted and unique."""
    # exact level = bit_length(v + 1) - 1; float log2 is unsafe near powers of two
    levels = np.frompyfunc(lambda v: (int(v) + 1).bit_length() - 1, 1, 1)(ids).astype(np.int64)
    distinct = np.unique(levels)
    if len(distinct) == 1:
        return None
    id_set = {}
    for lev in distinct[:-1]:
        at_lev = ids[levels == lev]
        id_set[int(lev)] = at_lev
    for lev in distinct[:-1]:
        deeper = ids[levels > lev]
        deeper_levels = levels[levels > lev]
        lifted = ((deeper + 1) >> (deeper_levels - lev)) - 1
        at_lev = id_set[int(lev)]
        hit = np.isin(lifted, at_lev)
        if hit.any():
            j = int(np.argmax(hit))
            return int(deeper[j]), int(lifted[j])
    return None


class Cutset:
    """A finite antichain of vertex ids, stored sorted and immutable.

    Cover (every root-to-boundary path meets the set) is a property
    relative to a tree and is checked by validate_cutset.
    """

    __slots__ = ("ids",)

    def __init__(self, ids, _checked: bool = False):
        arr = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
        if arr.ndim != 1 or len(arr) == 0:
            raise ValidationError("cutset must be a non-empty flat list of vertex ids")
        if (arr < 0).any():
            raise RangeError("cutset ids must be non-negative")
        arr = np.sort(arr)
        if not _checked:
            if len(np.unique(arr)) != len(arr):
                raise ValidationError("cutset ids must be unique")
            hit = _antichain_violation(arr)
            if hit is not None:
                raise MinimalityError(
                    f"vertex {hit[0]} lies below cutset vertex {hit[1]} and is removable",
                    removable_vertex=hit[0],
                )
        arr.flags.writeable = False
        object.__setattr__(self, "ids", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Cutset is immutable")

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(int(v) for v in self.ids)

    def __contains__(self, v) -> bool:
        i = int(np.searchsorted(self.ids, v))
        return i < len(self.ids) and int(self.ids[i]) == int(v)

    def __eq__(self, other) -> bool:
        return isinstance(other, Cutset) and np.array_equal(self.ids, other.ids)

    def __hash__(self) -> int:
        return hash(self.ids.tobytes())

    def __repr__(self) -> str:
        if len(self.ids) <= 8:
            return f"Cutset({list(map(int, self.ids))})"
        return f"Cutset(<{len(self.ids)} vertices, levels {self.min_level}..{self.max_level}>)"

    @property
    def min_level(self) -> int:
        return level(int(self.ids[0]))

    @property
    def max_level(self) -> int:
        return level(int(self.ids[-1]))


def _regular_ids(n: int) -> np.ndarray:
    return np.arange((1 << n) - 1, (1 << (n + 1)) - 1, dtype=np.int64)


def _membership_mask(depth_bound: int, boundary: Cutset) -> np.ndarray:
    """Bool mask over heap ids: True exactly on the vertices of the tree
    truncated at `boundary` (on or above it, reachable from the root)."""
    nv = (1 << (depth_bound + 1)) - 1
    member = np.zeros(nv, dtype=bool)
    member[0] = True
    bnd = np.zeros(nv, dtype=bool)
    bnd[boundary.ids] = True
    for lev in range(1, depth_bound + 1):
        plo, phi = (1 << (lev - 1)) - 1, (1 << lev) - 1
        lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
        member[lo:hi] = np.repeat(member[plo:phi] & ~bnd[plo:phi], 2)
    return member


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------

class WeightedTree:
    """Complete binary tree truncated at a boundary cutset.

    weights is a dense heap-indexed float64 array of size 2^(depth+1)-1;
    the root entry and every entry outside the truncated tree are NaN.
    Instances are immutable; the arrays are read-only.
    """

    __slots__ = ("depth_bound", "boundary", "weights", "member")

    def __init__(self, depth_bound: int, boundary: Cutset, weights: np.ndarray):
        if depth_bound < 0:
            raise RangeError(f"depth must be non-negative, got {depth_bound}")
        nv = (1 << (depth_bound + 1)) - 1
        if boundary.max_level > depth_bound:
            raise ValidationError(
                f"boundary reaches level {boundary.max_level} but the tree is "
                f"materialized to depth {depth_bound}"
            )
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (nv,):
            raise ValidationError(
                f"weights must have one entry per heap id (expected {nv}, got {weights.shape})"
            )
        member = _membership_mask(depth_bound, boundary)
        # cover: an alive vertex at the last level that is not boundary
        # would need children beyond the materialized depth
        lo = (1 << depth_bound) - 1
        bnd_last = np.zeros(nv - lo, dtype=bool)
        on_last = boundary.ids[boundary.ids >= lo]
        bnd_last[on_last - lo] = True
        escaped = member[lo:] & ~bnd_last
        if escaped.any():
            v = lo + int(np.argmax(escaped))
            raise CoverError(
                f"boundary misses the path through vertex {v}", escaping_vertex=v
            )
        stored = np.isfinite(weights)
        expected = member.copy()
        expected[0] = False
        if bool(stored[0]):
            raise ValidationError("the root carries no weight; entry 0 must be NaN")
        if (stored & ~expected).any():
            v = int(np.argmax(stored & ~expected))
            raise ValidationError(f"weight stored for vertex {v} outside the truncated tree")
        if (expected & ~stored).any():
            v = int(np.argmax(expected & ~stored))
            raise ValidationError(f"missing weight for vertex {v}")
        vals = weights[expected]
        if len(vals) and not ((vals > 0.0) & (vals <= 1.0)).all():
            bad = int(np.flatnonzero(expected)[np.argmax(~((vals > 0.0) & (vals <= 1.0)))])
            raise RangeError(f"weight of vertex {bad} is outside (0, 1]")
        weights = weights.copy() if weights.flags.writeable else weights
        weights.flags.writeable = False
        member.flags.writeable = False
        object.__setattr__(self, "depth_bound", depth_bound)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "member", member)

    def __setattr__(self, name, value):
        raise AttributeError("WeightedTree is immutable")

    def __repr__(self) -> str:
        return (
            f"WeightedTree(depth_bound={self.depth_bound}, "
            f"vertices={self.num_vertices}, boundary={self.boundary!r})"
        )

    @property
    def heap_size(self) -> int:
        return len(self.weights)

    @property
    def num_vertices(self) -> int:
        return int(self.member.sum())

    def in_tree(self, v: int) -> bool:
        return 0 <= v < self.heap_size and bool(self.member[v])

    def weight(self, v: int) -> float:
        if v == 0:
            raise RangeError("the root has no incoming edge")
        if not self.in_tree(v):
            raise ValidationError(f"vertex {v} is not in the tree")
        return float(self.weights[v])


def build_tree(
    model: WeightModel,
    depth: int,
    seed: int = 0,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> WeightedTree:
    """Materialize the complete tree of the given depth, boundary pi_depth.

    Deterministic: the weight of vertex v depends only on (model, seed, v),
    so shallower builds are prefixes of deeper ones.
    """
    if depth < 0:
        raise RangeError(f"depth must be non-negative, got {depth}")
    if depth > depth_cap:
        raise ResourceLimitError(
            f"depth {depth} exceeds the memory cap {depth_cap}; raise depth_cap explicitly"
        )
    nv = (1 << (depth + 1)) - 1
    weights = np.empty(nv, dtype=np.float64)
    weights[0] = np.nan
    if nv > 1:
        ids = np.arange(1, nv, dtype=np.int64)
        weights[1:] = sample_weights(model, seed, ids)
    boundary = Cutset(_regular_ids(depth), _checked=True)
    return WeightedTree(depth, boundary, weights)


def truncate(tree: WeightedTree, depth: int) -> WeightedTree:
    """The same tree cut down to boundary pi_depth (shares weight storage)."""
    if not 0 <= depth <= tree.depth_bound:
        raise RangeError(f"cannot truncate to depth {depth} (tree depth {tree.depth_bound})")
    if tree.boundary.min_level < depth:
        raise ValidationError(
            f"tree boundary rises to level {tree.boundary.min_level}; "
            f"cannot truncate below it"
        )
    nv = (1 << (depth + 1)) - 1
    boundary = Cutset(_regular_ids(depth), _checked=True)
    return WeightedTree(depth, boundary, tree.weights[:nv])


def regular_cutset(tree: WeightedTree, n: int) -> Cutset:
    """All 2^n vertices at depth n."""
    if not 0 <= n <= tree.depth_bound:
        raise RangeError(
            f"regular cutset level must sit in [0, {tree.depth_bound}], got {n}"
        )
    ids = _regular_ids(n)
    if not tree.member[ids].all():
        v = int(ids[np.argmax(~tree.member[ids])])
        raise ValidationError(f"vertex {v} at level {n} is below the tree boundary")
    return Cutset(ids, _checked=True)


def validate_cutset(tree: WeightedTree, ids) -> Cutset:
    """Check that ids is a minimal covering antichain of the tree.

    Raises MinimalityError (with a removable vertex) or CoverError (with
    an escaping boundary vertex); returns the Cutset when valid.
    """
    arr = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValidationError("cutset must be a non-empty flat list of vertex ids")
    if (arr < 0).any():
        raise RangeError("cutset ids must be non-negative")
    arr = np.sort(arr)
    if len(np.unique(arr)) != len(arr):
        dup = int(arr[np.argmax(arr[1:] == arr[:-1])])
        raise ValidationError(f"cutset repeats vertex {dup}")
    if int(arr[-1]) >= tree.heap_size:
        raise ValidationError(f"vertex {int(arr[-1])} is not in the tree")
    present = tree.member[arr]
    if not present.all():
        raise ValidationError(f"vertex {int(arr[np.argmax(~present)])} is not in the tree")
    hit = _antichain_violation(arr)
    if hit is not None:
        raise MinimalityError(
            f"vertex {hit[0]} lies below cutset vertex {hit[1]} and is removable",
            removable_vertex=hit[0],
        )
    cut = Cutset(arr, _checked=True)
    # cover sweep: a path is uncovered while it has not met the cutset
    nv = tree.heap_size
    in_cut = np.zeros(nv, dtype=bool)
    in_cut[cut.ids] = True
    bnd = np.zeros(nv, dtype=bool)
    bnd[tree.boundary.ids] = True
    uncovered = np.zeros(nv, dtype=bool)
    uncovered[0] = not in_cut[0]
    if uncovered[0] and bnd[0]:
        raise CoverError("boundary misses the path through vertex 0", escaping_vertex=0)
    for lev in range(1, tree.depth_bound + 1):
        plo, phi = (1 << (lev - 1)) - 1, (1 << lev) - 1
        lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
        uncovered[lo:hi] = np.repeat(uncovered[plo:phi], 2) & ~in_cut[lo:hi] & tree.member[lo:hi]
        escaped = uncovered[lo:hi] & bnd[lo:hi]
        if escaped.any():
            v = lo + int(np.argmax(escaped))
            raise CoverError(f"cutset misses the path through vertex {v}", escaping_vertex=v)
    return cut


# ---------------------------------------------------------------------------
# level-by-level traversal index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeLevel:
    """One level of the tree truncated at a queried cutset."""

    vids: np.ndarray          # sorted vertex ids present at this level
    boundary_mask: np.ndarray  # True where the vertex belongs to the cutset
    internal_pos: np.ndarray   # positions (into vids) of non-boundary vertices


def tree_levels(tree: WeightedTree, cutset: Cutset) -> list[TreeLevel]:
    """Levels of T^pi from the root down to the deepest cutset vertex.

    Children of the internal vertices of level L appear, in order, as
    level L+1: the children of internal_pos[i] sit at positions 2i and
    2i+1 of the next level. Total vertex count is 2|pi| - 1.
    """
    cut_ids = cutset.ids
    levels: list[TreeLevel] = []
    vids = np.zeros(1, dtype=np.int64)
    consumed = 0
    while True:
        idx = np.searchsorted(cut_ids, vids)
        idx[idx >= len(cut_ids)] = len(cut_ids) - 1
        mask = cut_ids[idx] == vids
        mask.flags.writeable = False
        vids.flags.writeable = False
        internal = np.flatnonzero(~mask)
        internal.flags.writeable = False
        levels.append(TreeLevel(vids, mask, internal))
        consumed += int(mask.sum())
        if len(internal) == 0:
            break
        parents = vids[internal]
        nxt = np.empty(2 * len(parents), dtype=np.int64)
        nxt[0::2] = 2 * parents + 1
        nxt[1::2] = 2 * parents + 2
        vids = nxt
        if len(levels) > tree.depth_bound + 1:
            raise ValidationError("cutset does not cover the tree")
    if consumed != len(cut_ids):
        raise ValidationError("cutset has vertices unreachable from the root")
    return levels


def boundary_ids_in_order(levels: list[TreeLevel]) -> np.ndarray:
    """Cutset ids in ascending order, as traversal order concatenates them."""
    return np.concatenate([lv.vids[lv.boundary_mask] for lv in levels])


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def _fmt17(x: float) -> str:
    # 17 significant digits round-trip any float64 exactly
    return format(float(x), ".17g")


def tree_to_document(tree: WeightedTree) -> dict:
    """Plain-python document {"weights": [...], "cutset": [...]};
    null marks heap slots outside the truncated tree."""
    w = tree.weights
    vals = [
        (float(w[v]) if tree.member[v] else None) for v in range(1, tree.heap_size)
    ]
    return {"weights": vals, "cutset": [int(v) for v in tree.boundary.ids]}


def tree_to_json(tree: WeightedTree) -> str:
    """Serialize with 17-significant-digit weights (bit-exact round-trip)."""
    w = tree.weights
    parts = (
        _fmt17(w[v]) if tree.member[v] else "null" for v in range(1, tree.heap_size)
    )
    cut = ", ".join(str(int(v)) for v in tree.boundary.ids)
    return '{"weights": [' + ", ".join(parts) + '], "cutset": [' + cut + "]}"


def tree_from_document(doc) -> WeightedTree:
    if not isinstance(doc, dict) or "weights" not in doc:
        raise ValidationError('tree document must be an object with a "weights" array')
    raw = doc["weights"]
    if not isinstance(raw, list):
        raise ValidationError('"weights" must be an array')
    m = len(raw)
    if "cutset" in doc and doc["cutset"] is not None:
        if not isinstance(doc["cutset"], list):
            raise ValidationError('"cutset" must be an array of vertex ids')
        try:
            cut_ids = [int(v) for v in doc["cutset"]]
        except (TypeError, ValueError):
            raise ValidationError('"cutset" must be an array of vertex ids') from None
        boundary = Cutset(cut_ids)
        depth = boundary.max_level
    else:
        depth = int(math.log2(m + 2)) - 1
        if (1 << (depth + 1)) - 2 != m:
            raise ValidationError(
                f'"weights" has {m} entries, not a complete tree; supply "cutset"'
            )
        boundary = Cutset(_regular_ids(depth), _checked=True)
    nv = (1 << (depth + 1)) - 1
    if m > nv - 1:
        for v in range(nv, m + 1):
            if raw[v - 1] is not None:
                raise ValidationError(
                    f"weight stored for vertex {v} outside the truncated tree"
                )
        raw = raw[: nv - 1]
    weights = np.full(nv, np.nan)
    for i, x in enumerate(raw):
        if x is None:
            continue
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise ValidationError(f"weight of vertex {i + 1} must be a number or null")
        weights[i + 1] = float(x)
    return WeightedTree(depth, boundary, weights)


def tree_from_json(text: str) -> WeightedTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed tree JSON: {exc}") from None
    return tree_from_document(doc)


def write_tree(tree: WeightedTree, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(tree_to_json(tree))
        fh.write("\n")


def read_tree(path: str) -> WeightedTree:
    with open(path, "r", encoding="ascii") as fh:
        return tree_from_json(fh.read())
