"""Weighted branching-number machinery: min-cutset-sum DP, geometric
decay bisection, the threshold-condition gate, and percolation coupling.

For a scale parameter kappa, assign each cutset the sum over its
vertices of the product of (weight / kappa) along the root path; the DP
value f(root) is the exact minimum of that sum over all cutsets of the
truncated tree (a vertex may always stop the recursion at cost 1). The
branching number is the kappa at which the root value switches from
bounded-below to geometrically decaying as depth grows; for constant
weights w* it is 2w*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import RangeError, ValidationError
from .maps import LevelMap
from .trees import (
    DEFAULT_DEPTH_CAP,
    TreeLevel,
    WeightModel,
    WeightedTree,
    build_tree,
    tree_levels,
    truncate,
)

THRESHOLD = 1.5  # branching value that separates reconstruction regimes


@dataclass(frozen=True)
class CutsetDP:
    """Solved DP at one kappa: f maps each vertex of the truncated tree
    to the minimum cutset sum of its subtree (1 at the boundary)."""

    kappa: float
    f: LevelMap

    @property
    def root_value(self) -> float:
        return float(self.f[0])


def _dp_values(
    levels: list[TreeLevel] | tuple[TreeLevel, ...],
    weights: np.ndarray,
    kappa: float,
    member_levels: list[np.ndarray] | None = None,
) -> list[np.ndarray]:
    """Per-level DP arrays, bottom-up.

    member_levels (optional) marks thinned-subtree membership per level;
    vertices outside the surviving cluster carry no escape routes to the
    boundary and contribute 0 to their parent's sum.
    """
    n_levels = len(levels)
    out: list[np.ndarray] = [None] * n_levels
    for li in range(n_levels - 1, -1, -1):
        lv = levels[li]
        f = np.ones(len(lv.vids))
        if len(lv.internal_pos):
            child_vids = levels[li + 1].vids
            w = weights[child_vids]
            fc = out[li + 1]
            total = (w[0::2] / kappa) * fc[0::2] + (w[1::2] / kappa) * fc[1::2]
            f[lv.internal_pos] = np.minimum(1.0, total)
        if member_levels is not None:
            f = f * member_levels[li]
        out[li] = f
    return out


def cutset_dp(tree: WeightedTree, kappa: float, membership: np.ndarray | None = None) -> CutsetDP:
    """Solve the DP over the whole truncated tree at one kappa.

    membership (optional): bool mask over heap ids restricting the tree
    to a surviving thinned cluster.
    """
    if not kappa > 0.0:
        raise RangeError(f"kappa must be positive, got {kappa}")
    levels = tree_levels(tree, tree.boundary)
    member_levels = None
    if membership is not None:
        membership = np.asarray(membership, dtype=bool)
        if membership.shape != (tree.heap_size,):
            raise ValidationError("membership mask must cover every heap id")
        member_levels = [membership[lv.vids].astype(np.float64) for lv in levels]
    values = _dp_values(levels, tree.weights, kappa, member_levels)
    return CutsetDP(kappa=float(kappa), f=LevelMap(levels, values, wrap=float))


def min_cutset_sum(tree: WeightedTree, kappa: float, membership: np.ndarray | None = None) -> float:
    """Exact minimum over all cutsets of the truncated tree of the
    kappa-scaled weight-product sum; equals f(root) of the DP."""
    return cutset_dp(tree, kappa, membership).root_value


@dataclass(frozen=True)
class KappaProbe:
    """Decay classification of one kappa across the depth schedule."""

    kappa: float
    depths: tuple[int, ...]
    values: tuple[float, ...]
    decays: bool  # True: root value decays geometrically (kappa above the branching number)


@dataclass(frozen=True)
class BranchingEstimate:
    """Bisection result; value is the midpoint of the final bracket."""

    value: float
    lower: float
    upper: float
    converged: bool
    probes: tuple[KappaProbe, ...]
    note: str = ""

    def __float__(self) -> float:
        return self.value


def _classify(values: list[float], tol: float) -> bool:
    """True when the depth-schedule values decay geometrically: the last
    inter-depth ratio sits below 1 - tol (a zero tail decays trivially)."""
    s_prev, s_last = values[-2], values[-1]
    if s_prev == 0.0:
        return True
    return s_last < 1.0 and (s_last / s_prev) < 1.0 - tol


def estimate_branching_number(
    model: WeightModel,
    seed: int = 0,
    depth_schedule=(5, 10, 15, 20),
    tol: float = 0.01,
    thinning: float | None = None,
    bracket: tuple[float, float] = (1e-3, 2.5),
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> BranchingEstimate:
    """Bisection on kappa between bounded-below and geometric decay of
    min_cutset_sum across the depth schedule.

    thinning (optional, in (0, 1]): keep each vertex independently with
    this probability and restrict to the root's surviving cluster before
    the DP, estimating the cluster's branching number instead.
    """
    depths = tuple(int(d) for d in depth_schedule)
    if len(depths) < 2 or any(b <= a for a, b in zip(depths, depths[1:])) or depths[0] < 1:
        raise ValidationError(f"depth schedule must be increasing positive depths, got {depths}")
    if not tol > 0.0:
        raise RangeError(f"tol must be positive, got {tol}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi:
        raise RangeError(f"kappa bracket must satisfy 0 < lo < hi, got {bracket}")
    if thinning is not None and not 0.0 < thinning <= 1.0:
        raise RangeError(f"thinning keep-probability must sit in (0, 1], got {thinning}")

    deepest = build_tree(model, depths[-1], seed=seed, depth_cap=depth_cap)
    truncations = [truncate(deepest, d) for d in depths]
    level_sets = [tree_levels(t, t.boundary) for t in truncations]
    member_levels_by_depth: list[list[np.ndarray] | None] = [None] * len(depths)
    if thinning is not None:
        keep = np.ones(deepest.heap_size, dtype=bool)
        draws = rng.hash_unit(
            rng.derive_key(seed, rng.TAG_THIN), np.arange(1, deepest.heap_size, dtype=np.uint64)
        )
        keep[1:] = draws < thinning
        member = np.zeros(deepest.heap_size, dtype=bool)
        member[0] = True
        for lev in range(1, deepest.depth_bound + 1):
            plo, phi = (1 << (lev - 1)) - 1, (1 << lev) - 1
            elo, ehi = (1 << lev) - 1, (1 << (lev + 1)) - 1
            member[elo:ehi] = np.repeat(member[plo:phi], 2) & keep[elo:ehi]
        for i, (t, lvls) in enumerate(zip(truncations, level_sets)):
            member_levels_by_depth[i] = [member[lv.vids].astype(np.float64) for lv in lvls]

    probes: list[KappaProbe] = []

    def probe(kappa: float) -> KappaProbe:
        values = tuple(
            float(_dp_values(lvls, t.weights, kappa, mem)[0][0])
            for t, lvls, mem in zip(truncations, level_sets, member_levels_by_depth)
        )
        result = KappaProbe(kappa=kappa, depths=depths, values=values, decays=_classify(list(values), tol))
        probes.append(result)
        return result

    if probe(lo).decays:
        return BranchingEstimate(
            value=lo, lower=lo, upper=lo, converged=False, probes=tuple(probes),
            note="root value decays at the lower bracket (cluster extinct or bracket too high)",
        )
    if not probe(hi).decays:
        return BranchingEstimate(
            value=hi, lower=hi, upper=hi, converged=False, probes=tuple(probes),
            note="root value persists at the upper bracket; raise the bracket",
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid).decays:
            hi = mid
        else:
            lo = mid
    return BranchingEstimate(
        value=0.5 * (lo + hi), lower=lo, upper=hi, converged=True, probes=tuple(probes)
    )


@dataclass(frozen=True)
class ConditionReport:
    """Gate on 'branching number exceeds 3/2' with the decision margin."""

    holds: bool | None  # None: inconclusive at this tolerance
    margin: float       # estimated branching number minus 3/2
    estimate: BranchingEstimate
    min_weight: float   # smallest edge weight of the deepest truncation

    def __bool__(self) -> bool:
        return self.holds is True

    @property
    def conclusive(self) -> bool:
        return self.holds is not None


def branching_condition(
    model: WeightModel,
    seed: int = 0,
    depth_schedule=(5, 10, 15, 20),
    tol: float = 0.01,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> ConditionReport:
    """True/False when the estimated branching number clears/misses 3/2
    by more than tol; None when the bisection is inconclusive or the
    margin is inside the tolerance."""
    est = estimate_branching_number(
        model, seed=seed, depth_schedule=depth_schedule, tol=tol, depth_cap=depth_cap
    )
    deepest = build_tree(model, tuple(int(d) for d in depth_schedule)[-1], seed=seed, depth_cap=depth_cap)
    w_min = float(deepest.weights[1:].min()) if deepest.heap_size > 1 else 1.0
    margin = est.value - THRESHOLD
    holds: bool | None
    if not est.converged or abs(margin) <= tol:
        holds = None
    else:
        holds = margin > 0.0
    return ConditionReport(holds=holds, margin=margin, estimate=est, min_weight=w_min)


# ---------------------------------------------------------------------------
# percolation coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingConstants:
    """Window height H and amplitude eps_prime for the indicator coupling."""

    H: int
    eps_prime: float


def coupling_constants(phi_prime: float, theta_star: float) -> CouplingConstants:
    """Closed-form constants: H is the smallest non-negative integer with
    (1/2)^(2^H - 1) <= phi_prime, and eps_prime is the largest value
    satisfying (3/2)*(eps'*(2/theta*)^(H+1))^2 <= phi_prime and
    eps'*(2/theta*)^(H+1) <= 0.99."""
    if not 0.0 < phi_prime <= 1.0 / 9.0:
        raise RangeError(f"phi_prime must sit in (0, 1/9], got {phi_prime}")
    if not 0.0 < theta_star < 1.0:
        raise RangeError(f"theta_star must sit in (0, 1), got {theta_star}")
    H = 0
    while 0.5 ** (2 ** H - 1) > phi_prime:
        H += 1
    eps_prime = (theta_star / 2.0) ** (H + 1) * min(math.sqrt(2.0 * phi_prime / 3.0), 0.99)
    return CouplingConstants(H=H, eps_prime=eps_prime)


class PercolationSample:
    """Weight-threshold percolation on one tree.

    A vertex is open when its edge weight exceeds theta_star. A vertex z
    at most max_level deep is admissible when every descendant exactly
    H+1 levels below it is open; the subtree keeps the vertices whose
    whole root path (root excluded) is admissible. Per-vertex
    admissibility is an independent Bernoulli((1 - tau)^(2^(H+1))) draw
    across the subtree's ancestry structure, tau being the weight law's
    mass at or below theta_star.
    """

    __slots__ = ("theta_star", "H", "max_level", "open_mask", "member_mask")

    def __init__(self, theta_star: float, H: int, max_level: int,
                 open_mask: np.ndarray, member_mask: np.ndarray):
        self.theta_star = theta_star
        self.H = H
        self.max_level = max_level
        self.open_mask = open_mask
        self.member_mask = member_mask

    def open(self, v: int) -> bool:
        """Is the edge into v open (weight above theta_star)?"""
        if not 1 <= v < len(self.open_mask):
            raise RangeError(f"vertex {v} has no sampled edge indicator")
        return bool(self.open_mask[v])

    def in_subtree(self, v: int) -> bool:
        return 0 <= v < len(self.member_mask) and bool(self.member_mask[v])

    def subtree_ids(self) -> np.ndarray:
        return np.flatnonzero(self.member_mask).astype(np.int64)

    @property
    def subtree(self) -> set:
        return set(int(v) for v in self.subtree_ids())

    def level_counts(self) -> np.ndarray:
        """Members per level, 0..max_level (a branching-chain trajectory)."""
        counts = np.empty(self.max_level + 1, dtype=np.int64)
        for lev in range(self.max_level + 1):
            lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
            counts[lev] = int(self.member_mask[lo:hi].sum())
        return counts

    @property
    def survived(self) -> bool:
        """Does the subtree reach the deepest level it is defined on?"""
        return bool(self.level_counts()[-1] > 0)

    def __repr__(self) -> str:
        return (
            f"PercolationSample(theta_star={self.theta_star}, H={self.H}, "
            f"max_level={self.max_level}, members={int(self.member_mask.sum())})"
        )


def percolation_subtree(tree: WeightedTree, theta_star: float, H: int) -> PercolationSample:
    """Compute open indicators, windowed admissibility, and subtree
    membership down to level depth - (H+1) (deeper windows would need
    unmaterialized weights)."""
    if not 0.0 < theta_star < 1.0:
        raise RangeError(f"theta_star must sit in (0, 1), got {theta_star}")
    if H < 0:
        raise RangeError(f"window height must be non-negative, got {H}")
    n = tree.depth_bound
    if tree.boundary.min_level != n:
        raise ValidationError("percolation windows need a fully materialized (regular) tree")
    max_level = n - (H + 1)
    if max_level < 0:
        raise RangeError(
            f"tree depth {n} cannot host windows {H + 1} levels deep; build a deeper tree"
        )
    open_mask = np.zeros(tree.heap_size, dtype=bool)
    open_mask[1:] = tree.weights[1:] > theta_star
    open_mask[0] = True
    window = open_mask
    for _ in range(H + 1):
        window = window[1::2] & window[2::2]
    # window[z] now holds admissibility for z = 0 .. 2^(max_level+1) - 2
    nv = (1 << (max_level + 1)) - 1
    member = np.zeros(nv, dtype=bool)
    member[0] = True
    for lev in range(1, max_level + 1):
        plo, phi = (1 << (lev - 1)) - 1, (1 << lev) - 1
        lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
        member[lo:hi] = np.repeat(member[plo:phi], 2) & window[lo:hi]
    open_mask.flags.writeable = False
    member.flags.writeable = False
    return PercolationSample(
        theta_star=float(theta_star), H=int(H), max_level=max_level,
        open_mask=open_mask, member_mask=member,
    )


def admissible_rate(theta_star_tail: float, H: int) -> float:
    """Per-vertex admissibility probability (1 - tau)^(2^(H+1)) given the
    probability 1 - tau that a single edge is open."""
    if not 0.0 <= theta_star_tail <= 1.0:
        raise RangeError(f"open-edge probability must sit in [0, 1], got {theta_star_tail}")
    if H < 0:
        raise RangeError(f"window height must be non-negative, got {H}")
    return theta_star_tail ** (2 ** (H + 1))


def extinction_probability(q_tilde: float) -> float:
    """Extinction probability of the admissibility branching chain:
    ((1 - q)/q)^2 above criticality (q > 1/2), else 1."""
    if not 0.0 <= q_tilde <= 1.0:
        raise RangeError(f"keep probability must sit in [0, 1], got {q_tilde}")
    if q_tilde <= 0.5:
        return 1.0
    return ((1.0 - q_tilde) / q_tilde) ** 2


@dataclass(frozen=True)
class ExtinctionSample:
    """Monte Carlo extinction of the Binomial(2, q) branching chain."""

    q_tilde: float
    depth: int
    trials: int
    extinct: int
    survived: np.ndarray  # (trials,) bool

    @property
    def frequency(self) -> float:
        return self.extinct / self.trials

    @property
    def stderr(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.trials)

    @property
    def analytic(self) -> float:
        return extinction_probability(self.q_tilde)


def simulate_extinction(q_tilde: float, depth: int, trials: int, seed: int = 0) -> ExtinctionSample:
    """Population-level simulation: per trial, Z_0 = 1 and
    Z_{l+1} ~ Binomial(2 Z_l, q); extinct when Z_depth = 0.

    Distribution-identical to counting percolation_subtree survivors
    level by level: sibling windows are disjoint and window products
    along a path multiply over disjoint vertex sets, so memberships are
    independent Bernoulli(q) per vertex given the parent's membership.
    """
    if not 0.0 <= q_tilde <= 1.0:
        raise RangeError(f"keep probability must sit in [0, 1], got {q_tilde}")
    if depth < 1:
        raise RangeError(f"depth must be positive, got {depth}")
    if trials < 1:
        raise RangeError(f"trials must be positive, got {trials}")
    gen = rng.generator(rng.derive_key(seed, rng.TAG_OFFSPRING))
    z = np.ones(trials, dtype=np.int64)
    for _ in range(depth):
        z = gen.binomial(2 * z, q_tilde)
    survived = z > 0
    survived.flags.writeable = False
    return ExtinctionSample(
        q_tilde=float(q_tilde), depth=int(depth), trials=int(trials),
        extinct=int(trials - survived.sum()), survived=survived,
    )
