"""Exact reconstruction-accuracy recurrences on weighted trees.

For a cutset pi, alpha (resp. beta) at a vertex is the probability that
the bottom-up candidate set at that vertex is exactly the singleton of
its true (resp. opposite) state. The working coordinates are
d = alpha - beta and u = 3(alpha + beta) - 2, with boundary value (1, 1)
on the cutset; the root then gives the maximum-parsimony reconstruction
accuracy 1/2 + d/2.

One coordinate system is the oracle for the other: propagation in
(alpha, beta) and in (d, u) agree to ~1e-12 per vertex, and both match
brute-force enumeration on small trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, RangeError, ValidationError
from .maps import LevelMap
from .trees import (
    Cutset,
    WeightedTree,
    ancestor_at_level,
    level,
    sibling,
    tree_levels,
    validate_cutset,
)

_SLACK = 1e-12


@dataclass(frozen=True)
class AccuracyPair:
    """(alpha, beta) at a vertex: P[candidate set == true singleton] and
    P[candidate set == wrong singleton]."""

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        a, b = self.alpha, self.beta
        if not (a >= -_SLACK and b >= -_SLACK and a + b <= 1.0 + _SLACK):
            raise RangeError(
                f"accuracy pair needs alpha, beta >= 0 and alpha + beta <= 1, got ({a}, {b})"
            )

    @property
    def sigma(self) -> float:
        """alpha + beta: probability the candidate set is a singleton."""
        return self.alpha + self.beta

    @property
    def delta(self) -> float:
        """alpha - beta: the signal margin."""
        return self.alpha - self.beta


@dataclass(frozen=True)
class DUPair:
    """Working coordinates d = alpha - beta, u = 3(alpha+beta) - 2."""

    d: float
    u: float

    def __post_init__(self):
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "u", float(self.u))
        if not (-_SLACK <= self.d <= 1.0 + _SLACK and -0.5 - _SLACK <= self.u <= 1.0 + _SLACK):
            raise RangeError(
                f"(d, u) must sit in [0, 1] x [-1/2, 1], got ({self.d}, {self.u})"
            )


def ab_to_du(pair: AccuracyPair) -> DUPair:
    return DUPair(pair.alpha - pair.beta, 3.0 * (pair.alpha + pair.beta) - 2.0)


def du_to_ab(pair: DUPair) -> AccuracyPair:
    s = (pair.u + 2.0) / 3.0
    return AccuracyPair(0.5 * (s + pair.d), 0.5 * (s - pair.d))


def _check_weight(w: float) -> float:
    if not 0.0 <= w <= 1.0:
        raise RangeError(f"edge weight must sit in [0, 1], got {w}")
    return float(w)


def ab_step(
    left: AccuracyPair, right: AccuracyPair, w_left: float, w_right: float
) -> AccuracyPair:
    """One parent update in (alpha, beta) coordinates.

    With p = (1-w)/2 and q = (1+w)/2 per child edge, the chance a child's
    candidate set is the singleton matching the parent's true state is
    A = q*alpha + p*beta, the chance it is the opposing singleton is
    B = p*alpha + q*beta, and the parent's set is a singleton exactly
    when at least one child is a singleton and no opposing singleton
    survives intersection:

        alpha_parent = A_l*A_r + A_l*(1 - sigma_r) + (1 - sigma_l)*A_r
        beta_parent  = B_l*B_r + B_l*(1 - sigma_r) + (1 - sigma_l)*B_r
    """
    if not isinstance(left, AccuracyPair) or not isinstance(right, AccuracyPair):
        raise ValidationError("ab_step takes two AccuracyPair children")
    wl, wr = _check_weight(w_left), _check_weight(w_right)
    pl, ql = (1.0 - wl) / 2.0, (1.0 + wl) / 2.0
    pr, qr = (1.0 - wr) / 2.0, (1.0 + wr) / 2.0
    al = ql * left.alpha + pl * left.beta
    bl = pl * left.alpha + ql * left.beta
    ar = qr * right.alpha + pr * right.beta
    br = pr * right.alpha + qr * right.beta
    rem_l = 1.0 - left.sigma
    rem_r = 1.0 - right.sigma
    alpha = al * ar + al * rem_r + rem_l * ar
    beta = bl * br + bl * rem_r + rem_l * br
    return AccuracyPair(alpha, beta)


def du_step(left: DUPair, right: DUPair, w_left: float, w_right: float) -> DUPair:
    """One parent update in (d, u) coordinates:

        d_parent = ((4 - u_r)/6) * w_l * d_l + ((4 - u_l)/6) * w_r * d_r
        u_parent = (3/2) * w_l * w_r * d_l * d_r - (1/2) * u_l * u_r
    """
    if not isinstance(left, DUPair) or not isinstance(right, DUPair):
        raise ValidationError("du_step takes two DUPair children")
    wl, wr = _check_weight(w_left), _check_weight(w_right)
    d = ((4.0 - right.u) / 6.0) * wl * left.d + ((4.0 - left.u) / 6.0) * wr * right.d
    u = 1.5 * wl * wr * left.d * right.d - 0.5 * left.u * right.u
    d, u = _clamp_scalar(d, 0.0, 1.0, "d"), _clamp_scalar(u, -0.5, 1.0, "u")
    return DUPair(d, u)


def _clamp_scalar(x: float, lo: float, hi: float, what: str) -> float:
    if x < lo - _SLACK or x > hi + _SLACK:
        raise NumericsError(f"{what} = {x} escapes [{lo}, {hi}] beyond rounding slack")
    return min(max(x, lo), hi)


def _clamp_array(arr: np.ndarray, lo: float, hi: float, what: str) -> np.ndarray:
    if (arr < lo - _SLACK).any() or (arr > hi + _SLACK).any():
        bad = float(arr[np.argmax((arr < lo - _SLACK) | (arr > hi + _SLACK))])
        raise NumericsError(f"{what} = {bad} escapes [{lo}, {hi}] beyond rounding slack")
    return np.clip(arr, lo, hi)


class DUField(LevelMap):
    """Per-vertex (d, u) over the truncated tree, as a map vid -> DUPair."""

    @property
    def root(self) -> DUPair:
        return self[0]

    def d_at(self, li: int) -> np.ndarray:
        return self.arrays[li][0]

    def u_at(self, li: int) -> np.ndarray:
        return self.arrays[li][1]


def propagate(tree: WeightedTree, cutset: Cutset) -> DUField:
    """Exact (d, u) for every vertex of the tree truncated at `cutset`,
    from the boundary condition (1, 1) upward."""
    levels = tree_levels(tree, cutset)
    n_levels = len(levels)
    d_arrays: list[np.ndarray] = [None] * n_levels
    u_arrays: list[np.ndarray] = [None] * n_levels
    for li in range(n_levels - 1, -1, -1):
        lv = levels[li]
        d = np.ones(len(lv.vids))
        u = np.ones(len(lv.vids))
        if len(lv.internal_pos):
            child_vids = levels[li + 1].vids
            w = tree.weights[child_vids]
            dc = d_arrays[li + 1]
            uc = u_arrays[li + 1]
            wl, wr = w[0::2], w[1::2]
            dl, dr = dc[0::2], dc[1::2]
            ul, ur = uc[0::2], uc[1::2]
            d_int = ((4.0 - ur) / 6.0) * wl * dl + ((4.0 - ul) / 6.0) * wr * dr
            u_int = 1.5 * wl * wr * dl * dr - 0.5 * ul * ur
            d[lv.internal_pos] = _clamp_array(d_int, 0.0, 1.0, "d")
            u[lv.internal_pos] = _clamp_array(u_int, -0.5, 1.0, "u")
        d_arrays[li] = d
        u_arrays[li] = u
    return DUField(levels, list(zip(d_arrays, u_arrays)), wrap=DUPair)


def propagate_ab(tree: WeightedTree, cutset: Cutset) -> LevelMap:
    """(alpha, beta) propagation; the cross-check twin of propagate."""
    levels = tree_levels(tree, cutset)
    n_levels = len(levels)
    a_arrays: list[np.ndarray] = [None] * n_levels
    b_arrays: list[np.ndarray] = [None] * n_levels
    for li in range(n_levels - 1, -1, -1):
        lv = levels[li]
        a = np.ones(len(lv.vids))
        b = np.zeros(len(lv.vids))
        if len(lv.internal_pos):
            child_vids = levels[li + 1].vids
            w = tree.weights[child_vids]
            ac = a_arrays[li + 1]
            bc = b_arrays[li + 1]
            p, q = (1.0 - w) / 2.0, (1.0 + w) / 2.0
            up = q * ac + p * bc
            down = p * ac + q * bc
            rem = 1.0 - ac - bc
            al, ar = up[0::2], up[1::2]
            bl, br = down[0::2], down[1::2]
            rl, rr = rem[0::2], rem[1::2]
            a[lv.internal_pos] = al * ar + al * rr + rl * ar
            b[lv.internal_pos] = bl * br + bl * rr + rl * br
        a_arrays[li] = a
        b_arrays[li] = b
    return LevelMap(levels, list(zip(a_arrays, b_arrays)), wrap=AccuracyPair)


def reconstruction_accuracy(root: DUPair) -> float:
    """Probability the maximum-parsimony estimate matches the true root:
    1/2 + d/2."""
    if isinstance(root, DUField):
        root = root.root
    if not isinstance(root, DUPair):
        raise ValidationError("reconstruction_accuracy takes the root DUPair")
    return 0.5 + 0.5 * root.d


def exact_ra(tree: WeightedTree, cutset: Cutset | None = None) -> float:
    """Convenience: propagate and read the root accuracy."""
    if cutset is None:
        cutset = tree.boundary
    return reconstruction_accuracy(propagate(tree, cutset).root)


@dataclass(frozen=True)
class HomogeneousLimit:
    """Fixed-point report for equal weights w = 1 - 2p on all edges."""

    p: float
    w: float
    pair: DUPair
    iterations: int
    converged: bool
    regime: str  # "super-threshold" | "critical" | "sub-threshold"

    @property
    def d(self) -> float:
        return self.pair.d

    @property
    def u(self) -> float:
        return self.pair.u


def homogeneous_limit(p: float, tol: float = 1e-12, max_iters: int = 1_000_000) -> HomogeneousLimit:
    """Iterate the equal-weights recurrence from the boundary value (1, 1)
    -- the regular-cutset sequence as depth grows -- until successive
    pairs differ by less than tol in max norm.

    The regime label reports the sign of (4/3)w - 1, the linearized
    growth factor of d near (0, 0): positive means the no-information
    point repels (a positive limit exists), negative means it attracts.
    """
    if not 0.0 <= p <= 0.5:
        raise RangeError(f"flip probability must sit in [0, 1/2], got {p}")
    if not tol > 0.0:
        raise RangeError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise RangeError(f"max_iters must be at least 1, got {max_iters}")
    w = 1.0 - 2.0 * p
    growth = (4.0 / 3.0) * w - 1.0
    regime = "critical" if growth == 0.0 else ("super-threshold" if growth > 0.0 else "sub-threshold")
    d, u = 1.0, 1.0
    iterations = 0
    converged = False
    while iterations < max_iters:
        nd = 2.0 * ((4.0 - u) / 6.0) * w * d
        nu = 1.5 * w * w * d * d - 0.5 * u * u
        nd = _clamp_scalar(nd, 0.0, 1.0, "d")
        nu = _clamp_scalar(nu, -0.5, 1.0, "u")
        iterations += 1
        if max(abs(nd - d), abs(nu - u)) < tol:
            d, u = nd, nu
            converged = True
            break
        d, u = nd, nu
    return HomogeneousLimit(
        p=float(p), w=w, pair=DUPair(d, u), iterations=iterations,
        converged=converged, regime=regime,
    )


def root_cutset_identity_residual(tree: WeightedTree, outer: Cutset, inner) -> float:
    """Residual of the root-margin decomposition across an inner cutset.

    With the field propagated from `outer`, the root margin equals the
    sum over inner-cutset vertices x of d_x times, along the path from x
    up to (excluding) the root, the factor ((4 - u_sibling(z))/6) * w_z.
    Returns |direct - decomposed|.
    """
    field = propagate(tree, outer)
    if not isinstance(inner, Cutset):
        inner = validate_cutset(tree, inner)
    else:
        validate_cutset(tree, inner.ids)
    for v in inner.ids:
        if int(v) not in field:
            raise ValidationError(
                f"inner cutset vertex {int(v)} is outside the tree truncated at the outer cutset"
            )
    total = 0.0
    for x in inner.ids:
        x = int(x)
        term = field[x].d
        z = x
        while z != 0:
            term *= ((4.0 - field[sibling(z)].u) / 6.0) * float(tree.weights[z])
            z = (z - 1) >> 1
        total += term
    return abs(field.root.d - total)


def growth_bound_deficit(tree: WeightedTree, field: DUField) -> float:
    """Max over parent-child pairs of (w_child/2)*d_child - d_parent.

    Non-positive (within rounding) for every propagated field: a parent
    retains at least half a child's attenuated margin.
    """
    worst = -np.inf
    for li in range(len(field.levels) - 1):
        lv = field.levels[li]
        if not len(lv.internal_pos):
            continue
        child_vids = field.levels[li + 1].vids
        w = tree.weights[child_vids]
        dc = field.d_at(li + 1)
        dp = np.repeat(field.d_at(li)[lv.internal_pos], 2)
        deficit = 0.5 * w * dc - dp
        worst = max(worst, float(deficit.max()))
    return worst if np.isfinite(worst) else 0.0
