"""Monte Carlo estimation, brute-force accuracy oracle, threshold
sweeps, and the tabular output formats shared by the CLI and service.

Determinism: every trial is a pure function of (seed, absolute trial
index), and aggregation sums integer success counts, so estimates do not
depend on chunking or worker count.
"""

from __future__ import annotations

import json
import math
import os
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cf, parsimony, rng
from .errors import RangeError, ResourceLimitError, ValidationError
from .recurrence import propagate, reconstruction_accuracy
from .trees import (
    Cutset,
    Fixed,
    WeightModel,
    Yule,
    build_tree,
    parse_model,
    read_tree,
    regular_cutset,
    tree_levels,
    truncate,
    validate_cutset,
    WeightedTree,
)

CSV_VERSION_LINE = "# parsimony-threshold v1"
BRUTE_FORCE_MAX = 20          # largest |cutset| enumerated exactly
_MC_CELL_BUDGET = 4_194_304   # per-chunk trials x states cells
_DUMP_CELL_CAP = 4_194_304    # largest trials x |cutset| state dump


def worker_count(explicit: int | None = None) -> int:
    """Workers for trial-level parallelism: explicit argument, then the
    PARSIMONY_THREADS environment variable, then available parallelism."""
    if explicit is not None:
        if int(explicit) < 1:
            raise RangeError(f"worker count must be positive, got {explicit}")
        return int(explicit)
    env = os.environ.get("PARSIMONY_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"PARSIMONY_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise RangeError(f"PARSIMONY_THREADS must be positive, got {n}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible estimation run.

    Exactly one tree source: a weight model (materialized to the depth
    the cutset needs) or a tree file. The cutset spec is "regular:N", an
    explicit id list, "file:PATH", or None for the tree's own boundary.
    """

    model: WeightModel | None = None
    tree_file: str | None = None
    cutset: object = None
    trials: int = 10_000
    seed: int = 0
    output: str | None = None
    fmt: str = "csv"
    threads: int | None = None
    chunk: int = 8192
    depth_cap: int = 25

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError(f"trials must be at least 1, got {self.trials}")
        if (self.model is None) == (self.tree_file is None):
            raise ValidationError("provide exactly one tree source: model or tree_file")
        if self.fmt not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.fmt!r}")
        if self.chunk < 1:
            raise ValidationError(f"chunk must be positive, got {self.chunk}")


def parse_cutset_spec(spec) -> tuple[str, object]:
    """Normalize a cutset spec to ("regular", n) | ("ids", list) | ("file", path)."""
    if isinstance(spec, (list, tuple, np.ndarray)):
        ids = [int(v) for v in spec]
        if not ids:
            raise ValidationError("cutset id list is empty")
        return ("ids", ids)
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("regular:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError:
                raise ValidationError(f"bad cutset spec {spec!r}") from None
            if n < 0:
                raise RangeError(f"regular cutset level must be non-negative, got {n}")
            return ("regular", n)
        if text.startswith("ids:"):
            try:
                ids = [int(x) for x in text.split(":", 1)[1].split(",") if x.strip()]
            except ValueError:
                raise ValidationError(f"bad cutset spec {spec!r}") from None
            if not ids:
                raise ValidationError("cutset id list is empty")
            return ("ids", ids)
        if text.startswith("file:"):
            return ("file", text.split(":", 1)[1])
        raise ValidationError(
            f"bad cutset spec {spec!r}: expected regular:N, ids:..., file:PATH, or an id list"
        )
    raise ValidationError(f"bad cutset spec {spec!r}")


def _cutset_ids_from_file(path: str) -> list[int]:
    try:
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read cutset file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed cutset file {path}: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("cutset")
    if not isinstance(doc, list):
        raise ValidationError(f"cutset file {path} must hold an id array or {{\"cutset\": [...]}}")
    return [int(v) for v in doc]


def resolve_experiment(config: ExperimentConfig) -> tuple[WeightedTree, Cutset]:
    """Materialize the tree and validate the cutset a config refers to."""
    spec = config.cutset
    kind, payload = (None, None) if spec is None else parse_cutset_spec(spec)
    if kind == "file":
        kind, payload = "ids", _cutset_ids_from_file(payload)
    if config.tree_file is not None:
        tree = read_tree(config.tree_file)
    else:
        if kind is None:
            raise ValidationError("a model-built experiment needs a cutset spec")
        if kind == "regular":
            depth = payload
        else:
            from .trees import level as vertex_level
            depth = max(vertex_level(int(v)) for v in payload)
        tree = build_tree(config.model, depth, seed=config.seed, depth_cap=config.depth_cap)
    if kind is None:
        cutset = tree.boundary
    elif kind == "regular":
        cutset = regular_cutset(tree, payload)
    else:
        cutset = validate_cutset(tree, payload)
    return tree, cutset


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    trials: int
    successes: int


def _mc_success_count(
    tree: WeightedTree, cutset: Cutset, seed: int, trials: int,
    chunk: int, threads: int, levels=None,
) -> int:
    if levels is None:
        levels = tree_levels(tree, cutset)
    k = len(cutset.ids)
    chunk = max(1, min(chunk, _MC_CELL_BUDGET // max(1, k)))
    offsets = [(off, min(chunk, trials - off)) for off in range(0, trials, chunk)]

    def run(job) -> int:
        off, n = job
        batch = cf.sample_states(tree, cutset, seed=seed, trials=n, trial_offset=off, levels=levels)
        return int(parsimony.reconstruct_batch(tree, batch, levels=levels).correct.sum())

    if threads > 1 and len(offsets) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return sum(pool.map(run, offsets))
    return sum(run(job) for job in offsets)


def mc_estimate_on(
    tree: WeightedTree, cutset: Cutset, *, trials: int, seed: int = 0,
    chunk: int = 8192, threads: int | None = None,
) -> MCEstimate:
    """Monte Carlo reconstruction accuracy on an already-resolved tree."""
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    successes = _mc_success_count(tree, cutset, seed, trials, chunk, worker_count(threads))
    estimate = successes / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return MCEstimate(estimate=estimate, stderr=stderr, trials=trials, successes=successes)


def mc_estimate_ra(config: ExperimentConfig) -> MCEstimate:
    """End-to-end Monte Carlo reconstruction accuracy: sample boundary
    states, reconstruct the root, compare with the truth (coin on ties)."""
    tree, cutset = resolve_experiment(config)
    return mc_estimate_on(
        tree, cutset, trials=config.trials, seed=config.seed,
        chunk=config.chunk, threads=config.threads,
    )


def boundary_state_rows(
    tree: WeightedTree, cutset: Cutset, *, trials: int, seed: int = 0,
) -> list[tuple[int, int, int]]:
    """(trial, vertex, state) rows of the sampled boundary patterns."""
    k = len(cutset.ids)
    if trials * k > _DUMP_CELL_CAP:
        raise ResourceLimitError(
            f"state dump of {trials} x {k} cells exceeds the cap; lower trials"
        )
    batch = cf.sample_states(tree, cutset, seed=seed, trials=trials)
    rows = []
    ids = [int(v) for v in cutset.ids]
    for t in range(trials):
        states = batch.boundary[t]
        rows.extend((t, ids[j], int(states[j])) for j in range(k))
    return rows


def boundary_state_dump(config: ExperimentConfig) -> list[tuple[int, int, int]]:
    """(trial, vertex, state) rows for the experiment a config describes."""
    tree, cutset = resolve_experiment(config)
    return boundary_state_rows(tree, cutset, trials=config.trials, seed=config.seed)


def brute_force_ra(tree: WeightedTree, cutset: Cutset) -> float:
    """Exact reconstruction accuracy by enumerating every boundary
    pattern: sum over both root states of pattern likelihood times the
    parsimony credit (1 for the matching singleton, 1/2 for a tie).

    Independent of the recurrence engine; the oracle the recurrences are
    tested against. Capped at |cutset| = 20 patterns-wise.
    """
    k = len(cutset.ids)
    if k > BRUTE_FORCE_MAX:
        raise ResourceLimitError(
            f"brute force enumerates 2^|cutset| patterns; |cutset| = {k} exceeds {BRUTE_FORCE_MAX}"
        )
    levels = tree_levels(tree, cutset)
    n_levels = len(levels)
    offsets = np.zeros(n_levels + 1, dtype=np.int64)
    for i, lv in enumerate(levels):
        offsets[i + 1] = offsets[i] + int(lv.boundary_mask.sum())
    total_patterns = 1 << k
    chunk = max(1, min(total_patterns, _MC_CELL_BUDGET // max(1, k)))
    col = np.arange(k, dtype=np.uint64)
    total = 0.0
    for start in range(0, total_patterns, chunk):
        stop = min(start + chunk, total_patterns)
        patterns = np.arange(start, stop, dtype=np.uint64)
        bits = ((patterns[:, None] >> col[None, :]) & np.uint64(1)).astype(np.uint8)
        root_mask, _, _ = parsimony.fitch_masks(levels, bits)
        # pattern likelihood given each root state, by upward message passing
        like0 = like1 = None
        for li in range(n_levels - 1, -1, -1):
            lv = levels[li]
            n = len(lv.vids)
            L0 = np.empty((len(patterns), n))
            L1 = np.empty((len(patterns), n))
            bslice = bits[:, offsets[li]:offsets[li + 1]]
            L0[:, lv.boundary_mask] = bslice == 0
            L1[:, lv.boundary_mask] = bslice == 1
            if len(lv.internal_pos):
                w = tree.weights[levels[li + 1].vids]
                p, q = (1.0 - w) / 2.0, (1.0 + w) / 2.0
                m0 = q * like0 + p * like1
                m1 = p * like0 + q * like1
                L0[:, lv.internal_pos] = m0[:, 0::2] * m0[:, 1::2]
                L1[:, lv.internal_pos] = m1[:, 0::2] * m1[:, 1::2]
            like0, like1 = L0, L1
        credit0 = (root_mask == parsimony.MASK_ZERO) + 0.5 * (root_mask == parsimony.MASK_BOTH)
        credit1 = (root_mask == parsimony.MASK_ONE) + 0.5 * (root_mask == parsimony.MASK_BOTH)
        total += float(np.sum(0.5 * like0[:, 0] * credit0 + 0.5 * like1[:, 0] * credit1))
    return total


# ---------------------------------------------------------------------------
# threshold sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    kind: str
    param: float
    depth: int
    replicate: int
    d_root: float
    ra_exact: float
    ra_mc: float | None
    ra_mc_stderr: float | None


@dataclass(frozen=True)
class SweepResult:
    kind: str
    grid: tuple[float, ...]
    depths: tuple[int, ...]
    trials: int
    tree_samples: int
    seed: int
    rows: tuple[SweepRow, ...] = field(repr=False)

    def select(self, param: float, depth: int) -> list[SweepRow]:
        return [r for r in self.rows if r.param == param and r.depth == depth]

    def median_ra(self, param: float, depth: int) -> float:
        vals = [r.ra_exact for r in self.select(param, depth)]
        if not vals:
            raise ValidationError(f"no sweep rows at param={param}, depth={depth}")
        return float(np.median(vals))


def _float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def sweep_threshold(
    kind: str,
    grid,
    depths,
    trials: int = 0,
    seed: int = 0,
    tree_samples: int = 1,
    threads: int | None = None,
    chunk: int = 8192,
    depth_cap: int = 25,
) -> SweepResult:
    """Exact (and optionally Monte Carlo) accuracy over a parameter grid.

    kind "fixed_p": grid holds flip probabilities p in [0, 1/2); every
    edge carries weight 1 - 2p (one deterministic tree per depth).
    kind "yule_lambda": grid holds birth rates; tree_samples independent
    trees are drawn per rate, and each row reports that tree's exact
    accuracy (the recurrence on its sampled weights), separating tree
    randomness from state randomness. trials = 0 skips the MC columns.
    """
    if kind not in ("fixed_p", "yule_lambda"):
        raise ValidationError(f"sweep kind must be fixed_p or yule_lambda, got {kind!r}")
    grid = tuple(float(g) for g in grid)
    depths = tuple(int(d) for d in depths)
    if not grid or not depths:
        raise ValidationError("sweep needs a non-empty grid and depth list")
    if any(d < 0 for d in depths):
        raise RangeError("depths must be non-negative")
    if trials < 0:
        raise RangeError(f"trials must be non-negative, got {trials}")
    if tree_samples < 1:
        raise RangeError(f"tree_samples must be positive, got {tree_samples}")
    if kind == "fixed_p":
        for p in grid:
            if not 0.0 <= p < 0.5:
                raise RangeError(f"flip probability must sit in [0, 1/2), got {p}")
        tree_samples = 1
    else:
        for lam in grid:
            if not lam > 0.0:
                raise RangeError(f"birth rate must be positive, got {lam}")
    n_workers = worker_count(threads)
    max_depth = max(depths)
    rows: list[SweepRow] = []
    for param in grid:
        for replicate in range(tree_samples):
            if kind == "fixed_p":
                model: WeightModel = Fixed(1.0 - 2.0 * param)
                tree_seed = seed
            else:
                model = Yule(param)
                tree_seed = rng.derive_key(seed, rng.TAG_WEIGHT, replicate)
            deepest = build_tree(model, max_depth, seed=tree_seed, depth_cap=depth_cap)
            for depth in depths:
                tree = truncate(deepest, depth)
                cutset = tree.boundary
                pair = propagate(tree, cutset).root
                ra = reconstruction_accuracy(pair)
                ra_mc = mc_se = None
                if trials > 0:
                    mc_seed = rng.derive_key(seed, rng.TAG_TRIAL, _float_bits(param), depth, replicate)
                    successes = _mc_success_count(tree, cutset, mc_seed, trials, chunk, n_workers)
                    ra_mc = successes / trials
                    mc_se = math.sqrt(ra_mc * (1.0 - ra_mc) / trials)
                rows.append(SweepRow(
                    kind=kind, param=param, depth=depth, replicate=replicate,
                    d_root=float(pair.d), ra_exact=float(ra),
                    ra_mc=ra_mc, ra_mc_stderr=mc_se,
                ))
    return SweepResult(
        kind=kind, grid=grid, depths=depths, trials=trials,
        tree_samples=tree_samples, seed=seed, rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# tabular output
# ---------------------------------------------------------------------------

def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def format_csv(columns, rows) -> str:
    """Versioned CSV: the schema comment line, a header row, then data.
    Floats use shortest round-trip notation, so identical numbers give
    byte-identical files."""
    lines = [CSV_VERSION_LINE, ",".join(columns)]
    lines.extend(",".join(_cell(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def format_json(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def sweep_rows(result: SweepResult) -> tuple[list[str], list[tuple]]:
    columns = ["kind", "param", "depth", "replicate", "d_root", "ra_exact", "ra_mc", "ra_mc_stderr"]
    rows = [
        (r.kind, r.param, r.depth, r.replicate, r.d_root, r.ra_exact, r.ra_mc, r.ra_mc_stderr)
        for r in result.rows
    ]
    return columns, rows


def write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
