"""Endpoint implementations: thin request/response adapters over the
library. All numeric work lives in the core modules; handlers only
resolve tree sources, call one library function, and shape the reply.
"""

from __future__ import annotations

from fastapi import APIRouter

from .. import __version__
from .. import branching, harness, recurrence, trees
from ..errors import ValidationError
from . import schemas as sc

router = APIRouter()


def _resolve_source(req: sc.TreeSourceRequest) -> tuple[trees.WeightedTree, trees.Cutset]:
    """(tree, cutset) from a request holding a model spec or inline tree.

    File-based specs are a CLI affordance and must be resolved before the
    request is sent; the service never touches the filesystem.
    """
    if (req.model is None) == (req.tree is None):
        raise ValidationError("provide exactly one tree source: model or tree")
    spec = req.cutset
    kind, payload = (None, None) if spec is None else harness.parse_cutset_spec(spec)
    if kind == "file":
        raise ValidationError("file cutset specs are resolved client-side; send ids")
    if req.tree is not None:
        tree = trees.tree_from_document(req.tree)
    else:
        wm = trees.parse_model(req.model)
        if kind is None:
            raise ValidationError("a model-built experiment needs a cutset spec")
        if kind == "regular":
            depth = payload
        else:
            depth = max(trees.level(int(v)) for v in payload)
        tree = trees.build_tree(wm, depth, seed=req.seed, depth_cap=req.depth_cap)
    if kind is None:
        cutset = tree.boundary
    elif kind == "regular":
        cutset = trees.regular_cutset(tree, payload)
    else:
        cutset = trees.validate_cutset(tree, payload)
    return tree, cutset


@router.get("/health", response_model=sc.HealthResponse)
def health() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", version=__version__)


@router.post("/simulate", response_model=sc.SimulateResponse)
def simulate(req: sc.SimulateRequest) -> sc.SimulateResponse:
    tree, cutset = _resolve_source(req)
    est = harness.mc_estimate_on(
        tree, cutset, trials=req.trials, seed=req.seed,
        chunk=req.chunk, threads=req.threads,
    )
    states = None
    if req.dump_states:
        rows = harness.boundary_state_rows(tree, cutset, trials=req.trials, seed=req.seed)
        states = sc.TableBlock(columns=["trial", "vertex", "state"], rows=[list(r) for r in rows])
    return sc.SimulateResponse(
        estimate=est.estimate, stderr=est.stderr, trials=est.trials,
        successes=est.successes, cutset_size=len(cutset.ids), states=states,
    )


@router.post("/exact-ra", response_model=sc.ExactRaResponse)
def exact_ra(req: sc.ExactRaRequest) -> sc.ExactRaResponse:
    tree, cutset = _resolve_source(req)
    pair = recurrence.propagate(tree, cutset).root
    return sc.ExactRaResponse(
        ra=recurrence.reconstruction_accuracy(pair),
        d_root=pair.d, u_root=pair.u, cutset_size=len(cutset.ids),
    )


@router.post("/fixed-point", response_model=sc.FixedPointResponse)
def fixed_point(req: sc.FixedPointRequest) -> sc.FixedPointResponse:
    lim = recurrence.homogeneous_limit(req.p, tol=req.tol, max_iters=req.max_iters)
    return sc.FixedPointResponse(
        p=lim.p, w=lim.w, d=lim.d, u=lim.u,
        ra=recurrence.reconstruction_accuracy(lim.pair),
        iterations=lim.iterations, converged=lim.converged, regime=lim.regime,
    )


def _branching_estimate(req: sc.BranchingRequest) -> branching.BranchingEstimate:
    kwargs = dict(
        seed=req.seed, depth_schedule=tuple(req.depths), tol=req.tol,
        depth_cap=req.depth_cap,
    )
    if req.thinning is not None:
        kwargs["thinning"] = req.thinning.q_tilde
    if req.bracket is not None:
        kwargs["bracket"] = req.bracket
    return branching.estimate_branching_number(trees.parse_model(req.model), **kwargs)


def _probe_out(p: branching.KappaProbe) -> sc.KappaProbeOut:
    return sc.KappaProbeOut(
        kappa=p.kappa, depths=list(p.depths), values=list(p.values), decays=p.decays
    )


@router.post("/branching", response_model=sc.BranchingResponse)
def branching_number(req: sc.BranchingRequest) -> sc.BranchingResponse:
    est = _branching_estimate(req)
    return sc.BranchingResponse(
        value=est.value, lower=est.lower, upper=est.upper, tolerance=req.tol,
        converged=est.converged, note=est.note or None,
        probes=[_probe_out(p) for p in est.probes],
    )


@router.post("/branching/condition", response_model=sc.ConditionResponse)
def condition(req: sc.ConditionRequest) -> sc.ConditionResponse:
    if req.thinning is not None or req.bracket is not None:
        raise ValidationError("the condition gate takes no thinning or bracket overrides")
    report = branching.branching_condition(
        trees.parse_model(req.model), seed=req.seed,
        depth_schedule=tuple(req.depths), tol=req.tol, depth_cap=req.depth_cap,
    )
    return sc.ConditionResponse(
        holds=report.holds, conclusive=report.conclusive, margin=report.margin,
        estimate=report.estimate.value, threshold=branching.THRESHOLD,
        min_weight=report.min_weight,
    )


@router.post("/percolation/extinction", response_model=sc.ExtinctionResponse)
def extinction(req: sc.ExtinctionRequest) -> sc.ExtinctionResponse:
    sample = branching.simulate_extinction(req.q_tilde, req.depth, req.trials, seed=req.seed)
    table = None
    if req.per_trial:
        rows = [[t, bool(sample.survived[t])] for t in range(sample.trials)]
        table = sc.TableBlock(columns=["trial", "survived"], rows=rows)
    return sc.ExtinctionResponse(
        q_tilde=sample.q_tilde, depth=sample.depth, trials=sample.trials,
        extinct=sample.extinct, survived=sample.trials - sample.extinct,
        frequency=sample.frequency, stderr=sample.stderr, analytic=sample.analytic,
        table=table,
    )


@router.post("/percolation/subtree", response_model=sc.SubtreeResponse)
def subtree(req: sc.SubtreeRequest) -> sc.SubtreeResponse:
    if (req.model is None) == (req.tree is None):
        raise ValidationError("provide exactly one tree source: model or tree")
    if req.tree is not None:
        if req.depth is not None:
            raise ValidationError("an inline tree fixes its own depth; drop the depth field")
        tree = trees.tree_from_document(req.tree)
    else:
        if req.depth is None:
            raise ValidationError("a model-built percolation run needs a depth")
        tree = trees.build_tree(
            trees.parse_model(req.model), req.depth, seed=req.seed, depth_cap=req.depth_cap
        )
    sample = branching.percolation_subtree(tree, req.theta_star, req.H)
    counts = sample.level_counts()
    return sc.SubtreeResponse(
        theta_star=sample.theta_star, H=sample.H, max_level=sample.max_level,
        survived=sample.survived, level_counts=[int(c) for c in counts],
        subtree_size=int(counts.sum()),
    )


@router.post("/percolation/constants", response_model=sc.ConstantsResponse)
def constants(req: sc.ConstantsRequest) -> sc.ConstantsResponse:
    cc = branching.coupling_constants(req.phi_prime, req.theta_star)
    return sc.ConstantsResponse(H=cc.H, eps_prime=cc.eps_prime)


@router.post("/sweep", response_model=sc.SweepResponse)
def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
    result = harness.sweep_threshold(
        req.kind, req.grid, req.depths, trials=req.trials, seed=req.seed,
        tree_samples=req.tree_samples, threads=req.threads, chunk=req.chunk,
        depth_cap=req.depth_cap,
    )
    columns, rows = harness.sweep_rows(result)
    return sc.SweepResponse(
        kind=result.kind, grid=list(result.grid), depths=list(result.depths),
        trials=result.trials, tree_samples=result.tree_samples, seed=result.seed,
        table=sc.TableBlock(columns=columns, rows=[list(r) for r in rows]),
    )


@router.post("/oracle-check", response_model=sc.OracleCheckResponse)
def oracle_check(req: sc.OracleCheckRequest) -> sc.OracleCheckResponse:
    tree, cutset = _resolve_source(req)
    brute = harness.brute_force_ra(tree, cutset)
    exact = recurrence.exact_ra(tree, cutset)
    diff = abs(brute - exact)
    return sc.OracleCheckResponse(
        brute_force=brute, recurrence=exact, difference=diff,
        ok=diff <= req.tolerance,
    )
