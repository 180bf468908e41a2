"""Command-line client for the service.

Every subcommand sends one request to the HTTP app — run in-process by
default, or against a remote ``serve`` instance via ``--server URL`` —
and renders the JSON reply as JSON or versioned CSV.

Exit codes: 0 success, 1 validation/usage failure, 2 resource-limit
rejection.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .errors import ValidationError
from .harness import _cutset_ids_from_file, format_csv, format_json, write_text

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RESOURCE = 2

_DEFAULT_FORMAT = {
    "simulate": "csv",
    "exact-ra": "json",
    "fixed-point": "json",
    "branching": "json",
    "percolation": "json",
    "sweep": "csv",
    "oracle-check": "json",
}

# one-row CSV summaries: ordered columns pulled from the response payload
_SUMMARY_COLUMNS = {
    "simulate": ["estimate", "stderr", "trials", "successes", "cutset_size"],
    "exact-ra": ["ra", "d_root", "u_root", "cutset_size"],
    "fixed-point": ["p", "w", "d", "u", "ra", "iterations", "converged", "regime"],
    "branching": ["value", "lower", "upper", "tolerance", "converged", "note"],
    "branching-condition": ["holds", "conclusive", "margin", "estimate", "threshold", "min_weight"],
    "extinction": ["q_tilde", "depth", "trials", "extinct", "survived",
                   "frequency", "stderr", "analytic"],
    "constants": ["H", "eps_prime"],
    "oracle-check": ["brute_force", "recurrence", "difference", "ok"],
}


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, per the contract
    that exit 2 is reserved for resource-limit rejections."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


class ServiceClient:
    """POST JSON to the app: in-process ASGI by default, HTTP with --server."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            with warnings.catch_warnings():
                warnings.filterwarnings("ignore", message=r"Using `httpx` with `starlette\.testclient`")
                from starlette.testclient import TestClient

                from .service import create_app

                self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> tuple[int, object]:
        import httpx

        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ValidationError(f"cannot reach server: {exc}") from None
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        return response.status_code, body


def _csv_ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _csv_floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--server", default=None, metavar="URL",
                     help="send requests to a running serve instance instead of in-process")
    sub.add_argument("--output", default=None, metavar="PATH",
                     help="write the result here instead of stdout")
    sub.add_argument("--format", choices=("csv", "json"), default=None,
                     help="output format (default depends on the subcommand)")
    sub.add_argument("--config", default=None, metavar="PATH",
                     help="JSON file of defaults for this subcommand's flags")


def _add_tree_source(sub: argparse.ArgumentParser, with_cutset: bool = True) -> None:
    sub.add_argument("--model", default=None,
                     help="weight model spec: fixed:W, yule:RATE, iid:uniform:LO,HI, ...")
    sub.add_argument("--tree", default=None, metavar="PATH",
                     help="tree document (JSON) to load instead of --model")
    if with_cutset:
        sub.add_argument("--cutset", default=None,
                         help="regular:N, ids:V1,V2,..., or file:PATH")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--depth-cap", type=int, default=25)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="parsimony-threshold",
                     description="reconstruction-threshold experiments on weighted binary trees")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs: dict[str, argparse.ArgumentParser] = {}

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        subs[name] = sub
        _add_common(sub)
        return sub

    sub = add("simulate", "Monte Carlo reconstruction accuracy")
    _add_tree_source(sub)
    sub.add_argument("--trials", type=int, default=10_000)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--chunk", type=int, default=8192)
    sub.add_argument("--dump-states", action="store_true",
                     help="emit per-trial boundary states instead of the summary")

    sub = add("exact-ra", "exact reconstruction accuracy by recurrence")
    _add_tree_source(sub)

    sub = add("fixed-point", "homogeneous-tree accuracy limit for one flip probability")
    sub.add_argument("--p", type=float, required=True, help="per-edge flip probability in [0, 1/2)")
    sub.add_argument("--tol", type=float, default=1e-12)
    sub.add_argument("--max-iters", type=int, default=1_000_000)

    sub = add("branching", "weighted branching-number estimate (and threshold gate)")
    sub.add_argument("--model", required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--depths", type=_csv_ints, default=[5, 10, 15, 20],
                     help="increasing truncation-depth schedule, e.g. 4,8,12,16")
    sub.add_argument("--tol", type=float, default=0.01)
    sub.add_argument("--thinning", type=float, default=None, metavar="Q",
                     help="keep each vertex with probability Q and measure the root cluster")
    sub.add_argument("--bracket", type=_csv_floats, default=None, metavar="LO,HI")
    sub.add_argument("--depth-cap", type=int, default=25)
    sub.add_argument("--condition", action="store_true",
                     help="report whether the branching number clears 3/2")
    sub.add_argument("--decay-table", action="store_true",
                     help="CSV of (kappa, depth, min_cutset_sum) probe triples")

    sub = add("percolation", "weight-threshold percolation tools")
    sub.add_argument("--mode", choices=("extinction", "subtree", "constants"),
                     default="extinction")
    sub.add_argument("--q-tilde", type=float, default=None,
                     help="per-vertex keep probability (extinction mode)")
    sub.add_argument("--depth", type=int, default=None)
    sub.add_argument("--trials", type=int, default=10_000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--per-trial", action="store_true",
                     help="emit one (trial, survived) row per trial (extinction mode)")
    sub.add_argument("--model", default=None)
    sub.add_argument("--tree", default=None, metavar="PATH")
    sub.add_argument("--theta-star", type=float, default=None,
                     help="edge-weight threshold (subtree and constants modes)")
    sub.add_argument("--window-height", type=int, default=None, metavar="H",
                     help="admissibility window height (subtree mode)")
    sub.add_argument("--phi-prime", type=float, default=None,
                     help="target extinction bound in (0, 1/9] (constants mode)")
    sub.add_argument("--depth-cap", type=int, default=25)

    sub = add("sweep", "threshold sweeps over a parameter grid")
    sub.add_argument("--kind", choices=("fixed_p", "yule_lambda"), required=True)
    sub.add_argument("--grid", type=_csv_floats, required=True)
    sub.add_argument("--depths", type=_csv_ints, required=True)
    sub.add_argument("--trials", type=int, default=0,
                     help="Monte Carlo trials per row (0: exact only)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--tree-samples", type=int, default=1)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--chunk", type=int, default=8192)
    sub.add_argument("--depth-cap", type=int, default=25)

    sub = add("oracle-check", "brute-force vs recurrence accuracy comparison")
    _add_tree_source(sub)
    sub.add_argument("--tolerance", type=float, default=1e-12)

    sub = subparsers.add_parser("serve", help="run the HTTP service")
    subs["serve"] = sub
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--port", type=int, default=8000)

    return parser, subs


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed config file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return doc


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    config = _load_config(path)
    known = {action.dest for action in sub._actions}
    unknown = set(config) - known
    if unknown:
        raise ValidationError(
            f"config file {path} sets unknown options: {', '.join(sorted(unknown))}"
        )
    sub.set_defaults(**config)


def _scan_config_path(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _tree_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read tree file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed tree file {path}: {exc}") from None


def _cutset_payload(spec):
    """Resolve file: specs client-side; pass the rest through."""
    if isinstance(spec, str) and spec.strip().startswith("file:"):
        return _cutset_ids_from_file(spec.strip().split(":", 1)[1])
    return spec


def _tree_source_payload(args, payload: dict) -> dict:
    if args.tree is not None:
        payload["tree"] = _tree_document(args.tree)
    if args.model is not None:
        payload["model"] = args.model
    return payload


def _request_for(args) -> tuple[str, dict]:
    """(endpoint path, request body) for one parsed subcommand."""
    cmd = args.command
    if cmd == "simulate":
        payload = _tree_source_payload(args, {
            "cutset": _cutset_payload(args.cutset), "trials": args.trials,
            "seed": args.seed, "dump_states": args.dump_states,
            "chunk": args.chunk, "depth_cap": args.depth_cap,
        })
        if args.threads is not None:
            payload["threads"] = args.threads
        return "/simulate", payload
    if cmd == "exact-ra":
        return "/exact-ra", _tree_source_payload(args, {
            "cutset": _cutset_payload(args.cutset), "seed": args.seed,
            "depth_cap": args.depth_cap,
        })
    if cmd == "fixed-point":
        return "/fixed-point", {"p": args.p, "tol": args.tol, "max_iters": args.max_iters}
    if cmd == "branching":
        payload = {
            "model": args.model, "seed": args.seed, "depths": _csv_ints(args.depths),
            "tol": args.tol, "depth_cap": args.depth_cap,
        }
        if args.condition:
            if args.thinning is not None or args.bracket is not None:
                raise ValidationError("--condition takes no --thinning or --bracket")
            if args.decay_table:
                raise ValidationError("--decay-table applies to the estimate, not --condition")
            return "/branching/condition", payload
        if args.thinning is not None:
            payload["thinning"] = {"q_tilde": args.thinning}
        if args.bracket is not None:
            bracket = _csv_floats(args.bracket)
            if len(bracket) != 2:
                raise ValidationError(f"--bracket needs LO,HI, got {args.bracket!r}")
            payload["bracket"] = bracket
        return "/branching", payload
    if cmd == "percolation":
        if args.mode == "extinction":
            if args.q_tilde is None:
                raise ValidationError("extinction mode needs --q-tilde")
            return "/percolation/extinction", {
                "q_tilde": args.q_tilde, "depth": args.depth if args.depth is not None else 20,
                "trials": args.trials, "seed": args.seed, "per_trial": args.per_trial,
            }
        if args.mode == "subtree":
            if args.theta_star is None or args.window_height is None:
                raise ValidationError("subtree mode needs --theta-star and --window-height")
            payload = {
                "theta_star": args.theta_star, "H": args.window_height,
                "seed": args.seed, "depth_cap": args.depth_cap,
            }
            if args.tree is not None:
                payload["tree"] = _tree_document(args.tree)
            if args.model is not None:
                payload["model"] = args.model
            if args.depth is not None:
                payload["depth"] = args.depth
            return "/percolation/subtree", payload
        if args.theta_star is None or args.phi_prime is None:
            raise ValidationError("constants mode needs --phi-prime and --theta-star")
        return "/percolation/constants", {
            "phi_prime": args.phi_prime, "theta_star": args.theta_star,
        }
    if cmd == "sweep":
        payload = {
            "kind": args.kind, "grid": _csv_floats(args.grid),
            "depths": _csv_ints(args.depths), "trials": args.trials,
            "seed": args.seed, "tree_samples": args.tree_samples,
            "chunk": args.chunk, "depth_cap": args.depth_cap,
        }
        if args.threads is not None:
            payload["threads"] = args.threads
        return "/sweep", payload
    if cmd == "oracle-check":
        return "/oracle-check", _tree_source_payload(args, {
            "cutset": _cutset_payload(args.cutset), "seed": args.seed,
            "depth_cap": args.depth_cap, "tolerance": args.tolerance,
        })
    raise ValidationError(f"unknown command {cmd!r}")


def _summary_csv(key: str, payload: dict) -> str:
    columns = _SUMMARY_COLUMNS[key]
    return format_csv(columns, [[payload.get(c) for c in columns]])


def _render(args, payload: dict) -> str:
    cmd = args.command
    fmt = args.format or _DEFAULT_FORMAT[cmd]
    if cmd == "branching" and args.decay_table:
        rows = [
            [probe["kappa"], depth, value]
            for probe in payload["probes"]
            for depth, value in zip(probe["depths"], probe["values"])
        ]
        if fmt == "json":
            return format_json({"columns": ["kappa", "depth", "min_cutset_sum"], "rows": rows})
        return format_csv(["kappa", "depth", "min_cutset_sum"], rows)
    if fmt == "json":
        return format_json(payload)
    if cmd == "simulate" and args.dump_states:
        table = payload["states"]
        return format_csv(table["columns"], table["rows"])
    if cmd == "percolation" and args.mode == "extinction" and args.per_trial:
        table = payload["table"]
        return format_csv(table["columns"], table["rows"])
    if cmd == "percolation" and args.mode == "subtree":
        rows = list(enumerate(payload["level_counts"]))
        return format_csv(["level", "members"], rows)
    if cmd == "sweep":
        table = payload["table"]
        return format_csv(table["columns"], table["rows"])
    key = cmd
    if cmd == "branching" and args.condition:
        key = "branching-condition"
    elif cmd == "percolation":
        key = args.mode
    return _summary_csv(key, payload)


def _run_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        config_path = _scan_config_path(argv)
        if config_path is not None and argv and argv[0] in subs:
            _apply_config(subs[argv[0]], config_path)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_VALIDATION
        if args.command == "serve":
            return _run_serve(args)
        path, payload = _request_for(args)
        client = ServiceClient(args.server)
        status, body = client.post(path, payload)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConnectionError, OSError) as exc:
        print(f"error: cannot reach server: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if status != 200:
        detail = body.get("detail", body) if isinstance(body, dict) else body
        label = body.get("error", "error") if isinstance(body, dict) else "error"
        print(f"{label} ({status}): {json.dumps(detail) if not isinstance(detail, str) else detail}",
              file=sys.stderr)
        return EXIT_RESOURCE if status == 413 else EXIT_VALIDATION
    write_text(_render(args, body), args.output)
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
