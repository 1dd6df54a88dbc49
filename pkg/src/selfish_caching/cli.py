"""Command-line interface.

Network arguments accept a file path or ``-`` for standard input. Exit
codes: 0 success, 1 malformed input or unmet precondition, 2 search
budget or enumeration limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .approx import find_beta_psne
from .enumeration import DEFAULT_LIMIT
from .equilibrium import brute_force_psne, find_psne_state_graph
from .errors import CachingError, NonTerminationError, SearchLimitError
from .experiments import ExperimentConfig, run_experiment, summarize, write_csv, write_summary_csv
from .io import dump_network, dumps, network_from_dict
from .metrics import brute_force_optimum, certify_bounds, lp_upper_bound
from .network import validate_network
from .properties import check_properties
from .scenarios import build


class InputError(Exception):
    pass


def _load(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return network_from_dict(data)


def _emit(obj):
    sys.stdout.write(dumps(obj))


def _param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def cmd_validate(args):
    problems = validate_network(_load(args.network))
    for p in problems:
        print(p, file=sys.stderr)
    return 1 if problems else 0


def cmd_props(args):
    _emit(check_properties(_load(args.network)).to_dict())


def cmd_psne(args):
    net = _load(args.network)
    res = find_psne_state_graph(net, seed=args.seed, max_arcs=args.max_arcs)
    _emit(res.to_dict(net))


def cmd_psne_all(args):
    net = _load(args.network)
    eqs = brute_force_psne(net, args.limit)
    _emit({"count": len(eqs), "equilibria": [p.to_sets(net) for p in eqs]})


def cmd_approx_psne(args):
    net = _load(args.network)
    res = find_beta_psne(net, solver=args.solver)
    _emit(res.to_dict(net))


def cmd_opt(args):
    net = _load(args.network)
    profile, value = brute_force_optimum(net, args.limit)
    _emit({"welfare_opt_exact": value, "profile": profile.to_sets(net)})


def cmd_upper(args):
    net = _load(args.network)
    phi, value = lp_upper_bound(net)
    frac = {net.nodes[s]: {net.items[i]: float(phi[s, i]) for i in range(net.n_items) if phi[s, i] > 0}
            for s in range(net.n_nodes)}
    _emit({"welfare_opt_upper": value, "phi": frac})


def cmd_analyze(args):
    net = _load(args.network)
    _emit(certify_bounds(net, beta=args.beta, limit=args.limit).to_dict())


def cmd_scenario(args):
    params = dict(args.param)
    side = params.pop("side", "right") if args.name == "fig5_paradox_pair" else None
    net = build(args.name, **params)
    if side is not None:
        if side not in ("left", "right"):
            raise InputError("side must be 'left' or 'right'")
        net = net[0] if side == "left" else net[1]
    text = dump_network(net, args.out)
    if args.out is None:
        sys.stdout.write(text)


def cmd_experiment(args):
    try:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise InputError(f"{args.config}: {exc}") from None
    results = run_experiment(cfg)
    text = write_csv(results, args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.summary:
        write_summary_csv(summarize(results, cfg.ratio_denominator), args.summary)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="selfish-caching", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def net_cmd(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("network", help="network JSON file, or - for stdin")
        p.set_defaults(func=fn)
        return p

    net_cmd("validate", cmd_validate, "check a network file; violations go to stderr")
    net_cmd("props", cmd_props, "structural properties as JSON")
    p = net_cmd("psne", cmd_psne, "find an equilibrium on the state graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-arcs", type=int, default=None)
    p = net_cmd("psne-all", cmd_psne_all, "enumerate every pure equilibrium")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p = net_cmd("approx-psne", cmd_approx_psne, "sequential approximate equilibrium (unequal sizes)")
    p.add_argument("--solver", choices=["half", "exact"], default="half")
    p = net_cmd("opt", cmd_opt, "exact social optimum by enumeration")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    net_cmd("upper", cmd_upper, "LP upper bound on the optimum")
    p = net_cmd("analyze", cmd_analyze, "welfare, PoA and bound checks as JSON")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    p = sub.add_parser("scenario", help="emit a built-in instance as network JSON")
    p.add_argument("name")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("experiment", help="run a sweep and write per-trial CSV")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("--out", default=None)
    p.add_argument("--summary", default=None, help="also write per-point mean/std CSV here")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (NonTerminationError, SearchLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, CachingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
