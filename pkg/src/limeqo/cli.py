"""Command-line interface: ``limeqo {synth,simulate,complete,spectrum,compare}``.

Diagnostics go to stderr; stdout only confirms the paths written. Input
errors exit with status 2. ``LIMEQO_SEED`` sets the default ``--seed``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import cli_io
from .completion import DEFAULT_BACKEND, SOLVERS, AlsConfig, als_complete, effective_rank, singular_spectrum
from .errors import LimeQOError
from .policies import POLICY_KINDS, PolicyConfig
from .simulator import DataShift, ShiftEvent, SimConfig, WorkloadShift, compare_policies, run
from .synth import SynthConfig, generate, optimizer_costs

log = logging.getLogger("limeqo")
POLICY_ALIASES = {"cost": "cost", "costgreedy": "cost", "qo-advisor": "cost"}


def _default_seed():
    try:
        return int(os.environ.get("LIMEQO_SEED", 0))
    except ValueError:
        return 0


def parse_budget(text: str, default_mass: float) -> float:
    """Seconds, or a multiple of the default workload latency when suffixed with ``x``."""
    text = text.strip()
    value = float(text[:-1]) * default_mass if text.endswith("x") else float(text)
    if not value > 0:
        raise ValueError(f"budget must be > 0, got {text!r}")
    return value


def _policy_name(text):
    name = POLICY_ALIASES.get(text.lower(), text.lower())
    if name not in POLICY_KINDS:
        raise ValueError(f"unknown policy {text!r}; choose from {', '.join(POLICY_KINDS)}")
    return name


def _add_als_args(p):
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--lambda", dest="lam", type=float, default=0.2)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--solver", choices=SOLVERS, default="masked")


def _done(path):
    print(f"wrote {path}")


def cmd_synth(args):
    cfg = SynthConfig(args.n, args.k, args.rank, args.noise, args.scale, args.etl_rows, args.seed)
    truth = generate(cfg)
    cli_io.write_matrix(truth, args.out)
    log.info("headroom (default hint 0): %.3f", truth.headroom(0))
    _done(args.out)
    if args.costs_out:
        costs = optimizer_costs(truth, seed=args.seed)
        cli_io.write_grid(costs, args.costs_out, list(truth.query_ids), list(truth.hint_labels))
        _done(args.costs_out)


def _read_costs(path, shape):
    values = cli_io.read_grid(path)[0]
    if values.shape != shape:
        raise ValueError(f"{path}: cost matrix has shape {values.shape}, expected {shape}")
    return values


def cmd_simulate(args):
    truth = cli_io.read_truth(args.truth)
    policy = PolicyConfig(_policy_name(args.policy), args.batch, args.alpha, args.seed)
    cfg = SimConfig(
        policy,
        parse_budget(args.budget, truth.default_latency(args.default_hint)),
        AlsConfig(args.rank, args.lam, args.iters, args.seed, args.solver),
        refit_every=args.refit_every,
        charge_default=args.charge_default,
        record_every=args.record_every,
    )
    cost = _read_costs(args.cost_matrix, truth.shape) if args.cost_matrix else None
    shifts = []
    if args.shift_at is not None:
        if not (args.shift_kind and args.shift_truth):
            raise ValueError("--shift-at needs --shift-kind and --shift-truth")
        other = cli_io.read_truth(args.shift_truth)
        if args.shift_kind == "workload":
            extra = _read_costs(args.shift_cost_matrix, other.shape) if args.shift_cost_matrix else None
            kind = WorkloadShift(other, extra)
        else:
            kind = DataShift(other)
        shifts.append(ShiftEvent(args.shift_at, kind))
    trace = run(truth, args.default_hint, cfg, shifts, seed=args.seed, cost_matrix=cost)
    cli_io.write_trace(trace, args.trace)
    log.info("final workload latency %.6g s after %.6g s exploring", trace.final_latency, trace.final_explore_seconds)
    _done(args.trace)
    if args.state_out:
        cli_io.write_matrix(trace.final_state, args.state_out)
        _done(args.state_out)


def cmd_complete(args):
    state = cli_io.read_state(args.state, args.default_hint)
    fact = als_complete(state, AlsConfig(args.rank, args.lam, args.iters, args.seed, args.solver))
    cli_io.write_grid(fact.W_hat, args.out, list(state.query_ids), list(state.hint_labels))
    _done(args.out)


def cmd_spectrum(args):
    spectrum = singular_spectrum(cli_io.read_grid(args.matrix)[0])
    log.info("effective rank at %.3f energy: %d", args.energy, effective_rank(spectrum, args.energy))
    if args.out:
        cli_io.write_spectrum(spectrum, args.out)
        _done(args.out)
    else:
        sys.stdout.write(cli_io.format_spectrum(spectrum))


def cmd_compare(args):
    truth = cli_io.read_truth(args.truth)
    mass = truth.default_latency(args.default_hint)
    budgets = [parse_budget(b, mass) for b in args.budgets.split(",") if b.strip()]
    kinds = [_policy_name(p) for p in args.policies.split(",") if p.strip()]
    configs = [
        SimConfig(
            PolicyConfig(kind, args.batch, args.alpha),
            budgets[0],
            AlsConfig(args.rank, args.lam, args.iters, solver=args.solver),
        )
        for kind in kinds
    ]
    cost = None
    if "cost" in kinds:
        if not args.cost_matrix:
            raise ValueError("the cost policy needs --cost-matrix")
        cost = _read_costs(args.cost_matrix, truth.shape)
    seeds = [args.seed + s for s in range(args.seeds)]
    table = compare_policies(truth, args.default_hint, configs, budgets, seeds, cost, args.workers)
    cli_io.write_report(table, args.out)
    _done(args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limeqo", description="Offline query-hint exploration by low-rank completion.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("synth", parents=[common], help="generate a planted low-rank workload matrix")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=10.0, help="median latency in seconds")
    p.add_argument("--etl-rows", type=int, default=0)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", required=True)
    p.add_argument("--costs-out", help="also write a correlated optimizer-cost matrix")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", parents=[common], help="replay exploration against a ground-truth matrix")
    p.add_argument("--truth", required=True)
    p.add_argument("--default-hint", type=int, default=0)
    p.add_argument("--policy", default="limeqo")
    p.add_argument("--budget", required=True, help="seconds, or e.g. 0.5x for half the default workload latency")
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--alpha", type=float, default=2.0)
    _add_als_args(p)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--trace", required=True)
    p.add_argument("--cost-matrix")
    p.add_argument("--shift-at", type=float)
    p.add_argument("--shift-kind", choices=("workload", "data"))
    p.add_argument("--shift-truth", help="new rows (workload) or replacement matrix (data)")
    p.add_argument("--shift-cost-matrix", help="optimizer costs of the new rows (cost policy, workload shift)")
    p.add_argument("--refit-every", type=int, default=1)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--charge-default", action="store_true")
    p.add_argument("--state-out", help="also write the final observed state")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("complete", parents=[common], help="one-shot censored ALS on a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--default-hint", type=int)
    _add_als_args(p)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("spectrum", parents=[common], help="singular values of a full matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--energy", type=float, default=0.99)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("compare", parents=[common], help="final latency per policy and budget over several seeds")
    p.add_argument("--truth", required=True)
    p.add_argument("--default-hint", type=int, default=0)
    p.add_argument("--budgets", required=True, help="comma list of seconds or multiples like 0.5x")
    p.add_argument("--policies", default="random,greedy,limeqo")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=seed, help="first seed")
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--alpha", type=float, default=2.0)
    _add_als_args(p)
    p.add_argument("--cost-matrix")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    log.debug("ALS backend: %s", DEFAULT_BACKEND)
    try:
        args.func(args)
    except (LimeQOError, ValueError, OSError) as exc:
        print(f"limeqo: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
