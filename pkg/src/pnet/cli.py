"""``pnet`` command line: sample, learn, score, evaluate.

Exit codes: 0 on success, 2 on bad input (flags, files, networks), 1 on any
other failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import Semantics
from .errors import InputError
from .estimator import (
    Estimator,
    ImprecisionBudget,
    count_random_set,
    learn_parameters,
    network_from_masses,
    possibilistic_loglik,
    random_set_mle,
)
from .evaluation import ExperimentConfig, run_experiment
from .io import (
    masses_to_dict,
    parse_budget,
    parse_dataset,
    parse_network,
    parse_structure,
    write_dataset,
    write_network,
)
from .sampler import SamplerConfig, SamplingMode, sample_dataset


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _unit_interval(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return x


def _seed(text: str) -> int:
    s = int(text)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return s


def _count(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pnet", description="Possibilistic networks: sampling, learning and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample an imprecise dataset from a network")
    p.add_argument("--net", required=True, type=Path)
    p.add_argument("--n", required=True, type=_count, help="number of records")
    p.add_argument("--theta", required=True, type=_unit_interval, help="imprecision degree")
    p.add_argument("--mode", choices=[m.value for m in SamplingMode], default=SamplingMode.IMPRECISE_CUT.value)
    p.add_argument("--seed", required=True, type=_seed)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("learn", help="learn the tables of a known structure")
    p.add_argument("--structure", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--estimator", choices=[e.value for e in Estimator], default=Estimator.POSSIBILISTIC_MLE.value)
    p.add_argument(
        "--budget", default="default", help="'default' (S=1), 'mean-card', or a JSON file of per-variable budgets"
    )
    p.add_argument("--semantics", choices=[s.value for s in Semantics], default=Semantics.PRODUCT.value)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("score", help="print the possibilistic log-likelihood of a dataset")
    p.add_argument("--net", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)

    p = sub.add_parser("evaluate", help="sample from a gold network, learn, and compare")
    p.add_argument("--gold", required=True, type=Path)
    p.add_argument("--n", required=True, type=_count)
    p.add_argument("--theta", required=True, type=_unit_interval)
    p.add_argument("--seed", required=True, type=_seed)
    p.add_argument("--mode", choices=[m.value for m in SamplingMode], default=SamplingMode.IMPRECISE_CUT.value)
    p.add_argument("--estimator", choices=[e.value for e in Estimator], default=Estimator.POSSIBILISTIC_MLE.value)
    p.add_argument("--budget", default="default")
    p.add_argument("--holdout", type=float, default=0.0)
    p.add_argument("--cap", type=int, default=None, help="joint enumeration cap (default: PNET_OMEGA_CAP or 2^20)")
    p.add_argument("--report", required=True, type=Path, help="report path; writes <stem>.json and <stem>.txt")
    return parser


def _budget(spec: str, data, names) -> ImprecisionBudget:
    if spec == "default":
        return ImprecisionBudget.uniform()
    if spec == "mean-card":
        return ImprecisionBudget.mean_cardinality(data)
    return ImprecisionBudget(parse_budget(spec, names))


def _sample(args) -> int:
    net = parse_network(args.net)
    data = sample_dataset(net, SamplerConfig(args.theta, args.mode, args.seed, args.n))
    write_dataset(data, args.out)
    return 0


def _learn(args) -> int:
    structure = parse_structure(args.structure)
    data = parse_dataset(args.data, structure)
    if args.estimator == Estimator.RANDOM_SET_MLE.value:
        masses = random_set_mle(count_random_set(data, structure))
        net = network_from_masses(structure, masses, args.semantics)
        side = args.out.with_name(args.out.name + ".masses.json")
        side.write_text(json.dumps(masses_to_dict(structure, masses), sort_keys=True, indent=2) + "\n")
    else:
        budget = _budget(args.budget, data, structure.names)
        net = learn_parameters(data, structure, budget, args.estimator, args.semantics)
    write_network(net, args.out)
    return 0


def _score(args) -> int:
    net = parse_network(args.net)
    data = parse_dataset(args.data, net)
    print(repr(possibilistic_loglik(net, net.structure, data)))
    return 0


def _evaluate(args) -> int:
    budget = args.budget
    if budget not in ("default", "mean-card"):
        gold = parse_network(args.gold)
        budget = ImprecisionBudget(parse_budget(budget, gold.names))
    try:
        config = ExperimentConfig(
            gold=args.gold,
            record_count=args.n,
            theta_imp=args.theta,
            seed=args.seed,
            mode=args.mode,
            estimator=args.estimator,
            budget=budget,
            holdout=args.holdout,
            omega_cap=args.cap,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = run_experiment(config)
    report.metadata["gold"] = str(args.gold)
    args.report.with_suffix(".json").write_text(report.to_json(), encoding="utf-8")
    args.report.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
    return 0


COMMANDS = {"sample": _sample, "learn": _learn, "score": _score, "evaluate": _evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"pnet {args.command}: input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"pnet {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
