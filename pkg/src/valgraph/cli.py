"""Command-line interface.

Every subcommand is a thin adapter over the library; tabular output is CSV
with a header row. Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from dataclasses import dataclass
from pathlib import Path

from . import reports
from .baseline import baseline_grid_posterior, baseline_posterior, baseline_predict, generalization_gap
from .errors import ConfigError, ParseError, ValgraphError
from .fileio import (
    emit_bundle,
    emit_model,
    emit_observations,
    flat_problem,
    inference_problem,
    parse_model,
    parse_observations,
)
from .inference import GridAxis, MHConfig, WeightedDraws, grid_posterior, mh_sample, predict_value
from .scenarios import builtin_scenario
from .values import evaluate_values, explain_value, impact
from .world import Literal

DEFAULT_GRID = "-20:20:0.05"


@dataclass(frozen=True)
class CommandResult:
    code: int
    stdout: str
    stderr: str


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _literal_arg(text: str) -> Literal:
    try:
        return Literal.parse(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid_arg(text: str) -> GridAxis:
    try:
        return GridAxis.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Inputs:
    """Reads FILE arguments; ``-`` is standard input, read at most once."""

    def __init__(self, stdin):
        self._stdin = stdin
        self._stdin_text = None

    def read(self, path: str) -> str:
        if path == "-":
            if self._stdin_text is None:
                self._stdin_text = self._stdin.read()
            return self._stdin_text
        try:
            return Path(path).read_text()
        except FileNotFoundError:
            raise FileNotFoundError(f"file not found: {path}") from None

    def model(self, args):
        return parse_model(self.read(args.model))

    def problems(self, args):
        model, rewards = self.model(args)
        obs = parse_observations(self.read(args.obs), model)
        return inference_problem(model, rewards, obs), flat_problem(model, obs)


def _sampler_flags(p):
    p.add_argument("--samples", type=int, default=MHConfig.samples)
    p.add_argument("--burn", type=int, default=MHConfig.burn_in)
    p.add_argument("--step", type=float, default=MHConfig.step_size)
    p.add_argument("--seed", type=int, default=0)


def _config(args) -> MHConfig:
    return MHConfig(args.samples, args.burn, args.step)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="valgraph", description="Instrumental value propagation and inverse value inference.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="values of all literals (or one)")
    p.add_argument("--model", required=True)
    p.add_argument("--literal", type=_literal_arg)

    p = sub.add_parser("impact", help="impact of a literal on one child")
    p.add_argument("--model", required=True)
    p.add_argument("--of", required=True, type=_literal_arg, dest="of")
    p.add_argument("--on", required=True, dest="on")

    p = sub.add_parser("explain", help="intrinsic part and per-child impacts of a value")
    p.add_argument("--model", required=True)
    p.add_argument("--literal", required=True, type=_literal_arg)

    def inference_parsers(sub, prefix=""):
        p = sub.add_parser("infer", help=f"{prefix}Metropolis posterior samples")
        p.add_argument("--model", required=True)
        p.add_argument("--obs", required=True)
        p.add_argument("--out", required=True)
        _sampler_flags(p)

        p = sub.add_parser("oracle", help=f"{prefix}exact grid posterior")
        p.add_argument("--model", required=True)
        p.add_argument("--obs", required=True)
        p.add_argument("--grid", required=True, type=_grid_arg)

        p = sub.add_parser("predict", help=f"{prefix}posterior predictive of one literal")
        p.add_argument("--model", required=True)
        p.add_argument("--obs", required=True)
        p.add_argument("--target", required=True, type=_literal_arg)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--oracle", action="store_true", help="use the grid posterior")
        src.add_argument("--samples-file", "--samples", dest="samples_file", default=None,
                         help="samples CSV written by infer")
        p.add_argument("--grid", type=_grid_arg, default=_grid_arg(DEFAULT_GRID))
        p.add_argument("--n-samples", dest="samples", type=int, default=MHConfig.samples)
        p.add_argument("--burn", type=int, default=MHConfig.burn_in)
        p.add_argument("--step", type=float, default=MHConfig.step_size)
        p.add_argument("--seed", type=int, default=0)

    inference_parsers(sub)
    b = sub.add_parser("baseline", help="the same commands over flat per-literal utilities")
    inference_parsers(b.add_subparsers(dest="baseline_command", required=True, parser_class=_Parser),
                      prefix="flat-utility ")

    p = sub.add_parser("compare", help="generalization gap between generative and flat learners")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--target", required=True, type=_literal_arg)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    _sampler_flags(p)

    p = sub.add_parser("scenario", help="built-in scenarios")
    ssub = p.add_subparsers(dest="scenario_command", required=True, parser_class=_Parser)
    e = ssub.add_parser("emit", help="write a scenario's model and observation files")
    e.add_argument("name")
    e.add_argument("--out-dir")
    e.add_argument("--seed", type=int, default=0, help="seed for random-K scenarios")
    e.add_argument("--choices", type=int, default=5, help="vaccination choices in 'generalize'")
    return parser


# -- commands -------------------------------------------------------------------
# Each returns (stdout text, stderr text) and writes nothing until it is done.


def _cmd_eval(args, inputs):
    model, rewards = inputs.model(args)
    return reports.values_csv(model, rewards, args.literal), ""


def _cmd_impact(args, inputs):
    model, rewards = inputs.model(args)
    values = evaluate_values(model, rewards)
    return reports.fmt(impact(model, values, args.of, args.on)) + "\n", ""


def _cmd_explain(args, inputs):
    model, rewards = inputs.model(args)
    return reports.explanation_csv(explain_value(model, rewards, args.literal)), ""


def _run_inference(args, inputs, flat: bool):
    generative, flat_prob = inputs.problems(args)
    problem = flat_prob if flat else generative
    command = args.baseline_command if flat else args.command

    if command == "infer":
        sampler = baseline_posterior if flat else mh_sample
        samples = sampler(problem, _config(args), args.seed)
        table, summary = reports.samples_csv(samples), reports.samples_summary(samples)
        if args.out == "-":
            return table, summary
        Path(args.out).write_text(table)
        return summary, ""

    if command == "oracle":
        grid = (baseline_grid_posterior if flat else grid_posterior)(problem, args.grid)
        return reports.grid_csv(grid), reports.grid_summary(grid)

    # predict
    if args.oracle:
        posterior = (baseline_grid_posterior if flat else grid_posterior)(problem, args.grid)
    elif args.samples_file:
        free, draws = reports.read_samples_csv(inputs.read(args.samples_file))
        if free != problem.free:
            raise ConfigError(f"samples columns {[str(f) for f in free]} do not match the free literals "
                              f"{[str(f) for f in problem.free]}")
        posterior = WeightedDraws.uniform(free, draws)
    else:
        posterior = (baseline_posterior if flat else mh_sample)(problem, _config(args), args.seed)
    summary = (baseline_predict if flat else predict_value)(problem, posterior, args.target)
    return reports.predictive_csv([summary]), ""


def _cmd_compare(args, inputs):
    generative, flat = inputs.problems(args)
    report = generalization_gap(generative, flat, args.target, _config(args), args.seed)
    return (reports.gap_csv(report) if args.format == "csv" else reports.gap_text(report)), ""


def _cmd_scenario(args, inputs):
    model, rewards, obs = builtin_scenario(args.name, seed=args.seed, choices=args.choices)
    if not args.out_dir:
        return emit_bundle(model, rewards, obs), ""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path, obs_path = out / f"{args.name}.model.json", out / f"{args.name}.obs.json"
    model_path.write_text(emit_model(model, rewards))
    obs_path.write_text(emit_observations(obs))
    return f"{model_path}\n{obs_path}\n", ""


def _dispatch(args, inputs):
    if args.command == "eval":
        return _cmd_eval(args, inputs)
    if args.command == "impact":
        return _cmd_impact(args, inputs)
    if args.command == "explain":
        return _cmd_explain(args, inputs)
    if args.command in ("infer", "oracle", "predict"):
        return _run_inference(args, inputs, flat=False)
    if args.command == "baseline":
        return _run_inference(args, inputs, flat=True)
    if args.command == "compare":
        return _cmd_compare(args, inputs)
    return _cmd_scenario(args, inputs)


def _join_grid_values(argv):
    # "--grid -20:20:0.05" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for arg in it:
        if arg == "--grid":
            nxt = next(it, None)
            out.append(arg if nxt is None else f"--grid={nxt}")
        else:
            out.append(arg)
    return out


def run(argv=None, stdin=None) -> CommandResult:
    parser = build_parser()
    argv = _join_grid_values(sys.argv[1:] if argv is None else list(argv))
    help_out = io.StringIO()
    try:
        with contextlib.redirect_stdout(help_out):
            args = parser.parse_args(argv)
    except _UsageError as exc:
        return CommandResult(2, "", f"usage error: {exc}\n")
    except SystemExit as exc:  # --help
        return CommandResult(int(exc.code or 0), help_out.getvalue(), "")
    inputs = _Inputs(sys.stdin if stdin is None else stdin)
    try:
        out, err = _dispatch(args, inputs)
    except ValgraphError as exc:
        return CommandResult(1, "", f"error: {type(exc).__name__}: {exc}\n")
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return CommandResult(1, "", f"error: {type(exc).__name__}: {exc}\n")
    return CommandResult(0, out, err)


def main(argv=None) -> int:
    result = run(argv)
    sys.stdout.write(result.stdout)
    sys.stderr.write(result.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
