"""CSV and text renderings shared by the CLI and its tests."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baseline import GapReport
from .errors import ParseError
from .inference import GridPosterior, PosteriorSamples, PredictiveSummary
from .values import ValueExplanation, evaluate_values
from .world import Literal, WorldModel


def fmt(x: float) -> str:
    """9 significant digits, shortest round-trip form; exact zero prints as ``0``."""
    x = float(x)
    if x == 0:
        return "0"
    return repr(float(f"{x:.9g}"))


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(c) if isinstance(c, (float, int, np.floating)) and not isinstance(c, bool) else c
                         for c in row])
    return buf.getvalue()


def values_csv(model: WorldModel, rewards: Mapping[Literal, float], literal: Literal | None = None) -> str:
    values = evaluate_values(model, rewards)
    lits = model.literals() if literal is None else [literal]
    if literal is not None:
        model.require(literal.variable)
    return to_csv(["literal", "intrinsic", "value"],
                  ([str(lit), float(rewards.get(lit, 0.0)), values[lit]] for lit in lits))


def explanation_csv(expl: ValueExplanation) -> str:
    rows = [["intrinsic", expl.intrinsic]]
    rows += [[child, amount] for child, amount in expl.contributions]
    rows.append(["total", expl.total])
    return to_csv(["term", "amount"], rows)


def samples_csv(samples: PosteriorSamples) -> str:
    return to_csv([str(lit) for lit in samples.free], samples.draws.tolist())


def read_samples_csv(text: str) -> tuple[tuple[Literal, ...], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty samples file")
    free = tuple(Literal.parse(h) for h in rows[0])
    try:
        draws = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ParseError(f"bad number in samples file: {exc}") from None
    if draws.size == 0:
        raise ParseError("samples file has no draws")
    if draws.shape[1] != len(free):
        raise ParseError("samples rows do not match the header")
    return free, draws.reshape(len(draws), len(free))


def _summary_line(prefix: str, fields: Sequence[tuple[str, float]]) -> str:
    body = " ".join(f"{k}={fmt(v)}" for k, v in fields)
    return f"{prefix} {body}" if prefix else body


def samples_summary(samples: PosteriorSamples) -> str:
    mean, sd = samples.mean(), samples.sd()
    lines = []
    for i, lit in enumerate(samples.free):
        prefix = "" if len(samples.free) == 1 else str(lit)
        lines.append(_summary_line(prefix, [("mean", mean[i]), ("sd", sd[i]),
                                            ("accept", samples.acceptance_rate)]))
    return "\n".join(lines) + "\n"


def grid_csv(grid: GridPosterior) -> str:
    header = ["r"] if len(grid.free) == 1 else [str(lit) for lit in grid.free]
    return to_csv(header + ["mass"], (list(p) + [m] for p, m in zip(grid.points.tolist(), grid.mass.tolist())))


def grid_summary(grid: GridPosterior) -> str:
    mean, p_neg = grid.mean(), grid.prob_negative()
    lines = []
    for i, lit in enumerate(grid.free):
        prefix = "" if len(grid.free) == 1 else str(lit)
        lines.append(_summary_line(prefix, [("mean", mean[i]), ("p_neg", p_neg[i])]))
    return "\n".join(lines) + "\n"


def predictive_csv(summaries: Sequence[PredictiveSummary]) -> str:
    return to_csv(["target", "mean", "sd", "q05", "q50", "q95", "prob_positive"],
                  ([str(s.target), s.mean, s.sd, *s.quantiles, s.prob_positive] for s in summaries))


def gap_rows(report: GapReport) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = [("target", str(report.target))]
    for side, summary in (("generative", report.generative), ("baseline", report.baseline),
                          ("generative_prior", report.generative_prior),
                          ("baseline_prior", report.baseline_prior)):
        rows += [
            (f"{side}_mean", fmt(summary.mean)),
            (f"{side}_sd", fmt(summary.sd)),
            (f"{side}_q05", fmt(summary.quantiles[0])),
            (f"{side}_q50", fmt(summary.quantiles[1])),
            (f"{side}_q95", fmt(summary.quantiles[2])),
            (f"{side}_prob_positive", fmt(summary.prob_positive)),
        ]
    rows += [
        ("baseline_prior_divergence", fmt(report.baseline_prior_divergence)),
        ("generative_prior_divergence", fmt(report.generative_prior_divergence)),
    ]
    return rows


def gap_csv(report: GapReport) -> str:
    return to_csv(["key", "value"], gap_rows(report))


def gap_text(report: GapReport) -> str:
    return "".join(f"{k}: {v}\n" for k, v in gap_rows(report))
