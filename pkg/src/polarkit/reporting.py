"""Per-language result tables: means, deltas, best-of combination,
strategy counts and leaderboard comparison, rendered as CSV or Markdown."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Mapping, Sequence

from .core import write_text_atomic
from .ensemble import KINDS, StrategyId, TunedDecision
from .errors import DataValidationError, ParseError

ENSEMBLE_KINDS = ("average", "weighted")


@dataclass(frozen=True)
class ResultTable:
    name: str
    rows: Mapping[str, float]
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for lang, f1 in self.rows.items():
            if not 0.0 <= f1 <= 1.0:
                raise DataValidationError(f"{self.name}/{lang}: F1 {f1} outside [0, 1]")

    @property
    def mean(self) -> float:
        if not self.rows:
            raise DataValidationError(f"table {self.name!r} has no rows")
        return math.fsum(self.rows.values()) / len(self.rows)

    @property
    def langs(self) -> list[str]:
        return sorted(self.rows)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "rows": {k: self.rows[k] for k in self.langs}}
        if self.rows:
            out["mean"] = self.mean
        if self.provenance:
            out["provenance"] = {k: self.provenance[k] for k in sorted(self.provenance)}
        return out

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "ResultTable":
        try:
            rows = {str(k): float(v) for k, v in obj["rows"].items()}
        except (KeyError, AttributeError, TypeError, ValueError):
            raise DataValidationError("result table needs a 'rows' mapping of lang -> F1") from None
        return cls(str(obj.get("name", "")), rows, dict(obj.get("provenance", {})))


def aggregate(rows: Mapping[str, float], name: str = "") -> ResultTable:
    if not rows:
        raise DataValidationError("cannot aggregate an empty set of rows")
    return ResultTable(name, dict(rows))


def read_table(path: str | os.PathLike) -> ResultTable:
    try:
        with open(path, encoding="utf-8") as fh:
            return ResultTable.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", str(path)) from None


def write_table(table: ResultTable, path: str | os.PathLike) -> None:
    write_text_atomic(path, json.dumps(table.to_dict(), indent=2, ensure_ascii=False) + "\n")


def _same_langs(tables: Sequence[ResultTable]) -> None:
    first = set(tables[0].rows)
    for t in tables[1:]:
        if set(t.rows) != first:
            diff = sorted(first.symmetric_difference(t.rows))
            raise DataValidationError(f"language sets differ between tables: {diff}")


@dataclass(frozen=True)
class DeltaTable:
    base: str
    other: str
    deltas: Mapping[str, float]
    improved: tuple[str, ...]
    regressed: tuple[str, ...]
    unchanged: tuple[str, ...]

    @property
    def mean_delta(self) -> float:
        return math.fsum(self.deltas.values()) / len(self.deltas) if self.deltas else 0.0


def delta_table(
    a: ResultTable,
    b: ResultTable,
    tie_signs: Mapping[str, int] | None = None,
) -> DeltaTable:
    """Per-language ``b - a``, classifying each language as improved/regressed.

    Rounded scores can hide the direction of a tiny change. ``tie_signs``
    supplies it for languages whose deltas are exactly zero (e.g. from a
    printed ``+0.0%`` / ``-0.0%``); without a hint an exact tie is unchanged.
    """
    _same_langs([a, b])
    tie_signs = tie_signs or {}
    deltas = {lang: b.rows[lang] - a.rows[lang] for lang in sorted(a.rows)}
    improved, regressed, unchanged = [], [], []
    for lang, d in deltas.items():
        sign = (d > 0) - (d < 0) if abs(d) > 1e-12 else tie_signs.get(lang, 0)
        (improved if sign > 0 else regressed if sign < 0 else unchanged).append(lang)
    return DeltaTable(a.name, b.name, deltas, tuple(improved), tuple(regressed), tuple(unchanged))


def combine_best(tables: Sequence[ResultTable], name: str = "best") -> ResultTable:
    """Per-language maximum; ties go to the earliest table."""
    if len(tables) < 2:
        raise DataValidationError("combine_best needs at least two tables")
    _same_langs(tables)
    rows, prov = {}, {}
    for lang in tables[0].langs:
        winner = tables[0]
        for t in tables[1:]:
            if t.rows[lang] > winner.rows[lang]:
                winner = t
        rows[lang] = winner.rows[lang]
        prov[lang] = winner.name
    return ResultTable(name, rows, prov)


def strategy_histogram(decisions: Iterable[TunedDecision | StrategyId]) -> dict[str, int]:
    counts = {k: 0 for k in KINDS}
    for d in decisions:
        kind = d.kind if isinstance(d, StrategyId) else d.strategy.kind
        counts[kind] += 1
    counts["ensemble"] = sum(counts[k] for k in ENSEMBLE_KINDS)
    counts["total"] = sum(counts[k] for k in KINDS)
    return counts


# --- leaderboard ------------------------------------------------------------

@dataclass(frozen=True)
class LeaderboardRow:
    lang: str
    rank: int
    ours: float
    best: float

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise DataValidationError(f"{self.lang}: rank must be positive")
        if self.ours > self.best + 1e-9:
            raise DataValidationError(f"{self.lang}: our score exceeds the best score")
        if self.rank == 1 and abs(self.delta) > 1e-9:
            raise DataValidationError(f"{self.lang}: a first place must match the best score")

    @property
    def delta(self) -> float:
        return self.ours - self.best


@dataclass(frozen=True)
class LeaderboardSummary:
    n: int
    first: tuple[str, ...]
    top3: tuple[str, ...]
    top10: tuple[str, ...]
    ours_mean: float
    best_mean: float
    mean_delta: float
    mean_language_delta: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "first_places": list(self.first),
            "top3": list(self.top3),
            "top10": list(self.top10),
            "ours_mean": self.ours_mean,
            "best_mean": self.best_mean,
            "mean_delta": self.mean_delta,
            "mean_language_delta": self.mean_language_delta,
        }


def leaderboard_compare(
    ours: ResultTable,
    best: ResultTable,
    ranks: Mapping[str, int],
    best_overall: float | None = None,
    ours_overall: float | None = None,
) -> tuple[list[LeaderboardRow], LeaderboardSummary]:
    """Compare our per-language scores with the per-language winners.

    ``best_overall`` is the leading system's own average score and
    ``ours_overall`` our official average; the summary's ``mean_delta`` is
    their difference. Either falls back to the mean of the corresponding
    per-language column. Per-language bests come from different systems, so
    their mean overstates the leader's average.
    """
    _same_langs([ours, best])
    if set(ranks) != set(ours.rows):
        raise DataValidationError("ranks must cover exactly the compared languages")
    rows = [LeaderboardRow(l, int(ranks[l]), ours.rows[l], best.rows[l]) for l in ours.langs]
    best_mean = best.mean if best_overall is None else best_overall
    ours_mean = ours.mean if ours_overall is None else ours_overall
    summary = LeaderboardSummary(
        n=len(rows),
        first=tuple(r.lang for r in rows if r.rank == 1),
        top3=tuple(r.lang for r in rows if r.rank <= 3),
        top10=tuple(r.lang for r in rows if r.rank <= 10),
        ours_mean=ours_mean,
        best_mean=best_mean,
        mean_delta=ours_mean - best_mean,
        mean_language_delta=math.fsum(r.delta for r in rows) / len(rows),
    )
    return rows, summary


# --- rendering ----------------------------------------------------------------

def fmt_f1(x: float | None) -> str:
    return "" if x is None else f"{x:.3f}"


def fmt_delta(d: float | None) -> str:
    """Signed percentage points with one decimal: 0.087 -> '+8.7%'."""
    if d is None:
        return ""
    pct = round(d * 100, 1)
    if pct == 0:
        return "+0.0%" if d >= 0 else "-0.0%"
    return f"{pct:+.1f}%"


def _emit(header: list[str], body: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def render(
    tables: ResultTable | Sequence[ResultTable],
    fmt: str = "markdown",
    with_delta: bool | None = None,
) -> str:
    """Render one or more tables side by side, languages ascending, Mean last.

    With exactly two tables a delta column (second minus first) is added
    unless ``with_delta`` is False.
    """
    if isinstance(tables, ResultTable):
        tables = [tables]
    tables = list(tables)
    with_delta = len(tables) == 2 if with_delta is None else with_delta
    if with_delta and len(tables) != 2:
        raise ValueError("a delta column needs exactly two tables")
    header = ["lang"] + [t.name or f"table{i + 1}" for i, t in enumerate(tables)]
    if with_delta:
        header.append("delta")
    langs = sorted(set().union(*(t.rows for t in tables))) if tables else []
    body = []
    for lang in langs:
        row = [lang] + [fmt_f1(t.rows.get(lang)) for t in tables]
        if with_delta:
            a, b = tables[0].rows.get(lang), tables[1].rows.get(lang)
            row.append(fmt_delta(None if a is None or b is None else b - a))
        body.append(row)
    if langs:
        means = [t.mean if t.rows else None for t in tables]
        row = ["Mean"] + [fmt_f1(m) for m in means]
        if with_delta:
            row.append(fmt_delta(None if None in means else means[1] - means[0]))
        body.append(row)
    return _emit(header, body, fmt)


def render_histogram(counts: Mapping[str, int], fmt: str = "markdown") -> str:
    body = [[k, str(counts.get(k, 0))] for k in (*KINDS, "ensemble", "total")]
    return _emit(["strategy", "languages"], body, fmt)


def render_leaderboard(rows: Sequence[LeaderboardRow], summary: LeaderboardSummary | None,
                       fmt: str = "markdown") -> str:
    body = [[r.lang, str(r.rank), fmt_f1(r.ours), fmt_f1(r.best), f"{r.delta:+.3f}"]
            for r in sorted(rows, key=lambda r: r.lang)]
    if summary is not None:
        body.append(["Avg", "", fmt_f1(summary.ours_mean), fmt_f1(summary.best_mean),
                     f"{summary.mean_delta:+.3f}"])
    return _emit(["lang", "rank", "ours", "best", "delta"], body, fmt)


# --- shipped fixtures -------------------------------------------------------

_T6_STRATEGIES = {
    "12B tuned": "model_a_tuned",
    "27B tuned": "model_b_tuned",
    "Ens. average": "average",
    "Ens. weighted": "weighted",
}


def _csv_rows(text: str) -> list[dict[str, str]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _fixture_rows(name: str) -> list[dict[str, str]]:
    return _csv_rows(resources.files(__package__).joinpath("data", name).read_text("utf-8"))


def _printed_sign(delta: str) -> int:
    return -1 if delta.strip().startswith("-") else 1


@dataclass(frozen=True)
class Table6Fixture:
    sub1: ResultTable
    sub4: ResultTable
    decisions: tuple[TunedDecision, ...]
    printed_deltas: Mapping[str, str]

    @property
    def delta_signs(self) -> dict[str, int]:
        return {lang: _printed_sign(d) for lang, d in self.printed_deltas.items()}


def load_table6() -> Table6Fixture:
    rows = _fixture_rows("table6.csv")
    sub1 = ResultTable("sub1", {r["lang"]: float(r["sub1"]) for r in rows})
    sub4 = ResultTable("sub4", {r["lang"]: float(r["sub4"]) for r in rows})
    decisions = []
    for r in rows:
        weight = float(r["weight"]) if r["weight"] else None
        strategy = StrategyId(_T6_STRATEGIES[r["strategy"]], weight)
        decisions.append(TunedDecision(r["lang"], strategy, float(r["threshold"]), None))
    return Table6Fixture(sub1, sub4, tuple(decisions), {r["lang"]: r["delta"] for r in rows})


@dataclass(frozen=True)
class Table8Fixture:
    ours: ResultTable
    best: ResultTable
    ranks: Mapping[str, int]
    overall_rank: int | None
    overall_ours: float | None
    overall_best: float | None


def read_leaderboard(path: str | os.PathLike | None = None) -> Table8Fixture:
    """Leaderboard CSV (``lang,rank,ours,best``); an ``AVG`` row is optional.

    Without a path the shipped reference leaderboard is used.
    """
    rows = _fixture_rows("table8.csv") if path is None else _csv_rows(
        open(path, encoding="utf-8").read())
    try:
        langs = [r for r in rows if r["lang"] != "AVG"]
        avg = next((r for r in rows if r["lang"] == "AVG"), None)
        ours = ResultTable("ours", {r["lang"]: float(r["ours"]) for r in langs})
        best = ResultTable("best", {r["lang"]: float(r["best"]) for r in langs})
        ranks = {r["lang"]: int(r["rank"]) for r in langs}
        return Table8Fixture(
            ours=ours,
            best=best,
            ranks=ranks,
            overall_rank=int(avg["rank"]) if avg else None,
            overall_ours=float(avg["ours"]) if avg else None,
            overall_best=float(avg["best"]) if avg else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed leaderboard CSV: {exc}", None if path is None else str(path)) from None


def load_table8() -> Table8Fixture:
    return read_leaderboard(None)


def load_table5() -> tuple[ResultTable, ResultTable, dict[str, str]]:
    rows = [r for r in _fixture_rows("table5.csv") if r["lang"] != "MEAN"]
    return (
        ResultTable("sub1", {r["lang"]: float(r["sub1"]) for r in rows}),
        ResultTable("sub4", {r["lang"]: float(r["sub4"]) for r in rows}),
        {r["lang"]: r["delta"] for r in rows},
    )
