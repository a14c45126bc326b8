"""CSV ingestion and machine-readable output helpers.

CSV convention: UTF-8, comma separated, header row ``date,<label>...``,
dot decimals, no thousands separators.  Floats are written with Python's
shortest-round-trip ``repr``, so ``ingest(write_returns(w)) == w``
bit-exactly for the returns kind.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .backtest import (BacktestConfig, BacktestReport, EmpiricalBayesPrior)
from .errors import (DataError, InsufficientData, NonMonotoneDates,
                     ParseError, RaggedRow)
from .posterior import ConjugatePrior, DiffusePrior, ReturnsWindow

__all__ = [
    "PriceTable",
    "read_table",
    "ingest",
    "write_returns",
    "load_riskfree",
    "align_riskfree",
    "prior_to_dict",
    "config_to_dict",
    "report_to_dict",
    "report_to_csv",
]


@dataclass(frozen=True)
class PriceTable:
    """A parsed dated CSV: asset labels, ISO dates, and a value matrix."""

    labels: tuple[str, ...]
    dates: tuple[str, ...]
    cells: np.ndarray

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    @property
    def k(self) -> int:
        return self.cells.shape[1]


def read_table(path) -> PriceTable:
    """Parse a ``date,<label>...`` CSV into a :class:`PriceTable`.

    Raises
    ------
    ParseError
        Missing/bad header, unparseable or non-finite cell (reported with
        row and column).
    RaggedRow
        A row whose width differs from the header's.
    NonMonotoneDates
        Dates not strictly ascending (duplicates included).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise ParseError(f"{path}: header must be 'date,<label>...', "
                             f"got {header!r}")
        labels = tuple(cell.strip() for cell in header[1:])
        if any(not label for label in labels):
            raise ParseError(f"{path}: empty asset label in header")
        width = len(header)
        dates: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # ignore blank lines
            if len(row) != width:
                raise RaggedRow(f"{path}: row {lineno} has {len(row)} fields, "
                                f"header has {width}")
            date = row[0].strip()
            if not date:
                raise ParseError(f"{path}: row {lineno} has an empty date")
            values = []
            for col, cell in enumerate(row[1:], start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {lineno}, column {col} "
                        f"({labels[col - 1]}): cannot parse {cell!r}") from None
                if not np.isfinite(value):
                    raise ParseError(
                        f"{path}: row {lineno}, column {col} "
                        f"({labels[col - 1]}): non-finite value {cell!r}")
                values.append(value)
            dates.append(date)
            rows.append(values)
    for prev, cur in zip(dates, dates[1:]):
        if not prev < cur:
            raise NonMonotoneDates(f"{path}: dates must be strictly "
                                   f"ascending, got {prev!r} before {cur!r}")
    cells = np.asarray(rows, dtype=float).reshape(len(rows), len(labels))
    return PriceTable(labels=labels, dates=tuple(dates), cells=cells)


def ingest(path, kind: str) -> ReturnsWindow:
    """Load a CSV as a :class:`ReturnsWindow`.

    ``kind="prices"`` converts to net simple returns ``p_t / p_{t-1} - 1``
    (dropping the first row); ``kind="returns"`` passes values through.
    """
    if kind not in ("prices", "returns"):
        raise ValueError(f"kind must be 'prices' or 'returns', got {kind!r}")
    table = read_table(path)
    if kind == "prices":
        if table.n < 2:
            raise InsufficientData(
                f"{path}: need at least two price rows, got {table.n}")
        if np.any(table.cells <= 0.0):
            raise DataError(f"{path}: nonpositive price cannot be converted "
                            "to a return")
        returns = table.cells[1:] / table.cells[:-1] - 1.0
        dates = table.dates[1:]
    else:
        if table.n < 2:
            raise InsufficientData(
                f"{path}: need at least two return rows, got {table.n}")
        returns = table.cells
        dates = table.dates
    return ReturnsWindow(assets=table.labels, dates=dates, returns=returns)


def write_returns(window: ReturnsWindow, path) -> None:
    """Write a returns window back to CSV (shortest-round-trip floats)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(("date",) + window.assets)
        for date, row in zip(window.dates, window.returns):
            writer.writerow([date] + [repr(float(x)) for x in row])


def load_riskfree(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Load a dated single-column risk-free file: (dates, rates)."""
    table = read_table(path)
    if table.k != 1:
        raise ParseError(f"{path}: risk-free file must have exactly one "
                         f"value column, got {table.k}")
    return table.dates, table.cells[:, 0]


def align_riskfree(rf_dates: tuple[str, ...], rf_values: np.ndarray,
                   dates) -> np.ndarray:
    """Rates for exactly the requested dates; any missing date is an error."""
    lookup = dict(zip(rf_dates, rf_values))
    out = []
    for date in dates:
        if date not in lookup:
            raise DataError(f"risk-free file has no rate for date {date!r}")
        out.append(float(lookup[date]))
    return np.asarray(out)


# --- serialization -------------------------------------------------------------

def prior_to_dict(prior) -> dict:
    if isinstance(prior, DiffusePrior):
        return {"kind": "diffuse"}
    if isinstance(prior, ConjugatePrior):
        return {"kind": "conjugate", "m0": prior.m0.tolist(),
                "r0": float(prior.r0), "d0": float(prior.d0),
                "s0": prior.s0.entries.tolist()}
    if isinstance(prior, EmpiricalBayesPrior):
        return {"kind": "empirical_bayes", "presample_n": prior.presample_n,
                "d0": prior.d0, "r0": prior.r0, "offset": prior.offset}
    raise TypeError(f"unsupported prior {type(prior).__name__}")


def config_to_dict(config: BacktestConfig) -> dict:
    return {
        "window_n": config.window_n,
        "horizon_T": config.horizon_T,
        "gamma": config.gamma,
        "prior": prior_to_dict(config.prior),
        "B": config.B,
        "seed": config.seed,
        "credible_level": config.credible_level,
        "weight_policy": config.weight_policy,
        "initial_wealth": config.initial_wealth,
    }


def report_to_dict(report: BacktestReport, *, k: int) -> dict:
    """JSON-ready dict for a backtest report (embeds the meta contract)."""
    cfg = report.config
    return {
        "meta": {
            "seed": cfg.seed, "B": cfg.B, "prior": prior_to_dict(cfg.prior),
            "n": cfg.window_n, "k": k, "t": 0, "T": cfg.horizon_T,
        },
        "config": config_to_dict(cfg),
        "assets": list(report.assets),
        "rf_schedule": report.rf_schedule.tolist(),
        "initial_wealth": report.initial_wealth,
        "wealth_path": report.wealth_path.tolist(),
        "periods": [
            {
                "t": p.t,
                "date": p.date,
                "weights": p.weights.tolist(),
                "weight_covariance": p.weight_cov.tolist(),
                "realized_wealth": p.realized_wealth,
                "credible_band": {
                    "level": p.band.level, "lower": p.band.lower,
                    "upper": p.band.upper, "point": p.band.point,
                    "width": p.band.width,
                },
                "default_probability": p.default_prob,
            }
            for p in report.periods
        ],
    }


def report_to_csv(report: BacktestReport) -> str:
    """Per-period CSV (plot-ready): dates, wealth, band, default, weights."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["date", "wealth", "credible_lower", "credible_upper",
                     "predictive_mean", "default_probability"]
                    + [f"w_{a}" for a in report.assets])
    for p in report.periods:
        writer.writerow(
            [p.date, repr(p.realized_wealth), repr(p.band.lower),
             repr(p.band.upper), repr(p.band.point), repr(p.default_prob)]
            + [repr(float(w)) for w in p.weights])
    return buf.getvalue()
