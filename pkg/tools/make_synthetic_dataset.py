#!/usr/bin/env python3
"""Regenerate the bundled synthetic dataset CSVs from the recipe in
``bayport.datasets``.  Run from the repository root after an editable
install:

    python3 tools/make_synthetic_dataset.py
"""

from __future__ import annotations

import csv
import pathlib

from bayport.datasets import (RETURNS_FILE, RISKFREE_FILE,
                              generate_synthetic_returns,
                              generate_synthetic_riskfree)
from bayport.dataio import write_returns


def main() -> None:
    data_dir = pathlib.Path(__file__).resolve().parents[1] / "src" / "bayport" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    window = generate_synthetic_returns()
    write_returns(window, data_dir / RETURNS_FILE)
    print(f"wrote {data_dir / RETURNS_FILE} ({window.n} rows, {window.k} assets)")

    dates, rates = generate_synthetic_riskfree()
    with open(data_dir / RISKFREE_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "rf"])
        for date, rate in zip(dates, rates):
            writer.writerow([date, repr(float(rate))])
    print(f"wrote {data_dir / RISKFREE_FILE} ({len(dates)} rows)")


if __name__ == "__main__":
    main()
