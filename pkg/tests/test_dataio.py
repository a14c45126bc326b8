"""CSV parsing, bundled dataset integrity, and report serialization."""

import csv
import io
import json

import numpy as np
import pytest

from bayport import (BacktestConfig, DataError, DiffusePrior,
                     EmpiricalBayesPrior, InsufficientData, NonMonotoneDates,
                     ParseError, RaggedRow, run_backtest)
from bayport.dataio import (align_riskfree, config_to_dict, ingest,
                            load_riskfree, prior_to_dict, read_table,
                            report_to_csv, report_to_dict, write_returns)
from bayport.datasets import (generate_synthetic_returns,
                              generate_synthetic_riskfree,
                              load_synthetic_returns, load_synthetic_riskfree,
                              synthetic_truth)

from conftest import make_conjugate_prior, make_window


def write_csv(tmp_path, text, name="table.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


GOOD = """date,alpha,beta
2022-01-03,0.01,-0.02
2022-01-10,0.005,0.03
2022-01-17,-0.01,0.0
"""


class TestReadTable:
    def test_happy_path(self, tmp_path):
        table = read_table(write_csv(tmp_path, GOOD))
        assert table.labels == ("alpha", "beta")
        assert table.dates == ("2022-01-03", "2022-01-10", "2022-01-17")
        assert table.n == 3 and table.k == 2
        assert np.array_equal(
            table.cells,
            np.array([[0.01, -0.02], [0.005, 0.03], [-0.01, 0.0]]))

    def test_header_date_is_case_insensitive(self, tmp_path):
        table = read_table(write_csv(
            tmp_path, "Date,x\n2022-01-03,1.0\n"))
        assert table.labels == ("x",)

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_table(write_csv(tmp_path, ""))

    def test_short_header(self, tmp_path):
        with pytest.raises(ParseError):
            read_table(write_csv(tmp_path, "date\n2022-01-03\n"))

    def test_wrong_first_header_cell(self, tmp_path):
        with pytest.raises(ParseError):
            read_table(write_csv(tmp_path, "when,x\n2022-01-03,1.0\n"))

    def test_empty_asset_label(self, tmp_path):
        with pytest.raises(ParseError):
            read_table(write_csv(tmp_path, "date,x,\n2022-01-03,1.0,2.0\n"))

    def test_ragged_row_reports_line_number(self, tmp_path):
        text = "date,x,y\n2022-01-03,1.0,2.0\n2022-01-10,1.0\n"
        with pytest.raises(RaggedRow) as err:
            read_table(write_csv(tmp_path, text))
        assert "row 3" in str(err.value)

    def test_bad_float_reports_row_column_label(self, tmp_path):
        text = "date,x,y\n2022-01-03,1.0,oops\n"
        with pytest.raises(ParseError) as err:
            read_table(write_csv(tmp_path, text))
        message = str(err.value)
        assert "row 2" in message and "column 2" in message
        assert "y" in message and "oops" in message

    def test_non_finite_cell_rejected(self, tmp_path):
        for bad in ("inf", "-inf", "nan"):
            with pytest.raises(ParseError):
                read_table(write_csv(tmp_path,
                                     f"date,x\n2022-01-03,{bad}\n"))

    def test_empty_date_cell(self, tmp_path):
        with pytest.raises(ParseError):
            read_table(write_csv(tmp_path, "date,x\n,1.0\n"))

    def test_duplicate_date(self, tmp_path):
        text = "date,x\n2022-01-03,1.0\n2022-01-03,2.0\n"
        with pytest.raises(NonMonotoneDates):
            read_table(write_csv(tmp_path, text))

    def test_descending_dates(self, tmp_path):
        text = "date,x\n2022-01-10,1.0\n2022-01-03,2.0\n"
        with pytest.raises(NonMonotoneDates):
            read_table(write_csv(tmp_path, text))

    def test_blank_lines_skipped(self, tmp_path):
        text = "date,x\n\n2022-01-03,1.0\n\n2022-01-10,2.0\n\n"
        table = read_table(write_csv(tmp_path, text))
        assert table.n == 2

    def test_whitespace_stripped(self, tmp_path):
        text = "date , x \n 2022-01-03 ,1.0\n"
        table = read_table(write_csv(tmp_path, text))
        assert table.labels == ("x",)
        assert table.dates == ("2022-01-03",)


class TestIngest:
    def test_prices_become_net_returns(self, tmp_path):
        text = ("date,x\n2022-01-03,100.0\n2022-01-10,101.0\n"
                "2022-01-17,102.01\n")
        window = ingest(write_csv(tmp_path, text), kind="prices")
        assert window.dates == ("2022-01-10", "2022-01-17")
        assert np.allclose(window.returns[:, 0], [0.01, 0.01],
                           rtol=0, atol=1e-12)

    def test_returns_pass_through_bit_exact(self, tmp_path):
        window = ingest(write_csv(tmp_path, GOOD), kind="returns")
        assert window.dates == ("2022-01-03", "2022-01-10", "2022-01-17")
        assert np.array_equal(
            window.returns,
            np.array([[0.01, -0.02], [0.005, 0.03], [-0.01, 0.0]]))

    def test_single_row_insufficient(self, tmp_path):
        one = "date,x\n2022-01-03,100.0\n"
        for kind in ("prices", "returns"):
            with pytest.raises(InsufficientData):
                ingest(write_csv(tmp_path, one), kind=kind)

    def test_nonpositive_price(self, tmp_path):
        for bad in ("0.0", "-3.0"):
            text = f"date,x\n2022-01-03,100.0\n2022-01-10,{bad}\n"
            with pytest.raises(DataError):
                ingest(write_csv(tmp_path, text), kind="prices")

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError):
            ingest(write_csv(tmp_path, GOOD), kind="levels")


class TestWriteReturns:
    def test_round_trip_bit_exact(self, tmp_path):
        window = make_window(4, 25, seed=111)
        path = tmp_path / "out.csv"
        write_returns(window, path)
        back = ingest(path, kind="returns")
        assert back.assets == window.assets
        assert back.dates == window.dates
        assert np.array_equal(back.returns, window.returns)


class TestBundledDataset:
    def test_shipped_csv_matches_generator(self):
        shipped = load_synthetic_returns()
        fresh = generate_synthetic_returns()
        assert shipped.assets == fresh.assets
        assert shipped.dates == fresh.dates
        assert np.array_equal(shipped.returns, fresh.returns)

    def test_shipped_riskfree_matches_generator(self):
        dates, rates = load_synthetic_riskfree()
        gen_dates, gen_rates = generate_synthetic_riskfree()
        assert dates == gen_dates
        assert np.array_equal(rates, gen_rates)

    def test_shape_and_truth(self):
        window = load_synthetic_returns()
        assert window.n == 208 and window.k == 12
        truth = synthetic_truth()
        assert truth.mu.shape == (12,)
        assert truth.sigma.entries.shape == (12, 12)
        # sample moments of the long panel should sit near the truth
        assert np.max(np.abs(window.returns.mean(axis=0) - truth.mu)) < 0.01


class TestRiskfree:
    def test_load_single_column(self, tmp_path):
        text = "date,rf\n2022-01-03,0.0004\n2022-01-10,0.0005\n"
        dates, rates = load_riskfree(write_csv(tmp_path, text))
        assert dates == ("2022-01-03", "2022-01-10")
        assert np.array_equal(rates, [0.0004, 0.0005])

    def test_multi_column_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_riskfree(write_csv(tmp_path, GOOD))

    def test_align_follows_requested_order(self):
        rf_dates = ("2022-01-03", "2022-01-10", "2022-01-17")
        rf_values = np.array([0.1, 0.2, 0.3])
        out = align_riskfree(rf_dates, rf_values,
                             ["2022-01-17", "2022-01-03"])
        assert np.array_equal(out, [0.3, 0.1])

    def test_align_missing_date(self):
        with pytest.raises(DataError):
            align_riskfree(("2022-01-03",), np.array([0.1]), ["2022-01-10"])


class TestSerialization:
    def test_prior_to_dict_variants(self):
        assert prior_to_dict(DiffusePrior()) == {"kind": "diffuse"}
        conj = make_conjugate_prior(2, seed=13)
        d = prior_to_dict(conj)
        assert d["kind"] == "conjugate"
        assert np.array_equal(d["m0"], conj.m0)
        assert d["r0"] == conj.r0 and d["d0"] == conj.d0
        assert np.array_equal(d["s0"], conj.s0.entries)
        eb = EmpiricalBayesPrior(presample_n=30, d0=35.0, r0=2.0, offset=1)
        assert prior_to_dict(eb) == {"kind": "empirical_bayes",
                                     "presample_n": 30, "d0": 35.0,
                                     "r0": 2.0, "offset": 1}
        with pytest.raises(TypeError):
            prior_to_dict("diffuse")

    def _report(self):
        data = make_window(2, 30, seed=110)
        cfg = BacktestConfig(window_n=20, horizon_T=3, gamma=1.0,
                             prior=DiffusePrior(), B=200, seed=11)
        return run_backtest(data, 0.001, cfg), cfg

    def test_report_to_dict_meta_contract(self):
        report, cfg = self._report()
        d = report_to_dict(report, k=2)
        assert d["meta"] == {"seed": 11, "B": 200,
                             "prior": {"kind": "diffuse"},
                             "n": 20, "k": 2, "t": 0, "T": 3}
        assert d["config"] == config_to_dict(cfg)
        assert len(d["wealth_path"]) == 4
        assert len(d["periods"]) == 3
        period = d["periods"][0]
        assert set(period) == {"t", "date", "weights", "weight_covariance",
                               "realized_wealth", "credible_band",
                               "default_probability"}
        assert set(period["credible_band"]) == {"level", "lower", "upper",
                                                "point", "width"}
        json.dumps(d)  # must be JSON-ready as is

    def test_report_to_csv_round_trips_floats(self):
        report, _ = self._report()
        text = report_to_csv(report)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["date", "wealth", "credible_lower",
                           "credible_upper", "predictive_mean",
                           "default_probability", "w_A00", "w_A01"]
        assert len(rows) == 1 + 3
        for row, period in zip(rows[1:], report.periods):
            assert row[0] == period.date
            assert float(row[1]) == period.realized_wealth
            assert float(row[2]) == period.band.lower
            assert [float(c) for c in row[6:]] == list(period.weights)
