import math

import numpy as np
import pytest

from szmd.operator import SequenceRule
from szmd.report import (
    REFERENCE_ABS_ERRORS,
    REFERENCE_NS,
    REFERENCE_SPOT_CHECKS,
    REFERENCE_XS,
    compare_with_reference,
    curves_csv,
    format_suite_report,
    format_table_pretty,
    make_curves,
    make_error_table,
    run_verification_suite,
    table_csv,
)
from szmd.targets import BUILTIN_TARGETS

X2E2X = BUILTIN_TARGETS["x2e2x"]
NEGX3E5X = BUILTIN_TARGETS["negx3e5x"]
ONE = BUILTIN_TARGETS["one"]


class TestErrorTable:
    def test_spot_cells_match_published_values(self):
        for (label, x, n), want in REFERENCE_SPOT_CHECKS.items():
            power = {"n": 1.0, "n^1.5": 1.5, "n^2": 2.0}[label]
            t = make_error_table(X2E2X, SequenceRule.from_power(power), xs=(x,), ns=(n,))
            np.testing.assert_allclose(t.cell(x, n).abs_error, want, rtol=1e-4)

    def test_cells_depend_only_on_u(self):
        # n=100 under u_n = n and n=10 under u_n = n^2 share u = 100
        t1 = make_error_table(X2E2X, SequenceRule.identity(), xs=(1.0, 2.5), ns=(100,))
        t2 = make_error_table(X2E2X, SequenceRule.from_power(2.0), xs=(1.0, 2.5), ns=(10,))
        for x in (1.0, 2.5):
            a, b = t1.cell(x, 100), t2.cell(x, 10)
            assert a.u == b.u
            np.testing.assert_allclose(a.abs_error, b.abs_error, rtol=1e-10)

    def test_cross_rule_cell_at_u1000(self):
        # u = 1000 via n=1000 (identity) and n=100 (power 1.5)
        t1 = make_error_table(X2E2X, SequenceRule.identity(), xs=(0.5,), ns=(1000,))
        t2 = make_error_table(X2E2X, SequenceRule.from_power(1.5), xs=(0.5,), ns=(100,))
        np.testing.assert_allclose(
            t1.cell(0.5, 1000).abs_error, t2.cell(0.5, 100).abs_error, rtol=1e-10
        )

    def test_errors_nonnegative_finite(self):
        t = make_error_table(X2E2X, SequenceRule.identity(), xs=(0.1, 1.0), ns=(10, 50))
        for c in t.cells:
            assert c.error is None
            assert math.isfinite(c.abs_error) and c.abs_error >= 0.0

    def test_divergent_cells_are_flagged_not_fatal(self):
        t = make_error_table(
            X2E2X, SequenceRule.from_explicit([1.5, 3.0]), xs=(0.5,), ns=(1, 2)
        )
        bad = t.cell(0.5, 1)
        good = t.cell(0.5, 2)
        assert bad.error is not None and math.isnan(bad.abs_error)
        assert good.error is None and math.isfinite(good.abs_error)

    def test_u_column_strictly_increasing(self):
        t = make_error_table(X2E2X, SequenceRule.from_power(1.5), xs=(1.0,), ns=(10, 50, 100))
        us = [c.u for c in t.cells]
        assert all(b > a for a, b in zip(us, us[1:]))


class TestReferenceComparison:
    def test_full_row_within_tolerance(self):
        t = make_error_table(X2E2X, SequenceRule.identity(), xs=(1.0,), ns=REFERENCE_NS)
        assert compare_with_reference(t, rtol=1e-3) == []

    def test_detects_discrepancy_under_tight_tolerance(self):
        t = make_error_table(X2E2X, SequenceRule.identity(), xs=(1.0,), ns=(10,))
        assert compare_with_reference(t, rtol=1e-12) != []

    def test_unknown_rule_rejected(self):
        t = make_error_table(X2E2X, SequenceRule.from_power(3.0), xs=(1.0,), ns=(10,))
        with pytest.raises(ValueError):
            compare_with_reference(t)

    def test_reference_data_shape(self):
        for label, rows in REFERENCE_ABS_ERRORS.items():
            assert set(rows) == set(REFERENCE_XS)
            assert all(len(v) == len(REFERENCE_NS) for v in rows.values())


class TestCurves:
    def test_series_layout(self):
        series = make_curves(NEGX3E5X, [15.0, 35.0], np.linspace(0.0, 2.5, 26))
        assert [s.label for s in series] == ["target", "u=15", "u=35"]
        for s in series:
            xs = [p[0] for p in s.points]
            assert all(b > a for a, b in zip(xs, xs[1:]))
            assert all(math.isfinite(p[1]) for p in s.points)

    def test_operator_curves_approach_target(self):
        series = make_curves(NEGX3E5X, [15.0, 35.0, 50.0], np.linspace(0.0, 2.5, 26))
        target = np.array([p[1] for p in series[0].points])
        devs = [
            np.max(np.abs(np.array([p[1] for p in s.points]) - target))
            for s in series[1:]
        ]
        assert devs[0] > devs[1] > devs[2]

    def test_constant_target_curve_is_flat(self):
        series = make_curves(ONE, [20.0], np.linspace(0.0, 2.0, 11))
        vals = np.array([p[1] for p in series[1].points])
        np.testing.assert_allclose(vals, 1.0, atol=1e-12)

    def test_truncated_curves_deviate_far_out(self):
        grid = np.linspace(0.0, 2.5, 26)
        series = make_curves(NEGX3E5X, [50.0], grid, truncation_js=[50])
        full = dict(series[1].points)
        cut = dict(series[2].points)
        assert series[2].truncation_j == 50
        assert abs(cut[2.5] - full[2.5]) > 1e3 * abs(cut[0.1] - full[0.1])

    def test_invalid_grid(self):
        with pytest.raises(ValueError):
            make_curves(ONE, [10.0], [1.0, 1.0, 2.0])


class TestCsvOutput:
    def test_header_and_determinism(self, tmp_path):
        t = make_error_table(X2E2X, SequenceRule.identity(), xs=(0.1, 0.5), ns=(10, 50))
        text = table_csv(t)
        assert text.splitlines()[0] == "x,n,u_n,operator_value,g_value,abs_error"
        t2 = make_error_table(X2E2X, SequenceRule.identity(), xs=(0.1, 0.5), ns=(10, 50))
        assert table_csv(t2) == text
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        p1.write_text(text)
        p2.write_text(table_csv(t2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_round_trip_precision(self):
        t = make_error_table(X2E2X, SequenceRule.identity(), xs=(1.0,), ns=(100,))
        line = table_csv(t).splitlines()[1].split(",")
        assert float(line[3]) == t.cell(1.0, 100).operator_value

    def test_curves_csv_layout(self):
        series = make_curves(ONE, [10.0], np.linspace(0.0, 1.0, 3))
        lines = curves_csv(series).splitlines()
        assert lines[0] == "series,u,truncation_J,x,value"
        assert lines[1].startswith("target,,,")

    def test_pretty_format_mentions_rule_and_cells(self):
        t = make_error_table(X2E2X, SequenceRule.from_power(2.0), xs=(1.0,), ns=(10,))
        text = format_table_pretty(t)
        assert "n^2" in text
        assert "1.46137" in text


class TestVerificationSuite:
    def test_all_checks_pass(self):
        checks = run_verification_suite(tables="spot")
        report = format_suite_report(checks)
        failed = [c for c in checks if not c.passed]
        assert not failed, f"failing checks:\n{report}"

    def test_report_format(self):
        checks = run_verification_suite(tables="none")
        text = format_suite_report(checks)
        assert "[PASS]" in text
        assert "checks passed" in text
        names = [c.name for c in checks]
        assert "central-moment-recurrence" in names
        assert "kernel-normalization" in names
        assert "truncation-study" in names
