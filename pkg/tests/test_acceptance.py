"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""
import math
import time

import numpy as np
import pytest

from szmd.bounds import (
    DbvSpec,
    dbv_empirical_check,
    korovkin_sup_error,
    lip_space_bound,
    lipschitz_bound_check,
)
from szmd.moments import (
    central_moment,
    central_moment_bruteforce,
    central_moment_poly,
    central_moments_by_recurrence,
    decay_order_check,
    raw_moment,
    zeta_sq,
)
from szmd.operator import SequenceRule, apply, apply_truncated, kernel_cdf
from szmd.report import (
    REFERENCE_ABS_ERRORS,
    REFERENCE_NS,
    REFERENCE_SPOT_CHECKS,
    make_error_table,
)
from szmd.targets import BUILTIN_TARGETS, BlackBox, MonomialSum

RULES = {
    "n": SequenceRule.identity(),
    "n^1.5": SequenceRule.from_power(1.5),
    "n^2": SequenceRule.from_power(2.0),
}


def _report(number: int, name: str) -> None:
    print(f"[ACCEPTANCE] criterion {number} ({name}): PASS")


@pytest.fixture(scope="module")
def reference_tables():
    g = BUILTIN_TARGETS["x2e2x"]
    start = time.perf_counter()
    tables = {label: make_error_table(g, rule) for label, rule in RULES.items()}
    elapsed = time.perf_counter() - start
    return tables, elapsed


def test_criterion_1_table_reproduction(reference_tables):
    tables, elapsed = reference_tables
    for label, table in tables.items():
        ref = REFERENCE_ABS_ERRORS[label]
        for cell in table.cells:
            want = ref[cell.x][REFERENCE_NS.index(cell.n)]
            rel = abs(cell.abs_error - want) / want
            assert rel <= 1e-3, (
                f"rule {label}, x={cell.x}, n={cell.n}: computed "
                f"{cell.abs_error!r} vs published {want!r} (rel {rel:.2e})"
            )
    for (label, x, n), want in REFERENCE_SPOT_CHECKS.items():
        got = tables[label].cell(x, n).abs_error
        rel = abs(got - want) / want
        assert rel <= 1e-4, f"spot cell {label} x={x} n={n}: rel {rel:.2e}"
    assert elapsed < 60.0, f"table generation took {elapsed:.1f}s"
    _report(1, f"table reproduction, 147 cells in {elapsed:.1f}s")


def test_criterion_2_cross_table_identity(reference_tables):
    tables, _ = reference_tables
    shared = [
        ("n", 100, "n^2", 10),     # u = 100 both ways
        ("n", 1000, "n^1.5", 100), # u = 1000 both ways
    ]
    for la, na, lb, nb in shared:
        for x in (0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 2.5):
            a = tables[la].cell(x, na)
            b = tables[lb].cell(x, nb)
            np.testing.assert_allclose(
                a.abs_error, b.abs_error, rtol=1e-10,
                err_msg=f"u={a.u} vs {b.u} at x={x}",
            )
            np.testing.assert_allclose(a.operator_value, b.operator_value, rtol=1e-10)
    _report(2, "cross-table identity at shared u")


def test_criterion_3_moment_suite():
    # raw moments against the printed closed forms
    rng = np.random.default_rng(1234)
    closed = [
        lambda u, x: 1.0,
        lambda u, x: 1.0 / u + x,
        lambda u, x: (2.0 + 4.0 * x * u + (x * u) ** 2) / u**2,
        lambda u, x: (6.0 + 18.0 * x * u + 9.0 * x**2 * u**2 + x**3 * u**3) / u**3,
    ]
    for _ in range(50):
        u = float(rng.uniform(0.5, 5000.0))
        x = float(rng.uniform(0.0, 2.5))
        for m in range(4):
            np.testing.assert_allclose(
                raw_moment(u, x, m), closed[m](u, x), rtol=1e-13
            )
    # central moments against the series-plus-quadrature oracle
    for u in (5.0, 10.0, 100.0):
        for x in (0.1, 1.0, 2.5):
            for m in range(7):
                ref = central_moment_bruteforce(u, x, m)
                assert abs(central_moment(u, x, m) - ref) <= 1e-8 * max(abs(ref), 1e-12)
    # recurrence path reproduces the binomial polynomials exactly
    rec = central_moments_by_recurrence(6)
    for m in range(7):
        assert rec[m].same_coeffs(central_moment_poly(m), tol=1e-12)
    # second-moment identity
    for u in (3.0, 10.0, 400.0):
        for x in (0.0, 0.5, 1.0, 2.5):
            want = 2.0 * zeta_sq(u, x) / u
            np.testing.assert_allclose(central_moment(u, x, 2), want, rtol=1e-14)
    _report(3, "moment suite")


def test_criterion_4_decay_order():
    grid = np.logspace(2, 6, 9)
    for m in (1, 2, 3, 4):
        rep = decay_order_check(m, 1.0, grid)
        want = -math.floor((m + 1) / 2)
        assert abs(rep.exponent - want) <= 0.1, (
            f"m={m}: fitted {rep.exponent:.4f}, expected {want}"
        )
    _report(4, "central-moment decay order")


def test_criterion_5_kernel():
    for u in (10.0, 100.0):
        for x in (0.5, 1.0, 2.0):
            assert abs(kernel_cdf(u, x, x + 200.0) - 1.0) <= 1e-10
    for u in (100.0, 400.0):
        for x in (0.5, 1.0, 2.0):
            cap = 2.0 * zeta_sq(u, x) / u
            for y in (x / 4.0, x / 2.0):
                assert kernel_cdf(u, x, y) <= cap / (x - y) ** 2
            for z in (1.5 * x, 2.0 * x):
                assert 1.0 - kernel_cdf(u, x, z) <= cap / (z - x) ** 2
    _report(5, "kernel normalization and tail bounds")


def test_criterion_6_error_bounds():
    expneg = BUILTIN_TARGETS["expneg"]
    for u in (50.0, 100.0, 400.0):
        for x in (0.5, 1.0, 2.0):
            res = lipschitz_bound_check(expneg, 1.0, u, x)
            assert res.holds, f"Lipschitz bound violated at u={u}, x={x}"

    vals = [lip_space_bound(1.0, 1.0, 1.0, 1.0, u, 1.0) for u in (50, 100, 400, 1600)]
    assert all(v > 0.0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))

    abs_shift = BlackBox(
        lambda t: abs(t - 1.0), growth_rate=0.0, kinks=(1.0,), label="|t-1|"
    )
    spec = DbvSpec(
        abs_shift,
        gprime_left=lambda t: -1.0 if t <= 1.0 else 1.0,
        gprime_right=lambda t: -1.0 if t < 1.0 else 1.0,
        breakpoints=(1.0,),
    )
    for u in (100.0, 400.0, 900.0):
        for x in (0.5, 1.0, 1.5):
            res = dbv_empirical_check(spec, u, x)
            assert res.holds, f"DBV bound violated at u={u}, x={x}"

    affine = MonomialSum(((2.0, 1), (1.0, 0)))
    aff_spec = DbvSpec(affine, gprime_left=lambda t: 2.0, gprime_right=lambda t: 2.0)
    for u in (100.0, 400.0):
        res = dbv_empirical_check(aff_spec, u, 1.0)
        np.testing.assert_allclose(res.lhs, 2.0 / u, rtol=1e-11)
        np.testing.assert_allclose(res.bound.total, 2.0 / u, rtol=1e-14)
    _report(6, "Lipschitz, Lipschitz-space, and DBV bounds")


def test_criterion_7_korovkin_decay():
    grid = np.linspace(0.0, 2.5, 11)
    for name in ("t", "t2"):
        g = BUILTIN_TARGETS[name]
        e2 = korovkin_sup_error(g, 1e2, grid)
        e4 = korovkin_sup_error(g, 1e4, grid)
        assert e2 / e4 >= 50.0, f"g={name}: ratio {e2 / e4:.1f}"
    one = BUILTIN_TARGETS["one"]
    for u in (1e2, 1e3, 1e4):
        assert korovkin_sup_error(one, u, grid) <= 1e-12
    _report(7, "Korovkin decay")


def test_criterion_8_truncation_study():
    g = BUILTIN_TARGETS["negx3e5x"]
    # values frozen from the extended-summation oracle
    full_far = apply(g, 50.0, 2.5)
    full_near = apply(g, 50.0, 0.2)
    np.testing.assert_allclose(full_far.value, -1.0059371002e-4, rtol=1e-8)
    np.testing.assert_allclose(full_near.value, -3.6648469251e-3, rtol=1e-8)

    trunc_far = apply_truncated(g, 50.0, 2.5, 50)
    trunc_near = apply_truncated(g, 50.0, 0.2, 50)
    # cutting at J=50 with the series mode at ux=125 wipes the value out
    assert abs(trunc_far.value) < 1e-12

    dev_far = abs(full_far.value - trunc_far.value)
    dev_near = abs(full_near.value - trunc_near.value)
    assert dev_far > 10.0 * full_far.tail_bound
    assert dev_near <= full_near.tail_bound
    _report(8, "fixed-index truncation study")
