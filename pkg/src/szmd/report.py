"""Convergence tables, curve data, and the verification suite.

Reproduces the published reference error tables for g(t) = t^2 e^{2t} under
the three parameter rules u_n = n, n^{3/2}, n^2, emits curve data suitable
for external plotting, and bundles the library's cross-checks into a single
structured pass/fail report.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from .basis import DEFAULT_TAIL_EPS, TailEpsilon
from .moments import (
    central_moment,
    central_moment_bruteforce,
    central_moment_poly,
    central_moments_by_recurrence,
    decay_order_check,
    raw_moment,
    zeta_sq,
)
from .operator import SequenceRule, apply, apply_truncated, kernel_cdf
from .quadrature import DEFAULT_QUADRATURE, DivergentIntegral, QuadratureConfig
from .targets import (
    BUILTIN_TARGETS,
    BlackBox,
    MonomialSum,
    TargetFunction,
    target_label,
)

# ---------------------------------------------------------------------------
# published reference data: absolute errors |B(g;x) - g(x)| for
# g(t) = t^2 e^{2t}, x down the rows, n across the columns.

REFERENCE_XS: tuple[float, ...] = (0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 2.5)
REFERENCE_NS: tuple[int, ...] = (10, 50, 100, 200, 250, 500, 1000)

REFERENCE_ABS_ERRORS: dict[str, dict[float, tuple[float, ...]]] = {
    "n": {
        0.1: (0.202522, 0.0156053, 0.0069326, 0.00326665, 0.00258244, 0.00126086, 0.000622967),
        0.5: (3.82396, 0.325365, 0.148479, 0.0710035, 0.0563036, 0.0276615, 0.0137104),
        0.9: (27.2622, 2.13631, 0.969982, 0.462837, 0.366865, 0.180094, 0.0892291),
        1.0: (42.1618, 3.22439, 1.46137, 0.696735, 0.552174, 0.270979, 0.134238),
        1.5: (310.724, 20.8491, 9.3538, 4.43876, 3.51461, 1.72172, 0.852162),
        2.0: (1888.96, 110.236, 48.9145, 23.0939, 18.2677, 8.93151, 4.4164),
        2.5: (10237.6, 516.742, 226.689, 106.464, 84.1292, 41.0503, 20.2783),
    },
    "n^1.5": {
        0.1: (0.0282979, 0.0018008, 0.000622967, 0.000218562, 0.000156203, 0.0000551185, 0.0000194739),
        0.5: (0.574288, 0.0394044, 0.0137104, 0.0048201, 0.00344596, 0.0012166, 0.000429916),
        0.9: (3.79761, 0.256632, 0.0892291, 0.0313623, 0.0224205, 0.00791509, 0.00279694),
        1.0: (5.74555, 0.386191, 0.134238, 0.0471774, 0.033726, 0.011906, 0.00420715),
        1.5: (37.6466, 2.45554, 0.852162, 0.299321, 0.213959, 0.0755213, 0.0266852),
        2.0: (201.92, 12.7484, 4.4164, 1.55031, 1.10808, 0.391058, 0.138172),
        2.5: (960.667, 58.6418, 20.2783, 7.11386, 5.08411, 1.79398, 0.633827),
    },
    "n^2": {
        0.1: (0.0069326, 0.000247412, 0.0000616321, 0.0000153943, 9.85127e-6, 2.462477e-6, 6.15594e-7),
        0.5: (0.148479, 0.00545553, 0.00136032, 0.000339859, 0.000217493, 0.0000543675, 0.0000135915),
        0.9: (0.969982, 0.0354973, 0.00885019, 0.00221104, 0.00141495, 0.000353699, 0.0000884224),
        1.0: (1.46137, 0.053398, 0.0133126, 0.00332584, 0.00212836, 0.000532032, 0.000133004),
        1.5: (9.3538, 0.338802, 0.0844444, 0.0210951, 0.0134997, 0.00337451, 0.000843601),
        2.0: (48.9145, 1.75487, 0.437267, 0.109226, 0.069898, 0.0174722, 0.0043679),
        2.5: (226.689, 8.0529, 2.00598, 0.501045, 0.320634, 0.080147, 0.020036),
    },
}

#: Strict spot-check subset: (rule label, x, n) -> published absolute error.
REFERENCE_SPOT_CHECKS: dict[tuple[str, float, int], float] = {
    ("n", 1.0, 100): 1.46137,
    ("n", 2.5, 1000): 20.2783,
    ("n^1.5", 0.1, 100): 0.000622967,
    ("n^2", 1.0, 10): 1.46137,
}


@dataclass(frozen=True)
class TableCell:
    x: float
    n: int
    u: float
    operator_value: float
    g_value: float
    abs_error: float
    error: Optional[str] = None


@dataclass(frozen=True)
class ErrorTable:
    g_label: str
    rule: SequenceRule
    xs: tuple[float, ...]
    ns: tuple[int, ...]
    cells: tuple[TableCell, ...]

    def cell(self, x: float, n: int) -> TableCell:
        for c in self.cells:
            if c.n == n and math.isclose(c.x, x, rel_tol=0.0, abs_tol=1e-12):
                return c
        raise KeyError(f"no cell at x={x}, n={n}")


def make_error_table(
    g: TargetFunction,
    rule: SequenceRule,
    xs=REFERENCE_XS,
    ns=REFERENCE_NS,
    eps: float = DEFAULT_TAIL_EPS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ErrorTable:
    """Fill the (x, n) error grid for a target under a parameter rule.

    Cells where the operator diverges (u_n not above the growth rate) are
    kept in place with NaN values and an explanatory message instead of
    aborting the whole table.
    """
    xs = tuple(float(x) for x in xs)
    ns = tuple(int(n) for n in ns)
    trunc = TailEpsilon(eps)
    cells = []
    for x in xs:
        gx = float(np.asarray(g(np.array([x])))[0])
        for n in ns:
            u = rule.u_value(n)
            try:
                op = apply(g, u, x, trunc, cfg)
                cells.append(
                    TableCell(x, n, u, op.value, gx, abs(op.value - gx))
                )
            except DivergentIntegral as exc:
                cells.append(
                    TableCell(x, n, u, math.nan, gx, math.nan, error=str(exc))
                )
    return ErrorTable(target_label(g), rule, xs, ns, tuple(cells))


@dataclass(frozen=True)
class CurveSeries:
    label: str
    u: Optional[float]
    truncation_j: Optional[int]
    points: tuple[tuple[float, float], ...]


def make_curves(
    g: TargetFunction,
    u_values,
    x_grid,
    truncation_js=None,
    eps: float = DEFAULT_TAIL_EPS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> list[CurveSeries]:
    """Curve data: the target itself, one series per u, and optionally one
    truncated series per (u, J) pair."""
    xs = np.asarray(sorted(float(x) for x in x_grid), dtype=np.float64)
    if len(xs) < 2 or np.any(np.diff(xs) <= 0.0):
        raise ValueError("x grid must be strictly increasing")
    series = [
        CurveSeries(
            "target",
            None,
            None,
            tuple((float(x), float(np.asarray(g(np.array([x])))[0])) for x in xs),
        )
    ]
    for u in u_values:
        pts = tuple(
            (float(x), apply(g, float(u), float(x), TailEpsilon(eps), cfg).value)
            for x in xs
        )
        series.append(CurveSeries(f"u={float(u):g}", float(u), None, pts))
    for u, j_max in zip(u_values, truncation_js) if truncation_js else ():
        pts = tuple(
            (float(x), apply_truncated(g, float(u), float(x), int(j_max), cfg).value)
            for x in xs
        )
        series.append(
            CurveSeries(f"u={float(u):g},J={int(j_max)}", float(u), int(j_max), pts)
        )
    return series


# ---------------------------------------------------------------------------
# output formatting

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def table_csv(table: ErrorTable) -> str:
    out = io.StringIO()
    out.write("x,n,u_n,operator_value,g_value,abs_error\n")
    for c in table.cells:
        out.write(
            f"{_fmt(c.x)},{c.n},{_fmt(c.u)},{_fmt(c.operator_value)},"
            f"{_fmt(c.g_value)},{_fmt(c.abs_error)}\n"
        )
    return out.getvalue()


def write_table_csv(table: ErrorTable, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(table_csv(table))


def curves_csv(series: list[CurveSeries]) -> str:
    out = io.StringIO()
    out.write("series,u,truncation_J,x,value\n")
    for s in series:
        u = "" if s.u is None else _fmt(s.u)
        j = "" if s.truncation_j is None else str(s.truncation_j)
        for x, v in s.points:
            out.write(f"{s.label},{u},{j},{_fmt(x)},{_fmt(v)}\n")
    return out.getvalue()


def write_curves_csv(series: list[CurveSeries], path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(curves_csv(series))


def format_table_pretty(table: ErrorTable) -> str:
    """Matrix view rounded to 6 significant digits, x down, n across."""
    lines = [f"abs errors for g = {table.g_label}, rule u_n = {table.rule.label}"]
    header = ["x\\n"] + [str(n) for n in table.ns]
    rows = [header]
    for x in table.xs:
        row = [f"{x:g}"]
        for n in table.ns:
            c = table.cell(x, n)
            row.append("divergent" if c.error else f"{c.abs_error:.6g}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# reference comparison

@dataclass(frozen=True)
class ReferenceMismatch:
    rule_label: str
    x: float
    n: int
    computed: float
    reference: float
    rel_deviation: float


def compare_with_reference(
    table: ErrorTable, rtol: float = 1e-3
) -> list[ReferenceMismatch]:
    """Cells whose absolute error deviates from the published value by more
    than rtol (relative).  Only defined for the reference target/rules."""
    ref = REFERENCE_ABS_ERRORS.get(table.rule.label)
    if ref is None:
        raise ValueError(f"no reference table for rule {table.rule.label!r}")
    mismatches = []
    for c in table.cells:
        row = ref.get(c.x)
        if row is None or c.n not in REFERENCE_NS:
            continue
        want = row[REFERENCE_NS.index(c.n)]
        rel = abs(c.abs_error - want) / abs(want)
        if not (rel <= rtol):
            mismatches.append(
                ReferenceMismatch(table.rule.label, c.x, c.n, c.abs_error, want, rel)
            )
    return mismatches


# ---------------------------------------------------------------------------
# verification suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


def _check(name: str, measured: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name, measured, tolerance, measured <= tolerance, detail)


def _closed_form_raw(u: float, x: float, m: int) -> float:
    if m == 0:
        return 1.0
    if m == 1:
        return 1.0 / u + x
    if m == 2:
        return (2.0 + 4.0 * x * u + x * x * u * u) / u**2
    return (6.0 + 18.0 * x * u + 9.0 * x * x * u * u + x**3 * u**3) / u**3


def run_verification_suite(tables: str = "spot") -> list[CheckResult]:
    """Execute the library's cross-checks and return one verdict per check.

    tables: "none", "spot" (strict 4-cell subset), or "full" (all 147
    reference cells; the slowest part, a few seconds).
    Failures are data, not exceptions.
    """
    checks: list[CheckResult] = []
    rng = np.random.default_rng(20240817)

    # closed-form raw moments at random parameter/point pairs
    worst = 0.0
    for _ in range(50):
        u = float(rng.uniform(1.0, 1000.0))
        x = float(rng.uniform(0.0, 2.5))
        for m in range(4):
            want = _closed_form_raw(u, x, m)
            worst = max(worst, abs(raw_moment(u, x, m) - want) / abs(want))
    checks.append(_check("raw-moments-closed-form", worst, 1e-13))

    # recurrence vs binomial expansion, exact coefficients
    rec = central_moments_by_recurrence(6)
    worst = 0.0
    for m in range(7):
        binom = central_moment_poly(m)
        if not rec[m].same_coeffs(binom):
            keys = set(rec[m].coeffs) | set(binom.coeffs)
            for k in keys:
                a, b = rec[m].coeffs.get(k, {}), binom.coeffs.get(k, {})
                for d in set(a) | set(b):
                    worst = max(worst, abs(float(a.get(d, 0) - b.get(d, 0))))
    checks.append(_check("central-moment-recurrence", worst, 1e-12))

    # the variant with x multiplying every term must disagree already at m=1
    bad = central_moments_by_recurrence(2, misplace_x=True)
    dev = 0.0
    for (u, x) in [(10.0, 2.0), (50.0, 0.5)]:
        dev = max(dev, abs(bad[2].evaluate(u, x) - central_moment(u, x, 2)))
    checks.append(
        CheckResult(
            "recurrence-misplacement-detected",
            dev,
            1e-6,
            dev > 1e-6,
            "known-bad variant must visibly disagree with the closed form",
        )
    )

    # second central moment equals 2*zeta^2/u
    worst = 0.0
    for u in (10.0, 100.0, 1e4):
        for x in (0.0, 0.5, 1.0, 2.5):
            want = 2.0 * zeta_sq(u, x) / u
            worst = max(worst, abs(central_moment(u, x, 2) - want) / want)
    checks.append(_check("second-moment-zeta-identity", worst, 1e-14))

    # closed polynomial vs series-plus-quadrature brute force
    worst = 0.0
    for u in (5.0, 10.0, 100.0):
        for x in (0.1, 1.0, 2.5):
            for m in range(7):
                ref = central_moment_bruteforce(u, x, m)
                got = central_moment(u, x, m)
                worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
    checks.append(_check("central-moment-bruteforce", worst, 1e-8))

    # decay order of the central moments in u
    u_grid = np.logspace(2, 6, 9)
    worst = 0.0
    for m in (1, 2, 3, 4):
        rep = decay_order_check(m, 1.0, u_grid)
        worst = max(worst, abs(rep.exponent - rep.limit_exponent))
    checks.append(_check("central-moment-decay-order", worst, 0.1))

    # kernel mass normalization via the cumulative form
    worst = 0.0
    for u in (10.0, 100.0):
        for x in (0.5, 1.0, 2.0):
            y_big = x + 200.0
            worst = max(worst, abs(kernel_cdf(u, x, y_big) - 1.0))
    checks.append(_check("kernel-normalization", worst, 1e-10))

    # kernel cdf tail inequalities
    worst = -math.inf
    for u in (100.0, 400.0):
        for x in (0.5, 1.0, 2.0):
            cap = 2.0 * zeta_sq(u, x) / u
            for y in (x / 4.0, x / 2.0):
                worst = max(worst, kernel_cdf(u, x, y) - cap / (x - y) ** 2)
            for z in (1.5 * x, 2.0 * x):
                worst = max(
                    worst, (1.0 - kernel_cdf(u, x, z)) - cap / (z - x) ** 2
                )
    checks.append(_check("kernel-cdf-tail-bounds", worst, 0.0))

    # pointwise Lipschitz-gauge bound
    g_exp = BUILTIN_TARGETS["expneg"]
    worst = -math.inf
    for u in (50.0, 100.0, 400.0):
        for x in (0.5, 1.0, 2.0):
            res = bounds_mod.lipschitz_bound_check(g_exp, 1.0, u, x)
            worst = max(worst, res.lhs - res.rhs)
    checks.append(_check("lipschitz-gauge-bound", worst, 1e-9))

    # modified Lipschitz space bound: positive and decreasing in u
    us = (10.0, 100.0, 1000.0)
    vals = [bounds_mod.lip_space_bound(1.0, 1.0, 1.0, 1.0, u, 1.0) for u in us]
    ok = all(v > 0.0 for v in vals) and all(b < a for a, b in zip(vals, vals[1:]))
    checks.append(
        CheckResult("lip-space-bound-monotone", vals[-1], vals[0], ok,
                    "positive, strictly decreasing in u")
    )

    # bounded-variation bound, kinked and affine targets
    abs_shift = BlackBox(lambda t: abs(t - 1.0), growth_rate=0.0, kinks=(1.0,),
                         label="|t-1|")
    dbv_abs = bounds_mod.DbvSpec(
        abs_shift,
        gprime_left=lambda t: -1.0 if t <= 1.0 else 1.0,
        gprime_right=lambda t: -1.0 if t < 1.0 else 1.0,
        breakpoints=(1.0,),
    )
    worst = -math.inf
    for u in (100.0, 400.0, 900.0):
        for x in (0.5, 1.0, 1.5):
            res = bounds_mod.dbv_empirical_check(dbv_abs, u, x)
            worst = max(worst, res.lhs - res.bound.total)
    checks.append(_check("dbv-empirical-bound", worst, 1e-9))

    affine = MonomialSum(((3.0, 1), (0.25, 0)))
    dbv_aff = bounds_mod.DbvSpec(
        affine, gprime_left=lambda t: 3.0, gprime_right=lambda t: 3.0
    )
    worst = 0.0
    for u in (100.0, 400.0):
        res = bounds_mod.dbv_empirical_check(dbv_aff, u, 1.0)
        worst = max(worst, abs(res.lhs - res.bound.total))
    checks.append(_check("dbv-affine-exactness", worst, 1e-12))

    # uniform convergence speed on the monomial test set
    x_grid = np.linspace(0.0, 2.5, 11)
    worst_ratio_deficit = 0.0
    for name in ("t", "t2"):
        g = BUILTIN_TARGETS[name]
        e_small = bounds_mod.korovkin_sup_error(g, 1e2, x_grid)
        e_large = bounds_mod.korovkin_sup_error(g, 1e4, x_grid)
        worst_ratio_deficit = max(worst_ratio_deficit, 50.0 - e_small / e_large)
    one_err = bounds_mod.korovkin_sup_error(BUILTIN_TARGETS["one"], 1e4, x_grid)
    checks.append(_check("korovkin-decay-ratio", worst_ratio_deficit, 0.0,
                         "sup error must shrink >= 50x from u=1e2 to u=1e4"))
    checks.append(_check("korovkin-constant-exact", one_err, 1e-12))

    # fixed-index truncation hurts at large x, not at small x
    g_neg = BUILTIN_TARGETS["negx3e5x"]
    full_far = apply(g_neg, 50.0, 2.5)
    full_near = apply(g_neg, 50.0, 0.2)
    dev_far = abs(full_far.value - apply_truncated(g_neg, 50.0, 2.5, 50).value)
    dev_near = abs(full_near.value - apply_truncated(g_neg, 50.0, 0.2, 50).value)
    ok = dev_far > 10.0 * full_far.tail_bound and dev_near <= full_near.tail_bound
    checks.append(
        CheckResult("truncation-study", dev_far, 10.0 * full_far.tail_bound, ok,
                    "J=50 must lose the series at x=2.5 but not at x=0.2")
    )

    if tables in ("spot", "full"):
        worst = 0.0
        for (label, x, n), want in REFERENCE_SPOT_CHECKS.items():
            rule = SequenceRule.identity() if label == "n" else SequenceRule.from_power(
                {"n^1.5": 1.5, "n^2": 2.0}[label]
            )
            t = make_error_table(BUILTIN_TARGETS["x2e2x"], rule, xs=(x,), ns=(n,))
            got = t.cell(x, n).abs_error
            worst = max(worst, abs(got - want) / want)
        checks.append(_check("reference-spot-checks", worst, 1e-4))

    if tables == "full":
        worst = 0.0
        count_bad = 0
        for label, power in (("n", 1.0), ("n^1.5", 1.5), ("n^2", 2.0)):
            rule = SequenceRule.from_power(power)
            t = make_error_table(BUILTIN_TARGETS["x2e2x"], rule)
            mism = compare_with_reference(t, rtol=1e-3)
            count_bad += len(mism)
            for c in t.cells:
                want = REFERENCE_ABS_ERRORS[label][c.x][REFERENCE_NS.index(c.n)]
                worst = max(worst, abs(c.abs_error - want) / want)
        checks.append(
            CheckResult("reference-tables-full", worst, 1e-3, count_bad == 0,
                        f"{count_bad} cell(s) off by more than 0.1%")
        )

    return checks


def format_suite_report(checks: list[CheckResult]) -> str:
    lines = []
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(
            f"[{mark}] {c.name}: measured={c.measured:.6g} tolerance={c.tolerance:.6g}"
            + (f"  ({c.detail})" if c.detail else "")
        )
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines)
