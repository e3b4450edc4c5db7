import math

import numpy as np
import pytest

from glab.errors import DomainError, ParameterError
from glab.estimation import (
    CurveEstimate,
    check_curve_shape,
    estimate_curve,
    g_curve,
    g_function,
    ks_critical,
    ks_statistic,
    q_scan,
    scaling_test,
    segment_window,
    stretching_bound_check,
    universal_bound_check,
)
from glab.geometry import ANIMAL_RESTRICTED, PATH_MODEL, Query
from glab.point_process import IntensityDescriptor

DIRAC = IntensityDescriptor.dirac_kind(1.0, 1.0, 2)


# ---------------------------------------------------------------------------
# g function
# ---------------------------------------------------------------------------


def test_g_identities():
    for d in (2, 3, 4):
        assert g_function(1.0 / math.sqrt(d), d) == pytest.approx(1.0, abs=1e-12)
        assert g_function(1.0, d) == pytest.approx(0.0, abs=1e-12)


def test_g_derived_value():
    assert g_function(0.9, 2) == pytest.approx(0.8858, abs=1e-4)


def test_g_strictly_decreasing():
    for d in (2, 3, 4):
        grid = np.linspace(1.0 / math.sqrt(d), 1.0, 400)
        vals = [g_function(b, d) for b in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_g_domain_error():
    with pytest.raises(DomainError):
        g_function(0.3, 2)
    curve = g_curve([1 / math.sqrt(2), 0.9, 1.0], 2)
    assert curve[0].value == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# curve estimation
# ---------------------------------------------------------------------------


def _tiny_curve(seed=5, workers=1, mode="auto"):
    return estimate_curve(
        DIRAC,
        PATH_MODEL,
        0.0,
        [0.0, 0.5, 1.0],
        [4.0, 6.0],
        replicates=4,
        seed=seed,
        mode=mode,
        effort=30,
        workers=workers,
    )


def test_estimate_curve_deterministic_and_worker_independent():
    a = _tiny_curve(workers=1)
    b = _tiny_curve(workers=3)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.exact, b.exact)
    c = _tiny_curve(seed=6)
    assert not np.array_equal(a.values, c.values)


def test_estimate_curve_beta_one_rows_are_exact_zero():
    curve = _tiny_curve()
    bi = curve.betas.index(1.0)
    assert np.all(curve.values[bi] == 0.0)
    assert np.all(curve.exact[bi])


def test_estimate_curve_validation():
    with pytest.raises(ParameterError):
        estimate_curve(DIRAC, PATH_MODEL, 0.0, [0.5], [4.0], replicates=1, seed=1)
    with pytest.raises(ParameterError):
        estimate_curve(DIRAC, PATH_MODEL, 0.0, [], [4.0], replicates=4, seed=1)
    with pytest.raises(ParameterError):
        estimate_curve(DIRAC, PATH_MODEL, 0.0, [1.5], [4.0], replicates=4, seed=1)


def test_curve_csv_rows_cover_grid():
    curve = _tiny_curve()
    rows = list(curve.csv_rows())
    assert len(rows) == 3 * 2 * 4
    assert rows[0][0] == PATH_MODEL


def test_exact_mode_propagates_size_errors():
    from glab.errors import SizeError

    with pytest.raises(SizeError):
        estimate_curve(
            DIRAC, PATH_MODEL, 0.0, [0.0], [10.0], replicates=2, seed=1, mode="exact"
        )


def test_stretch_bound_via_public_transform():
    from glab.geometry import Path, path_length
    from glab.point_process import transform_stretch
    from glab.verification import random_feasible_paths

    for beta, ell, pts in random_feasible_paths(2, 50, 123):
        stretched = transform_stretch(Path(pts), beta)
        assert path_length(stretched) <= ell * g_function(beta, 2) + 1e-9


# ---------------------------------------------------------------------------
# shape checks on synthetic curves
# ---------------------------------------------------------------------------


def _synthetic_curve(means, betas=None, dim=2):
    betas = betas or [0.0, 0.25, 0.5, 0.75, 1.0][: len(means)]
    values = np.repeat(np.asarray(means, float)[:, None, None], 2, axis=2)
    return CurveEstimate(
        model=PATH_MODEL,
        q=0.0,
        dim=dim,
        betas=tuple(betas),
        lengths=(10.0,),
        values=values,
        exact=np.ones_like(values, dtype=bool),
        seed=0,
    )


def test_shape_constant_curve_flags_strict_decrease_only():
    curve = _synthetic_curve([1.0, 1.0, 1.0, 1.0, 1.0])
    report = check_curve_shape(curve, k_sigma=2.0)
    assert report.monotone_ok  # equality is not a monotonicity violation
    assert report.concave_ok
    assert report.strict_decrease_flags  # no strict decrease above 1/sqrt(d)


def test_shape_affine_decreasing_curve_has_no_flags():
    curve = _synthetic_curve([1.0, 0.8, 0.6, 0.4, 0.2])
    report = check_curve_shape(curve, k_sigma=2.0)
    assert report.monotone_ok and report.concave_ok
    assert not report.strict_decrease_flags


def test_shape_detects_monotone_and_convex_violations():
    report = check_curve_shape(_synthetic_curve([1.0, 0.9, 1.4, 0.8, 0.2]), k_sigma=2.0)
    assert not report.monotone_ok
    report2 = check_curve_shape(_synthetic_curve([1.0, 0.2, 0.15, 0.1, 0.05]), k_sigma=2.0)
    assert not report2.concave_ok  # sharp kink sits far below the chord


def test_stretch_check_requires_base_point():
    curve = _synthetic_curve([1.0, 0.8], betas=[0.5, 0.9])
    with pytest.raises(ParameterError):
        stretching_bound_check(curve)


def test_stretch_check_passes_on_conforming_curve():
    curve = _synthetic_curve([1.0, 0.95, 0.9, 0.5, 0.0])
    report = stretching_bound_check(curve, k_sigma=3.0)
    assert report.passed
    betas = [row[0] for row in report.rows]
    assert all(b >= 1 / math.sqrt(2) - 1e-12 for b in betas)


# ---------------------------------------------------------------------------
# KS machinery and the scaling lemma
# ---------------------------------------------------------------------------


def test_ks_statistic_identical_samples_is_zero():
    rng = np.random.default_rng(3)
    a = rng.normal(size=300)
    assert ks_statistic(a, a.copy()) == 0.0
    b = rng.normal(loc=3.0, size=300)
    assert ks_statistic(a, b) > ks_critical(300, 300, 0.01)


def test_scaling_coupled_mapping_identity():
    q = Query(model=ANIMAL_RESTRICTED, x=np.zeros(2), y=np.array([0.3, 0.0]), budget=0.7)
    rep = scaling_test(DIRAC, 2.0, q, 200, 42, couple_seeds=True)
    assert rep.max_pair_gap == 0.0
    assert rep.statistic == 0.0
    rep_l1 = scaling_test(DIRAC, 1.0, q, 200, 42, couple_seeds=True)
    assert rep_l1.statistic == 0.0  # identical seeds, identical computation


def test_scaling_requires_enough_samples():
    q = Query(model=ANIMAL_RESTRICTED, x=np.zeros(2), y=None, budget=0.5)
    with pytest.raises(ParameterError):
        scaling_test(DIRAC, 2.0, q, 50, 1)


def test_scaling_uncoupled_passes_at_alpha():
    q = Query(model=PATH_MODEL, x=np.zeros(2), y=np.array([0.3, 0.0]), budget=0.7)
    rep = scaling_test(DIRAC, 2.0, q, 250, 7)
    assert rep.passed


# ---------------------------------------------------------------------------
# q scan
# ---------------------------------------------------------------------------


def test_q_scan_orders_and_identities():
    qs = [0.0, 0.5, 2.0, math.inf]
    rep = q_scan(DIRAC, 0.5, 1.2, qs, replicates=12, seed=21)
    assert rep.passed
    assert not rep.monotone_violations
    # infinite-penalty column is exact, and means are ordered
    assert rep.exact_columns[-1]
    assert rep.mean_high[0] + 1e-9 >= rep.mean_high[-1]
    assert rep.mean_low[0] + 1e-9 >= rep.mean_low[-1]


def test_q_scan_requires_sorted_grid():
    with pytest.raises(ParameterError):
        q_scan(DIRAC, 0.5, 1.0, [1.0, 0.5], replicates=4, seed=1)


# ---------------------------------------------------------------------------
# universal bound
# ---------------------------------------------------------------------------


def test_universal_bound_tiny_rate_ratios_near_zero():
    tiny = IntensityDescriptor.dirac_kind(1.0, 1e-3, 2)
    rep = universal_bound_check(tiny, [4.0, 8.0], replicates=6, seed=2)
    assert max(rep.means) < 0.2
    assert rep.trend_ok
    assert rep.moment_integral == pytest.approx(1e-3 ** 0.5, abs=1e-12)


def test_universal_bound_pilot_has_no_growth_trend():
    rep = universal_bound_check(DIRAC, [10.0, 20.0, 30.0], replicates=6, seed=31, effort=60)
    assert rep.trend_ok
    assert rep.moment_integral == 1.0


def test_segment_window_covers_neighborhood():
    win = segment_window(np.zeros(2), np.array([3.0, 0.0]), 5.0, 2)
    assert np.allclose(win, [[-5.0, 8.0], [-5.0, 5.0]])
