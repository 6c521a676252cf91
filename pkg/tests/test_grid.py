import math

import numpy as np
import pytest

from qelab.billiard import MushroomParams, area
from qelab.grid import (
    ResolutionError,
    cluster_fraction,
    eigenvalue_branches,
    lowest_eigenvalues,
    rasterize,
    rasterize_region,
    weyl_deficit,
)
from qelab.special import bessel_zero

P = MushroomParams(1.0, 2.0, 1.0)


def unit_square(h):
    return rasterize_region(lambda x, y: (x > 0) & (x < 1) & (y > 0) & (y < 1), (0, 1, 0, 1), h)


def test_raster_area():
    gaps = []
    for h in (0.04, 0.02, 0.01):
        d = rasterize(P, h)
        gaps.append(abs(d.area - area(P)) / area(P))
    assert gaps[-1] < 0.01
    assert 1.6 < gaps[0] / gaps[1] < 2.4 and 1.6 < gaps[1] / gaps[2] < 2.4


def test_raster_points_strictly_inside():
    d = rasterize(P, 0.05)
    x, y = d.coordinates()
    inside = np.where(y > 0, x * x + y * y < 4, (np.abs(x) < 1) & (y > -1))
    assert inside.all()
    # the stalk is grid aligned: its walls fall on node lines
    assert np.any(np.isclose(d.xs, -1.0)) and np.any(np.isclose(d.ys, -1.0))


def test_coarse_resolution_rejected():
    with pytest.raises(ResolutionError):
        rasterize(P, 0.2)


def test_unit_square_spectrum():
    s = lowest_eigenvalues(unit_square(0.005), 20)
    m, n = np.meshgrid(np.arange(1, 8), np.arange(1, 8))
    exact = np.sort((math.pi ** 2 * (m ** 2 + n ** 2)).ravel())[:20]
    assert np.allclose(s.eigenvalues, exact, rtol=0.01)
    assert np.all(s.residual_bounds < 1e-8)


def test_square_matches_discrete_formula_and_order_two():
    errs = []
    for h in (0.05, 0.025):
        s = lowest_eigenvalues(unit_square(h), 6)
        N = round(1 / h)
        m, n = np.meshgrid(np.arange(1, N), np.arange(1, N))
        disc = np.sort((4 / h ** 2 * (np.sin(m * math.pi * h / 2) ** 2 + np.sin(n * math.pi * h / 2) ** 2)).ravel())[:6]
        assert np.allclose(s.eigenvalues, disc, rtol=1e-10)
        errs.append(abs(s.eigenvalues[0] - 2 * math.pi ** 2))
    assert 3.6 < errs[0] / errs[1] < 4.4


def test_unit_disk_first_eigenvalue():
    d = rasterize_region(lambda x, y: x * x + y * y < 1, (-1, 1, -1, 1), 0.01)
    s = lowest_eigenvalues(d, 3)
    j01 = bessel_zero(0, 1).alpha
    assert s.eigenvalues[0] == pytest.approx(j01 ** 2, rel=0.02)


def test_eigenvalues_positive_increasing_and_deterministic():
    d = rasterize(P, 0.04)
    a = lowest_eigenvalues(d, 30, seed=1)
    b = lowest_eigenvalues(d, 30, seed=1)
    assert np.all(a.eigenvalues > 0) and np.all(np.diff(a.eigenvalues) >= 0)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    with pytest.raises(ValueError):
        lowest_eigenvalues(d, d.n_unknowns // 5)


def test_weyl_small_lambda_and_precondition():
    d = rasterize(P, 0.02)
    s = lowest_eigenvalues(d, 200)
    assert weyl_deficit(s, P, 1.0).N_count == 0
    with pytest.raises(ValueError):
        weyl_deficit(s, P, 20.0)  # lambda h = 0.4 outside the trusted range
    w10 = weyl_deficit(s, P, 10.0)
    assert w10.weyl_main == pytest.approx(100 * area(P) / (4 * math.pi))
    # Dirichlet boundary pushes the count below the main term
    assert -0.3 < w10.relative_gap < 0


def test_weyl_needs_enough_eigenvalues():
    d = rasterize(P, 0.02)
    s = lowest_eigenvalues(d, 20)
    with pytest.raises(ValueError):
        weyl_deficit(s, P, 14.0)


def test_branches_monotone_and_speed_bounded():
    ps = [MushroomParams(1.0, 2.0, t) for t in (0.5, 0.75, 1.0)]
    tab = eigenvalue_branches(ps, 40, h_grid=0.05)
    assert np.all(np.diff(tab.areas) > 0)
    assert tab.monotone.all()
    lo = -tab.speed_constants[:, None] * tab.eigenvalues[:-1]
    assert np.all(tab.slopes >= lo - 1e-9) and np.all(tab.slopes <= 1e-6)


def test_branch_grid_rejects_mixed_radii():
    with pytest.raises(ValueError):
        eigenvalue_branches([MushroomParams(1, 2, 1), MushroomParams(1, 2.5, 1.5)], 5, h_grid=0.05)


def test_cluster_fraction_in_unit_interval():
    s = lowest_eigenvalues(rasterize(P, 0.04), 60)
    f = cluster_fraction(s, P, eps=0.1, c=0.5)
    assert 0 <= f.fraction <= 1
    assert f.n_eigenvalues == 60
