"""
Tests for the Hermite heat semigroup, the Mehler kernel and Littlewood-Paley functions.
"""
import math

import numpy as np
import pytest

from hermite_nc.errors import InputError
from hermite_nc.experiments import spectral_mehler
from hermite_nc.nc import nc_lp_norm
from hermite_nc.semigroup import (
    dt_semigroup_apply,
    ep_norm,
    g_function,
    g_k_function,
    gk_chain_report,
    mehler_dt_kernel,
    mehler_kernel,
    semigroup_apply,
    semigroup_continuity_curve,
    time_grid,
    truncation_defect,
)

pytestmark = pytest.mark.unit


def test_time_grid_endpoints():
    """Default grid spans [1e-3, 12] with 96 points."""
    tg = time_grid()
    assert tg.times.size == 96
    assert tg.times[0] == pytest.approx(1e-3)
    assert tg.times[-1] == pytest.approx(12.0)


def test_time_grid_extends_for_fast_levels():
    """A large n_max pulls the lower end down."""
    tg = time_grid(n_max=1000)
    assert tg.times[0] == pytest.approx(3e-5)
    assert tg.times.size > 96


def test_time_grid_rejects_bad_ranges():
    """Too few points or an empty range is refused."""
    with pytest.raises(InputError):
        time_grid(points=8)
    with pytest.raises(InputError):
        time_grid(t_min=2.0, t_max=1.0)


@pytest.mark.parametrize("N", [1.0, 10.0])
def test_time_weights_integrate_exponentials(N):
    """int_0^inf N^2 t e^{-2Nt} dt = 1/4 on the default grid."""
    assert truncation_defect(time_grid(), N) <= 1e-4


@pytest.mark.parametrize("t,x,y", [(0.1, 0.0, 0.5), (0.5, -1.0, 0.25), (1.0, 0.5, 1.5)])
def test_mehler_matches_spectral_sum(t, x, y):
    """The closed-form kernel equals the eigenfunction expansion."""
    s, _ = spectral_mehler(t, x, y)
    assert mehler_kernel(t, [x], [y]) == pytest.approx(s, rel=1e-6)


def test_mehler_symmetry():
    """k_t(x, y) = k_t(y, x) in two dimensions."""
    x, y = [0.3, -1.2], [1.0, 0.4]
    assert mehler_kernel(0.7, x, y) == pytest.approx(mehler_kernel(0.7, y, x), rel=1e-14)


def test_mehler_time_derivative():
    """The analytic time derivative agrees with a central difference."""
    t, h = 0.4, 1e-5
    fd = (mehler_kernel(t + h, [0.2], [0.9]) - mehler_kernel(t - h, [0.2], [0.9])) / (2 * h)
    assert mehler_dt_kernel(t, [0.2], [0.9]) == pytest.approx(fd, rel=1e-6)


def test_mehler_rejects_nonpositive_time():
    """t must be positive."""
    with pytest.raises(InputError):
        mehler_kernel(0.0, [0.0], [0.0])


def test_semigroup_law(band_limited):
    """H^s H^t = H^{s+t}."""
    lhs = semigroup_apply(semigroup_apply(band_limited, 0.2), 0.3)
    rhs = semigroup_apply(band_limited, 0.5)
    assert nc_lp_norm(lhs - rhs, 2.0) <= 1e-10 * nc_lp_norm(band_limited, 2.0)


def test_kernel_mode_matches_spectral(band_limited):
    """Mehler quadrature agrees with the coefficient multiplier for a resolved field."""
    k = semigroup_apply(band_limited, 0.5, "kernel", 8)
    s = semigroup_apply(band_limited, 0.5, "spectral", 8)
    assert nc_lp_norm(k - s, 2.0) <= 1e-6 * nc_lp_norm(band_limited, 2.0)
    kd = dt_semigroup_apply(band_limited, 0.5, "kernel", 8)
    sd = dt_semigroup_apply(band_limited, 0.5, "spectral", 8)
    assert nc_lp_norm(kd - sd, 2.0) <= 1e-6 * nc_lp_norm(sd, 2.0)


def test_unknown_mode(band_limited):
    """Only spectral and kernel modes exist."""
    with pytest.raises(InputError):
        semigroup_apply(band_limited, 0.5, "fourier")


def test_contraction(band_limited):
    """||H^t f||_2 <= e^{-dt} ||f||_2."""
    for t in (0.1, 1.0):
        assert nc_lp_norm(semigroup_apply(band_limited, t), 2.0) <= math.exp(-t) * nc_lp_norm(band_limited, 2.0) * (1 + 1e-10)


def test_continuity_curve_decreases(band_limited):
    """||H^t f - f|| shrinks as t -> 0."""
    curve = semigroup_continuity_curve(band_limited, [1.0, 0.1, 0.01, 0.001])
    assert all(a > b for a, b in zip(curve, curve[1:]))


def test_g_function_l2_identity(band_limited):
    """||g(f)||_2 = ||f||_2 / 2."""
    ratio = nc_lp_norm(g_function(band_limited), 2.0) / nc_lp_norm(band_limited, 2.0)
    assert ratio == pytest.approx(0.5, abs=1e-3)


def test_g_function_is_psd(band_limited):
    """g(f) is a pointwise PSD field."""
    g = g_function(band_limited)
    assert g.positive
    assert np.min(np.linalg.eigvalsh(g.samples)) >= -1e-10 * np.max(np.abs(g.samples))


def test_g_chain_report(band_limited):
    """g_1 is dominated by g_2 with a finite constant and a clean residual."""
    report = gk_chain_report(band_limited, 1)
    assert math.isfinite(report.fitted_constant)
    assert report.extra["min_relative_residual"] >= -1e-9


def test_ep_norm_sides(band_limited):
    """sum <= column, row <= intersection."""
    col = ep_norm(band_limited, 2.0, "column")
    row = ep_norm(band_limited, 2.0, "row")
    assert ep_norm(band_limited, 2.0, "sum") == pytest.approx(min(col, row))
    assert ep_norm(band_limited, 2.0, "intersection") == pytest.approx(max(col, row))
    assert ep_norm(band_limited, 2.0, "mixed") == pytest.approx(max(col, row))


def test_ep_norm_errors(band_limited):
    """p < 1 and unknown sides are refused."""
    with pytest.raises(InputError):
        ep_norm(band_limited, 0.5)
    with pytest.raises(InputError):
        ep_norm(band_limited, 2.0, "diagonal")


def test_g_k_function(band_limited):
    """g_2 is PSD with ||g_2(f)||_2^2 = (2k-1)!/2^{2k} ||f||_2^2 at k = 2."""
    g2 = g_k_function(band_limited, 2)
    ratio = nc_lp_norm(g2, 2.0) / nc_lp_norm(band_limited, 2.0)
    assert ratio == pytest.approx(math.sqrt(6.0 / 16.0), abs=1e-3)
    with pytest.raises(InputError):
        g_k_function(band_limited, 0)
