"""
Tests for Bochner-Riesz means, their kernels and the pointwise sandwiches.
"""
import math

import numpy as np
import pytest

from hermite_nc.errors import InputError
from hermite_nc.hermite import gauss_hermite_grid
from hermite_nc.riesz import (
    ball_volume,
    kernel_decay_report,
    order_lift_residual,
    riesz_apply,
    riesz_convergence_curve,
    riesz_kernel,
    riesz_multiplier,
    sandwich_check,
    scale_function_G,
    top_level,
)
from hermite_nc.types import MatrixField, RieszParams
from hermite_nc.util import log_spaced

pytestmark = pytest.mark.unit


def _gaussian_psd(m=24):
    grid = gauss_hermite_grid(m, 1)
    prof = np.exp(-0.5 * grid.points[:, 0] ** 2)
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    return MatrixField(grid, prof[:, None, None] * a[None], hermitian=True, positive=True)


def test_multiplier_values():
    """(1 - N/R)_+^alpha vanishes from N = R on."""
    vals = riesz_multiplier([1, 2, 3, 4, 5], 4.0, 1.0)
    assert np.allclose(vals, [0.75, 0.5, 0.25, 0.0, 0.0])
    assert top_level(4.0, 1) == 1
    assert top_level(1.0, 1) == -1


def test_complex_order_has_unit_phase_growth():
    """Imaginary orders only rotate the phase."""
    vals = riesz_multiplier([1.0, 2.0], 4.0, 1.0 + 2.0j)
    assert np.allclose(np.abs(vals), riesz_multiplier([1.0, 2.0], 4.0, 1.0))


def test_params_validation():
    """R > 0 and Re(alpha) > 0 are enforced."""
    with pytest.raises(InputError):
        RieszParams(0.0, 1.0)
    with pytest.raises(InputError):
        RieszParams(4.0, -0.5)


def test_small_radius_kills_everything(band_limited):
    """R <= d leaves no level."""
    out = riesz_apply(band_limited, RieszParams(1.0, 1.0, 1))
    assert np.allclose(out.samples, 0.0)
    assert riesz_kernel([0.0], [0.0], RieszParams(1.0, 1.0, 1)) == 0.0


@pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (0.5, 2.0)])
def test_order_lift(band_limited, alpha, beta):
    """S_R^{alpha+beta} is recovered from the order-alpha means."""
    assert order_lift_residual(band_limited, 16.0, alpha, beta, 64) <= 1e-6


def test_order_lift_rejects_small_quadrature(band_limited):
    """Fewer than 8 quadrature points is refused."""
    with pytest.raises(InputError):
        order_lift_residual(band_limited, 16.0, 1.0, 1.0, 4)


def test_convergence_of_centered_gaussian():
    """For a ground-state field ||S_R f - f|| = ||f|| / R."""
    f = _gaussian_psd()
    radii = [4.0, 64.0, 4096.0]
    curve = riesz_convergence_curve(f, 1.0, radii, 2.0)
    assert curve[0] > curve[1] > curve[2]
    assert curve[-1] / curve[0] <= 1e-3
    assert curve[-1] * 4096.0 == pytest.approx(curve[0] * 4.0, rel=1e-8)


def test_convergence_of_shifted_gaussian():
    """An off-center bump spans many levels; the error still falls monotonically at rate 1/R."""
    grid = gauss_hermite_grid(40, 1)
    prof = np.exp(-0.5 * (grid.points[:, 0] - 0.7) ** 2)
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    f = MatrixField(grid, prof[:, None, None] * a[None], hermitian=True, positive=True)
    radii = [4.0 * 2 ** k for k in range(11)]
    curve = riesz_convergence_curve(f, 1.0, radii, 2.0)
    assert all(v < u for u, v in zip(curve, curve[1:]))
    ratio = curve[-1] / curve[0]
    assert 4.0 / 4096.0 < ratio <= 16.0 / 4096.0


def test_decay_report_is_finite():
    """The one-dimensional kernel envelope fit gives a finite constant."""
    lattice = {"radii": [16.0, 64.0], "xs": [0.0, 1.0], "ys": [-1.0, 0.5, 2.0]}
    report = kernel_decay_report(1.0, lattice)
    assert math.isfinite(report.fitted_constant)
    assert report.fitted_constant > 0
    assert len(report.samples) == 12


def test_decay_report_preconditions():
    """The 1-d envelope needs Re(alpha) > 1/6."""
    with pytest.raises(InputError):
        kernel_decay_report(0.1, {"radii": [4.0], "xs": [0.0], "ys": [0.0]})
    with pytest.raises(InputError):
        kernel_decay_report(1.0, {}, mode="bogus")


def test_scale_function_dyadic_invariance():
    """G(2t) - G(t) equals the two telescoped boundary terms."""
    alpha, d, k_range = 3.0, 2, 40

    def term(s):
        return s ** (d / 2.0) * (1.0 + s) ** (-alpha - 0.5)

    for t in log_spaced(0.01, 100.0, 7):
        g1 = scale_function_G(t, alpha, d, k_range)
        g2 = scale_function_G(2 * t, alpha, d, k_range)
        boundary = term(math.ldexp(t, k_range + 1)) - term(math.ldexp(t, -k_range))
        assert abs(g2 - g1 - boundary) <= 1e-12 * g1


def test_scale_function_rejects_divergent_order():
    """alpha <= (d-1)/2 diverges."""
    with pytest.raises(InputError):
        scale_function_G(1.0, 0.5, 2)


def test_ball_volume():
    """Unit ball volumes in dimensions 1 to 3."""
    assert ball_volume(1, 1.0) == pytest.approx(2.0)
    assert ball_volume(2, 1.0) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(32.0 * math.pi / 3.0)


def test_sandwich_residual():
    """The fitted sandwich holds in PSD order up to rounding."""
    report = sandwich_check(_gaussian_psd(), RieszParams(16.0, 1.0, 1), mode="d1")
    assert math.isfinite(report.fitted_constant)
    assert report.extra["min_relative_residual"] >= -1e-9


def test_sandwich_needs_psd_field(band_limited):
    """Non-PSD input is refused."""
    with pytest.raises(InputError):
        sandwich_check(band_limited, RieszParams(16.0, 1.0, 1))
