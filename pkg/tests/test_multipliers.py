"""
Tests for the multiplier catalogue, the Marcinkiewicz probe and the multiplier kernels.
"""
import math

import numpy as np
import pytest

from hermite_nc.errors import InputError
from hermite_nc.expansion import random_band_limited
from hermite_nc.hermite import gauss_hermite_grid
from hermite_nc.multipliers import (
    M_kernel_report,
    apply_oscillating,
    apply_Tmu,
    constant,
    domination_check,
    finite_difference,
    inverse_power,
    lp_ratio_sweep,
    marcinkiewicz_report,
    parity,
    parse_multiplier,
    table,
    truncation_time,
    unimodular_power,
)
from hermite_nc.nc import nc_lp_norm
from hermite_nc.types import OscillatingParams
from hermite_nc.util import rng_for

pytestmark = pytest.mark.unit


def test_parse_single_multiplier():
    """'name key=value' builds the catalogue entry."""
    mu = parse_multiplier("inverse_power alpha=2")
    assert np.allclose(mu([1.0, 2.0, 4.0]), [1.0, 0.25, 0.0625])


def test_parse_composition():
    """Terms joined by '*' multiply pointwise."""
    mu = parse_multiplier("heat t=0.5 * parity")
    assert mu([3.0])[0] == pytest.approx(-math.exp(-1.5))
    assert mu([4.0])[0] == pytest.approx(math.exp(-2.0))
    assert "parity" in mu.tag


@pytest.mark.parametrize("text", ["", "bogus", "heat t", "heat t=abc", "heat q=1"])
def test_parse_errors(text):
    """Malformed descriptions are refused."""
    with pytest.raises(InputError):
        parse_multiplier(text)


def test_non_finite_values_rejected():
    """N^{-alpha} at N = 0 is not a valid level value."""
    with pytest.raises(InputError):
        inverse_power(1.0)([0.0])


def test_table_multiplier(tmp_path):
    """Explicit CSV values are looked up by N."""
    path = tmp_path / "mu.csv"
    path.write_text("N,re,im\n1,1.0,0.0\n3,0.5,-0.5\n")
    mu = parse_multiplier(f"table path={path}")
    assert np.allclose(mu([1, 3]), [1.0, 0.5 - 0.5j])
    with pytest.raises(InputError):
        mu([2])
    with pytest.raises(InputError):
        table(str(tmp_path / "missing.csv"))


def test_finite_difference():
    """delta^1 of 1/N is -1/(N(N+1)); delta^0 is the identity."""
    N = np.array([1.0, 2.0, 5.0])
    assert np.allclose(finite_difference(inverse_power(1.0), 1, N), -1.0 / (N * (N + 1)))
    assert np.allclose(finite_difference(inverse_power(1.0), 0, N), 1.0 / N)
    with pytest.raises(InputError):
        finite_difference(inverse_power(1.0), -1, N)


@pytest.mark.parametrize("mu", [constant(1.0), unimodular_power(1.0)])
def test_marcinkiewicz_accepts_smooth_multipliers(mu):
    """Smooth symbols keep C_r bounded as N_max grows."""
    report = marcinkiewicz_report(mu, 2, 4096)
    assert report.passed
    assert report.stability <= 2.0


def test_marcinkiewicz_rejects_parity():
    """(-1)^N has |delta mu(N)| N = 2N."""
    report = marcinkiewicz_report(parity(), 2, 4096)
    assert not report.passed
    assert report.extra["C_r"]["1"][-1] == pytest.approx(2.0 * 4096)


def test_marcinkiewicz_preconditions():
    """n >= 1 and N_max >= 4."""
    with pytest.raises(InputError):
        marcinkiewicz_report(constant(), 0, 64)
    with pytest.raises(InputError):
        marcinkiewicz_report(constant(), 1, 2)


def test_composition_of_operators(band_limited):
    """T_{mu nu} = T_mu T_nu."""
    mu, nu = unimodular_power(1.0), inverse_power(0.5)
    lhs = apply_Tmu(band_limited, mu * nu)
    rhs = apply_Tmu(apply_Tmu(band_limited, nu), mu)
    assert np.allclose(lhs.samples, rhs.samples, atol=1e-12)


def test_oscillating_isometry_at_alpha_zero(band_limited):
    """e^{iNt} preserves the L_2 norm."""
    out = apply_oscillating(band_limited, OscillatingParams(0.5, alpha=0.0))
    assert nc_lp_norm(out, 2.0) == pytest.approx(nc_lp_norm(band_limited, 2.0), rel=1e-10)


def test_truncation_time():
    """e^{-12} damping at the top level."""
    assert truncation_time(256, 1) == pytest.approx(12.0 / 513)


def test_m_kernel_report_is_finite():
    """Both M-kernel fits are finite for a bounded symbol."""
    lattice = {"t_values": [0.5, 1.0], "x_values": [0.0, 0.5], "y_values": [0.0, 1.0]}
    report = M_kernel_report(unimodular_power(1.0), 1, lattice, degree_cap=64)
    assert math.isfinite(report.fitted_constant)
    assert set(report.slice_constants) == {"sup", "moment"}


def test_m_kernel_report_checks_marcinkiewicz_precondition():
    """A symbol failing the Marcinkiewicz condition gets an optional, failed kernel report."""
    lattice = {"t_values": [0.5, 1.0], "x_values": [0.0, 0.5], "y_values": [0.0, 1.0]}
    report = M_kernel_report(parity(), 1, lattice, degree_cap=64)
    assert report.extra["precondition"]["passed"] is False
    assert report.required is False
    assert report.passed is False
    good = M_kernel_report(unimodular_power(1.0), 1, lattice, degree_cap=64)
    assert good.extra["precondition"]["passed"] is True
    assert good.required is True


def test_m_kernel_excludes_small_times():
    """Times below the truncation time leave nothing to probe."""
    lattice = {"t_values": [1e-4], "x_values": [0.0], "y_values": [0.0]}
    with pytest.raises(InputError):
        M_kernel_report(unimodular_power(1.0), 1, lattice, degree_cap=32)


def test_domination_needs_large_k():
    """k > d/2 is required."""
    f = random_band_limited(rng_for(2), gauss_hermite_grid(6, 2), 2, 1)
    with pytest.raises(InputError):
        domination_check(f, unimodular_power(1.0), 1)


def test_domination_report():
    """g_2(T_mu f) is dominated by g*_1(f) with a clean PSD residual."""
    f = random_band_limited(rng_for(3), gauss_hermite_grid(12, 1), 4, 2)
    report = domination_check(f, unimodular_power(1.0), 1)
    assert math.isfinite(report.fitted_constant)
    assert report.extra["min_relative_residual"] >= -1e-9


def test_lp_ratio_of_unimodular_symbol_at_p2():
    """A unimodular symbol is an L_2 isometry on band-limited fields."""
    report = lp_ratio_sweep(unimodular_power(1.0), 2.0, [4, 8], samples=3)
    assert report.fitted_constant == pytest.approx(1.0, rel=1e-8)
    assert set(report.extra["interval"]) == {"4", "8"}
