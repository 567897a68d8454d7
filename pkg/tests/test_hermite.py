"""
Tests for Hermite functions, quadrature rules and kernels.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from hermite_nc.errors import InputError
from hermite_nc.hermite import (
    cell_integrals,
    compensated_phi_table,
    diagonal_kernel,
    eval_phi_1d,
    eval_phi_multi,
    export_basis_csv,
    gauss_hermite_grid,
    gauss_hermite_rule,
    gauss_legendre,
    inner_product,
    make_basis,
    phi_derivative_table,
    phi_table,
    uniform_grid,
)

pytestmark = pytest.mark.unit


def _hermite_poly(n: int, x: Fraction) -> Fraction:
    """Physicists' Hermite polynomial in exact rational arithmetic."""
    prev, cur = Fraction(0), Fraction(1)
    for k in range(n):
        prev, cur = cur, 2 * x * cur - 2 * k * prev
    return cur


def test_phi_matches_rational_oracle():
    """phi_n(1/2) agrees with H_n(1/2) e^{-1/8} / sqrt(2^n n! sqrt(pi))."""
    x = Fraction(1, 2)
    tab = phi_table([0.5], 14)[:, 0]
    for n in range(15):
        expected = float(_hermite_poly(n, x)) * math.exp(-0.125) / math.sqrt(2 ** n * math.factorial(n) * math.sqrt(math.pi))
        assert tab[n] == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_orthonormality_65_nodes():
    """The 65-node rule reproduces <phi_i, phi_j> = delta_ij for i, j <= 64."""
    grid = gauss_hermite_grid(65, 1)
    tab = phi_table(grid.axis_nodes[0], 64)
    gram = (tab * grid.weights) @ tab.T
    assert np.max(np.abs(gram - np.eye(65))) <= 1e-10


def test_gauss_hermite_moments():
    """Weights integrate 1 and x^4 against e^{-x^2}."""
    x, w = gauss_hermite_rule(20)
    assert np.sum(w) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert np.sum(w * x ** 4) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-12)
    assert np.all(np.diff(x) > 0)


def test_large_argument_stays_finite():
    """High degrees far out neither overflow nor produce NaN."""
    tab = phi_table([40.0, -35.0], 400)
    assert np.all(np.isfinite(tab))
    assert np.max(np.abs(tab)) <= 1.0


def test_invalid_inputs():
    """Bad rule sizes and non-finite points are input errors."""
    with pytest.raises(InputError):
        gauss_hermite_rule(0)
    with pytest.raises(InputError):
        phi_table([float("nan")], 3)
    with pytest.raises(InputError):
        phi_table([0.0], -1)


def test_cell_integrals_match_quadrature():
    """Exact interval integrals agree with Gauss-Legendre quadrature."""
    edges = np.array([-1.0, 0.5, 2.0])
    exact = cell_integrals(edges, 10)
    for c in range(2):
        x, w = gauss_legendre(edges[c], edges[c + 1], 60)
        approx = phi_table(x, 10) @ w
        assert np.allclose(exact[:, c], approx, atol=1e-12)


def test_derivative_table_finite_difference():
    """phi_n' from the ladder identity matches a central difference."""
    x = np.array([-0.7, 0.2, 1.3])
    h = 1e-5
    fd = (phi_table(x + h, 6) - phi_table(x - h, 6)) / (2 * h)
    assert np.allclose(phi_derivative_table(x, 6), fd, atol=1e-8)


def test_diagonal_kernel_two_dimensions():
    """The level-weighted kernel equals the direct sum over multi-indices."""
    levels = np.array([1.0, 0.5, 0.25])
    x = (0.3, -0.2)
    y = (0.1, 0.4)
    direct = 0.0
    for a in range(3):
        for b in range(3 - a):
            direct += levels[a + b] * eval_phi_multi((a, b), x) * eval_phi_multi((a, b), y)
    assert diagonal_kernel(levels, x, [y])[0] == pytest.approx(direct, rel=1e-12)


def test_basis_and_uniform_grid():
    """make_basis tabulates on its own nodes; uniform grids carry Lebesgue weights."""
    basis = make_basis(5)
    assert basis.phi_table.shape == (6, 6)
    grid = uniform_grid((0.0,), 2.0, 8)
    assert np.sum(grid.weights) == pytest.approx(2.0)


def test_compensated_table_matches_scaled_phi():
    """phi_n(x) e^{x^2/2} at moderate x."""
    x = np.array([-1.5, 0.0, 0.7, 2.0])
    expected = phi_table(x, 12) * np.exp(0.5 * x * x)[None, :]
    assert np.allclose(compensated_phi_table(x, 12), expected, rtol=1e-12, atol=0)


def test_inner_product_scalar_and_matrix():
    """Quadrature inner products of Hermite functions and matrix samples."""
    grid = gauss_hermite_grid(30, 1)
    tab = phi_table(grid.axis_nodes[0], 3)
    assert inner_product(tab[2], tab[2], grid) == pytest.approx(1.0, abs=1e-12)
    assert inner_product(tab[1], tab[3], grid) == pytest.approx(0.0, abs=1e-12)
    mats = tab[0][:, None, None] * np.array([[1.0, 2.0], [0.0, 1.0]])[None]
    prod = inner_product(mats, mats, grid)
    assert np.allclose(prod, [[1.0, 4.0], [0.0, 1.0]], atol=1e-12)
    with pytest.raises(InputError):
        inner_product(tab[0][:5], tab[0], grid)


def test_export_basis_csv(tmp_path):
    """One row per (level, node) with the documented columns."""
    basis = make_basis(3, 5)
    path = tmp_path / "basis.csv"
    export_basis_csv(basis, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,node_index,node,weight,phi"
    assert len(lines) == 1 + 4 * 5


def test_eval_phi_1d_matches_table():
    """Single-point evaluation agrees with the table and rejects non-finite x."""
    assert np.allclose(eval_phi_1d(0.8, 10), phi_table([0.8], 10)[:, 0], rtol=1e-14, atol=0)
    with pytest.raises(InputError):
        eval_phi_1d(math.nan, 4)
