"""
expansion.py
Fourier-Hermite analysis and synthesis of matrix fields, Hermite projections
and level multipliers f -> sum_n m(2n + d) P_n f.

Gauss-Hermite grids are analyzed by quadrature (exact for band-limited data
once every axis has degree_cap + 1 nodes). Uniform grids are treated as
piecewise constant on their cells and analyzed with exact cell integrals.
"""

from __future__ import annotations
from typing import Callable, List, Optional

import numpy as np

from .errors import InputError
from .hermite import cell_edges, cell_integrals, phi_table
from .types import MatrixField, QuadratureGrid, SpectralCoeffs


def _analysis_tables(grid: QuadratureGrid, degree_cap: int) -> List[np.ndarray]:
    tables = []
    for a, (x, w) in enumerate(zip(grid.axis_nodes, grid.axis_weights)):
        if grid.kind == "uniform":
            tables.append(cell_integrals(cell_edges(grid, a), degree_cap))
        else:
            tables.append(phi_table(x, degree_cap) * w[None, :])
    return tables


def _contract(arr: np.ndarray, tables: List[np.ndarray]) -> np.ndarray:
    """Apply tables[a] (out, in) along index axis a of arr."""
    for a, tab in enumerate(tables):
        arr = np.moveaxis(arr, a, 0)
        arr = np.tensordot(tab, arr, axes=(1, 0))
        arr = np.moveaxis(arr, 0, a)
    return arr


def default_cap(grid: QuadratureGrid) -> int:
    return min(grid.shape) - 1


def analyze(f: MatrixField, degree_cap: Optional[int] = None) -> SpectralCoeffs:
    grid = f.grid
    cap = default_cap(grid) if degree_cap is None else int(degree_cap)
    if cap < 0:
        raise InputError("degree_cap must be >= 0")
    if grid.kind == "gauss-hermite" and min(grid.shape) < cap + 1:
        raise InputError(
            f"analysis to degree {cap} needs at least {cap + 1} nodes per axis, grid has {min(grid.shape)}"
        )
    values = _contract(f.tensor_view(), _analysis_tables(grid, cap))
    return SpectralCoeffs(grid.d, cap, values)


def synthesize(c: SpectralCoeffs, grid: QuadratureGrid) -> MatrixField:
    if grid.d != c.d:
        raise InputError(f"coefficients of dimension {c.d} synthesized on a {grid.d}-d grid")
    tables = [phi_table(x, c.degree_cap).T for x in grid.axis_nodes]
    arr = _contract(c.values, tables)
    n = c.matrix_size
    return MatrixField(grid, arr.reshape(grid.size, n, n))


def coeff_norm2(c: SpectralCoeffs) -> float:
    """sum_nu ||c(nu)||_2^2 with the Hilbert-Schmidt norm."""
    return float(np.sum(np.abs(c.values) ** 2))


def level_values(c: SpectralCoeffs, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """fn evaluated at N = 2n + d for n = 0..degree_cap."""
    N = 2 * np.arange(c.degree_cap + 1) + c.d
    return np.asarray(fn(N.astype(float)))


def multiply_levels(c: SpectralCoeffs, fn: Callable[[np.ndarray], np.ndarray]) -> SpectralCoeffs:
    return c.scaled_by_level(level_values(c, fn))


def apply_level_multiplier(
    f: MatrixField, fn: Callable[[np.ndarray], np.ndarray], degree_cap: Optional[int] = None
) -> MatrixField:
    c = analyze(f, degree_cap)
    return synthesize(multiply_levels(c, fn), f.grid)


def project(f: MatrixField, n: int, degree_cap: Optional[int] = None) -> MatrixField:
    c = analyze(f, degree_cap)
    if n < 0 or n > c.degree_cap:
        raise InputError(f"projection level {n} outside 0..{c.degree_cap}")
    mask = np.zeros(c.degree_cap + 1)
    mask[n] = 1.0
    return synthesize(c.scaled_by_level(mask), f.grid)


def random_coeffs(
    rng: np.random.Generator, d: int, degree_cap: int, matrix_size: int, hermitian: bool = False
) -> SpectralCoeffs:
    shape = (degree_cap + 1,) * d + (matrix_size, matrix_size)
    vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if hermitian:
        vals = 0.5 * (vals + np.conj(np.swapaxes(vals, -1, -2)))
    return SpectralCoeffs(d, degree_cap, vals)


def random_band_limited(
    rng: np.random.Generator,
    grid: QuadratureGrid,
    degree_cap: int,
    matrix_size: int,
    hermitian: bool = False,
) -> MatrixField:
    """Random field in the span of Phi_nu, |nu| <= degree_cap."""
    f = synthesize(random_coeffs(rng, grid.d, degree_cap, matrix_size, hermitian), grid)
    return MatrixField(grid, f.samples, hermitian=hermitian)


def level_energies(c: SpectralCoeffs) -> np.ndarray:
    """sum over |nu| = n of ||c(nu)||_2^2, for n = 0..degree_cap."""
    lv = c.level_grid().ravel()
    e = np.sum(np.abs(c.values) ** 2, axis=(-2, -1)).ravel()
    keep = lv <= c.degree_cap
    return np.bincount(lv[keep], weights=e[keep], minlength=c.degree_cap + 1)


def evaluate_at(c: SpectralCoeffs, points) -> np.ndarray:
    """sum_nu c(nu) Phi_nu(x) at arbitrary points (rows of a (M, d) array)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != c.d:
        raise InputError(f"points of dimension {pts.shape[1]} for d={c.d}")
    tabs = [phi_table(pts[:, a], c.degree_cap) for a in range(c.d)]
    if c.d == 1:
        return np.einsum("km,kij->mij", tabs[0], c.values)
    z = np.einsum("...kij,km->...mij", c.values, tabs[-1])
    for tab in reversed(tabs[:-1]):
        z = np.einsum("...kmij,km->...mij", z, tab)
    return z
