"""
Tests for noncommutative norms, PSD ordering, atoms and field containers.
"""
import math

import numpy as np
import pytest

from hermite_nc.errors import InputError
from hermite_nc.expansion import random_band_limited
from hermite_nc.hermite import gauss_hermite_grid
from hermite_nc.nc import (
    bmo_norm,
    column_size,
    load_field,
    make_column_atom,
    matrix_abs,
    nc_lp_norm,
    op_cauchy_schwarz_residual,
    psd_leq,
    sandwich_constant,
    save_field,
    scale_atom,
    translate_atom,
    validate_atom,
    weak_lp_quasinorm,
)
from hermite_nc.types import MatrixField
from hermite_nc.util import rng_for

pytestmark = pytest.mark.unit


def _gaussian_identity(grid, n=2):
    prof = np.exp(-0.5 * grid.points[:, 0] ** 2)
    return MatrixField(grid, prof[:, None, None] * np.eye(n)[None], hermitian=True, positive=True)


def test_lp_norms_of_gaussian(grid_1d):
    """||e^{-x^2/2} I_2||_1 = 2 sqrt(2 pi) and the sup norm is 1."""
    f = _gaussian_identity(grid_1d)
    assert nc_lp_norm(f, 1.0) == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-8)
    assert nc_lp_norm(f, 2.0) == pytest.approx(math.sqrt(2 * math.sqrt(math.pi)), rel=1e-10)
    assert nc_lp_norm(f, math.inf) == pytest.approx(1.0, abs=5e-2)


def test_weak_norm_below_strong(band_limited):
    """The weak L_2 quasinorm never exceeds the L_2 norm."""
    assert weak_lp_quasinorm(band_limited, 2.0) <= nc_lp_norm(band_limited, 2.0) * (1 + 1e-12)


def test_norm_rejects_small_p(band_limited):
    """p < 1 is refused."""
    with pytest.raises(InputError):
        nc_lp_norm(band_limited, 0.5)


def test_matrix_abs_of_rotated_diagonal():
    """|U D| = |D| for unitary U."""
    theta = 0.3
    u = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    d = np.diag([2.0, -3.0])
    assert np.allclose(matrix_abs(u @ d), np.diag([2.0, 3.0]), atol=1e-12)


def test_psd_order():
    """A <= A + I but not the other way round."""
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert psd_leq(a, a + np.eye(2))
    assert not psd_leq(a + np.eye(2), a)


def test_sandwich_constant_of_scaled_dominant():
    """S = c D gives the sandwich constant |c|."""
    rng = rng_for(3)
    g = rng.standard_normal((5, 2, 2)) + 1j * rng.standard_normal((5, 2, 2))
    dom = g @ np.conj(np.swapaxes(g, 1, 2)) + 0.1 * np.eye(2)
    assert np.allclose(sandwich_constant(-0.5 * dom, dom), 0.5, rtol=1e-8)


def test_operator_cauchy_schwarz(grid_1d):
    """(int |phi|^2)(int f*f) - |int phi f|^2 stays PSD on random instances."""
    w = grid_1d.weights
    for i in range(20):
        rng = rng_for(4, i)
        phi = rng.standard_normal(grid_1d.size) + 1j * rng.standard_normal(grid_1d.size)
        f = random_band_limited(rng, grid_1d, 10, 3)
        scale = float(np.sum(w * np.abs(phi) ** 2)) * float(np.sum(w * np.sum(np.abs(f.samples) ** 2, axis=(1, 2))))
        assert op_cauchy_schwarz_residual(phi, f) >= -1e-10 * scale


def test_column_atom_is_valid():
    """Generated atoms are mean zero, supported on the cube and of size |Q|^{1/2}."""
    atom = make_column_atom(11, ((0.5,), 0.25), 2, cells=32)
    assert validate_atom(atom) == []
    assert column_size(atom.field) == pytest.approx(math.sqrt(0.25), rel=1e-10)


def test_zero_atom_rejected():
    """A zero field is flagged as such."""
    atom = make_column_atom(11, ((0.0,), 1.0), 1, cells=16)
    zero = type(atom)(atom.center, atom.side, atom.field * 0.0)
    assert "zero" in validate_atom(zero)


def test_bmo_of_constant_is_zero(grid_1d):
    """Constant fields have no oscillation."""
    f = MatrixField(grid_1d, np.ones((grid_1d.size, 2, 2)))
    assert bmo_norm(f, "max", levels=3) == pytest.approx(0.0, abs=1e-12)


def test_field_container_roundtrip(tmp_path, band_limited):
    """save_field / load_field keep grid and samples."""
    path = tmp_path / "field.json"
    save_field(band_limited, path)
    back = load_field(path)
    assert np.array_equal(back.samples, band_limited.samples)
    assert np.array_equal(back.grid.points, band_limited.grid.points)


def test_atom_conditions_survive_translation_and_phase():
    """Translating the cube or multiplying by a unit phase keeps an atom valid."""
    atom = make_column_atom(5, ((0.0,), 0.5), 2, cells=32)
    moved = translate_atom(atom, (3.0,))
    assert moved.center == (3.0,)
    assert validate_atom(moved) == []
    assert validate_atom(scale_atom(atom, 1j)) == []
    assert "size" in validate_atom(scale_atom(atom, 2.0))
