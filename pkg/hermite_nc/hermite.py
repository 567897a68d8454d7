"""
hermite.py
Normalized Hermite functions and the quadrature rules every inner product uses.

- phi_n is evaluated by the normalized three-term recurrence carried as a
  mantissa plus a running exponent, so neither the Gaussian factor nor the
  polynomial growth can overflow or flush early.
- Gauss-Hermite nodes come from the symmetric tridiagonal (Golub-Welsch)
  eigenproblem; weights come from the Christoffel identity
  w_j = 1 / sum_n h_n(x_j)^2, evaluated in log space.
- Grids store Gaussian-compensated weights w_j e^{x_j^2}, so a grid integrates
  plain Lebesgue measure.
"""

from __future__ import annotations
import math
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import erf, logsumexp, roots_legendre

from .errors import InputError
from .types import HermiteBasis, MultiIndex, QuadratureGrid
from .util import write_csv

PI_M14 = math.pi ** -0.25
_RESCALE = 1e150


def _as_points(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise InputError("Hermite evaluation needs finite abscissae")
    return arr


def _scaled_phi(x: np.ndarray, n_max: int, shift: np.ndarray | float = 0.0):
    """Mantissas and exponents with phi_n(x) e^{shift} = mant[n] * exp(expo[n])."""
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    mant = np.empty((n_max + 1, x.size))
    expo = np.empty((n_max + 1, x.size))
    prev = np.zeros(x.size)
    cur = np.full(x.size, PI_M14)
    e = -0.5 * x * x + shift
    mant[0], expo[0] = cur, e
    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            prev = prev / s
            cur = cur / s
            e = e + np.log(s)
        mant[n + 1], expo[n + 1] = cur, e
    return mant, expo


def _combine(mant: np.ndarray, expo: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore"):
        return np.sign(mant) * np.exp(expo + np.log(np.abs(mant)))


def phi_table(x, n_max: int) -> np.ndarray:
    """phi_n(x_j) for n <= n_max, shape (n_max + 1, len(x))."""
    pts = _as_points(x)
    return _combine(*_scaled_phi(pts, n_max))


def compensated_phi_table(x, n_max: int) -> np.ndarray:
    """phi_n(x_j) e^{x_j^2 / 2}, the normalized Hermite polynomials."""
    pts = _as_points(x)
    return _combine(*_scaled_phi(pts, n_max, 0.5 * pts * pts))


def eval_phi_1d(x: float, n_max: int) -> np.ndarray:
    if not math.isfinite(float(x)):
        raise InputError(f"non-finite abscissa {x}")
    return phi_table([float(x)], n_max)[:, 0]


def phi_derivative_table(x, n_max: int) -> np.ndarray:
    """phi_n'(x) = sqrt(n/2) phi_{n-1}(x) - sqrt((n+1)/2) phi_{n+1}(x)."""
    tab = phi_table(x, n_max + 1)
    n = np.arange(n_max + 1)[:, None]
    out = -np.sqrt((n + 1) / 2.0) * tab[1:]
    out[1:] += np.sqrt(n[1:] / 2.0) * tab[: n_max]
    return out


def eval_phi_multi(nu: MultiIndex | Sequence[int], x) -> float:
    nu = nu if isinstance(nu, MultiIndex) else MultiIndex(tuple(nu))
    pt = _as_points(x)
    if pt.size != nu.d:
        raise InputError(f"point of dimension {pt.size} for a multi-index of dimension {nu.d}")
    val = 1.0
    for k, xk in zip(nu.components, pt):
        val *= eval_phi_1d(xk, k)[k]
    return float(val)


def gauss_hermite_rule(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """m-point rule for the weight e^{-x^2}; nodes ascending, exact to degree 2m-1."""
    nodes, log_w = _gauss_hermite_log(m)
    return nodes, np.exp(log_w)


def _gauss_hermite_log(m: int) -> Tuple[np.ndarray, np.ndarray]:
    if m < 1:
        raise InputError(f"Gauss-Hermite rule needs m >= 1, got {m}")
    if m == 1:
        return np.zeros(1), np.array([0.5 * math.log(math.pi)])
    off = np.sqrt(np.arange(1, m) / 2.0)
    x = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    mant, expo = _scaled_phi(x, m - 1)
    with np.errstate(divide="ignore"):
        log_sq = 2.0 * (np.log(np.abs(mant)) + expo)
    log_sum = logsumexp(log_sq, axis=0)
    return x, -x * x - log_sum


def gauss_hermite_compensated(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and compensated weights w_j e^{x_j^2} = 1 / sum_n phi_n(x_j)^2."""
    x, log_w = _gauss_hermite_log(m)
    return x, np.exp(log_w + x * x)


def make_basis(degree_cap: int, node_count: int | None = None) -> HermiteBasis:
    if degree_cap < 0:
        raise InputError("degree_cap must be >= 0")
    m = node_count or degree_cap + 1
    x, log_w = _gauss_hermite_log(m)
    return HermiteBasis(
        degree_cap=degree_cap,
        nodes=x,
        weights=np.exp(log_w),
        compensated_weights=np.exp(log_w + x * x),
        phi_table=phi_table(x, degree_cap),
    )


def gauss_hermite_grid(m: int, d: int = 1) -> QuadratureGrid:
    if d < 1:
        raise InputError("dimension must be >= 1")
    x, w = gauss_hermite_compensated(m)
    return QuadratureGrid(tuple([x] * d), tuple([w] * d), kind="gauss-hermite")


def uniform_grid(center: Sequence[float], side: float, cells: int) -> QuadratureGrid:
    """Midpoint rule on the cube of the given center and side length."""
    if side <= 0 or cells < 1:
        raise InputError("uniform grid needs a positive side and at least one cell")
    h = side / cells
    axes, weights = [], []
    for c in center:
        axes.append(c - 0.5 * side + h * (np.arange(cells) + 0.5))
        weights.append(np.full(cells, h))
    return QuadratureGrid(tuple(axes), tuple(weights), kind="uniform")


def cell_edges(grid: QuadratureGrid, axis: int) -> np.ndarray:
    """Cell boundaries around the nodes of one axis (midpoints, mirrored at the ends)."""
    x = grid.axis_nodes[axis]
    if x.size == 1:
        w = grid.axis_weights[axis][0]
        return np.array([x[0] - 0.5 * w, x[0] + 0.5 * w])
    mid = 0.5 * (x[1:] + x[:-1])
    return np.concatenate([[x[0] - (mid[0] - x[0])], mid, [x[-1] + (x[-1] - mid[-1])]])


def cell_integrals(edges, n_max: int) -> np.ndarray:
    """Exact integrals of phi_n over [edges[c], edges[c+1]], shape (n_max + 1, cells)."""
    e = _as_points(edges)
    if e.size < 2 or np.any(np.diff(e) <= 0):
        raise InputError("cell edges must be strictly increasing")
    tab = phi_table(e, n_max)
    jump = tab[:, 1:] - tab[:, :-1]
    out = np.empty((n_max + 1, e.size - 1))
    s2 = math.sqrt(2.0)
    out[0] = PI_M14 * math.sqrt(math.pi / 2.0) * (erf(e[1:] / s2) - erf(e[:-1] / s2))
    prev = np.zeros(e.size - 1)
    for n in range(n_max):
        nxt = math.sqrt(n / (n + 1)) * prev - math.sqrt(2.0 / (n + 1)) * jump[n]
        prev = out[n]
        out[n + 1] = nxt
    return out


def gauss_legendre(a: float, b: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(m)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def inner_product(f_samples, g_samples, grid: QuadratureGrid):
    """Quadrature of the integral of f(x) g(x); matrix samples multiply pointwise."""
    f = np.asarray(f_samples)
    g = np.asarray(g_samples)
    if f.shape[0] != grid.size or g.shape[0] != grid.size:
        raise InputError(
            f"samples of length {f.shape[0]}/{g.shape[0]} do not conform to {grid.size} grid points"
        )
    w = grid.weights
    if f.ndim == 1 and g.ndim == 1:
        return complex(np.sum(w * f * g)) if np.iscomplexobj(f) or np.iscomplexobj(g) else float(np.sum(w * f * g))
    if f.ndim == 1:
        return np.einsum("p,p,pij->ij", w, f, g)
    if g.ndim == 1:
        return np.einsum("p,pij,p->ij", w, f, g)
    if f.shape[1:] != g.shape[1:]:
        raise InputError(f"matrix shapes {f.shape[1:]} and {g.shape[1:]} differ")
    return np.einsum("p,pij,pjk->ik", w, f, g)


def level_tensor(level_values: np.ndarray, d: int) -> np.ndarray:
    """Dense (K+1,)*d array holding level_values[|nu|] (zero above the cap)."""
    lv = np.asarray(level_values)
    k = lv.size - 1
    levels = np.sum(np.meshgrid(*([np.arange(k + 1)] * d), indexing="ij"), axis=0)
    return np.where(levels <= k, lv[np.minimum(levels, k)], 0)


def diagonal_kernel(level_values, x: Sequence[float], ys) -> np.ndarray:
    """sum_nu m(|nu|) Phi_nu(x) Phi_nu(y) for every row y of `ys`.

    `level_values[n]` is the weight of level n; the sum stops at len - 1.
    """
    lv = np.asarray(level_values)
    xs = _as_points(x)
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    d = xs.size
    if ys.shape[1] != d:
        raise InputError(f"kernel points of dimension {ys.shape[1]} for x of dimension {d}")
    k = lv.size - 1
    prods = [phi_table(xs[a], k)[:, 0][:, None] * phi_table(ys[:, a], k) for a in range(d)]
    if d == 1:
        return lv @ prods[0]
    z = np.einsum("...k,ky->...y", level_tensor(lv, d), prods[-1])
    for p in reversed(prods[:-1]):
        z = np.einsum("...ky,ky->...y", z, p)
    return z


def export_basis_csv(basis: HermiteBasis, path: Path) -> None:
    rows = []
    for n in range(basis.degree_cap + 1):
        for j, (x, w) in enumerate(zip(basis.nodes, basis.weights)):
            rows.append({"n": n, "node_index": j, "node": x, "weight": w, "phi": basis.phi_table[n, j]})
    write_csv(path, rows, ["n", "node_index", "node", "weight", "phi"])
