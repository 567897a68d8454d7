"""
semigroup.py
Hermite heat semigroup H^t = sum_n e^{-Nt} P_n, N = 2n + d.

- spectral mode multiplies Fourier-Hermite coefficients
- kernel mode integrates against the Mehler kernel, one axis at a time
- Littlewood-Paley functions g, g_k and g*_k are accumulated as PSD sums
  sum_j w_j |A_j|^2 over a log-spaced TimeGrid
- kernel_bound_report fits Gaussian envelopes for dt k_t and its spatial
  derivatives, plus the R_d = L_2(t dt) norms of the same kernels

The Mehler kernel is written through the nonnegative phase
    phi(t, x, y) = ((x - y)^2 coth t + (x + y)^2 tanh t) / 4
which equals (x^2 + y^2) coth(2t) / 2 - x y / sinh(2t) without cancellation.
"""

from __future__ import annotations
import math
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .expansion import analyze, level_values, synthesize
from .hermite import phi_table
from .nc import matrix_sqrt_psd, nc_lp_norm, psd_margin, sandwich_constant
from .probes import combine_reports, fit_report
from .types import MatrixField, MehlerParams, ProbeReport, SpectralCoeffs, TimeGrid
from .util import chunked, log_spaced, warn

_UNDERFLOW = -745.0
_CALIBRATION = (0.5, 0.0, 0.0)
_CALIBRATION_LEVELS = 200


# ---------------------------------------------------------------------------
# time grids


def time_grid(n_max: Optional[float] = None, points: int = 96, t_min: float = 1e-3, t_max: float = 12.0) -> TimeGrid:
    """Log-spaced grid with trapezoid weights in s = log t.

    With n_max the lower end drops to min(t_min, 0.03 / n_max) at the same log step,
    so the fastest level e^{-n_max t} is resolved near t = 0.
    """
    if points < 16:
        raise InputError(f"time grid needs at least 16 points, got {points}")
    if not (0 < t_min < t_max):
        raise InputError(f"time grid needs 0 < t_min < t_max, got {t_min}, {t_max}")
    h = math.log(t_max / t_min) / (points - 1)
    lo = t_min
    if n_max is not None and n_max > 0:
        lo = min(t_min, 0.03 / float(n_max))
    count = int(round(math.log(t_max / lo) / h)) + 1
    times = log_spaced(lo, t_max, max(count, points))
    step = math.log(t_max / lo) / (times.size - 1)
    lw = step * times
    lw[0] *= 0.5
    lw[-1] *= 0.5
    return TimeGrid(times, lw)


def truncation_defect(grid: TimeGrid, N: float) -> float:
    """|quadrature of int_0^inf e^{-2Nt} N^2 t dt - 1/4|."""
    approx = float(np.sum(grid.weights(1.0) * N * N * np.exp(-2.0 * N * grid.times)))
    return abs(approx - 0.25)


# ---------------------------------------------------------------------------
# Mehler kernel, one axis


def _check_time(t: float) -> None:
    if not (t > 0 and math.isfinite(t)):
        raise InputError(f"heat time must be positive and finite, got {t}")


def _log_sinh2t(t: float) -> float:
    u = 2.0 * t
    return u - math.log(2.0) + math.log(-math.expm1(-2.0 * u))


def _phase(t, x, y):
    return 0.25 * ((x - y) ** 2 / math.tanh(t) + (x + y) ** 2 * math.tanh(t))


def _phase_t(t, x, y):
    return 0.25 * (-((x - y) ** 2) / math.sinh(t) ** 2 + (x + y) ** 2 / math.cosh(t) ** 2)


def _phase_y(t, x, y):
    return 0.5 * ((y - x) / math.tanh(t) + (x + y) * math.tanh(t))


def _phase_ty(t, x, y):
    return 0.5 * ((x - y) / math.sinh(t) ** 2 + (x + y) / math.cosh(t) ** 2)


def _safe_exp(e):
    e = np.asarray(e, dtype=float)
    with np.errstate(under="ignore"):
        return np.where(e < _UNDERFLOW, 0.0, np.exp(np.maximum(e, _UNDERFLOW)))


@lru_cache(maxsize=None)
def _axis_constant() -> float:
    t, x, y = _CALIBRATION
    tab = phi_table([x, y], _CALIBRATION_LEVELS)
    N = 2 * np.arange(_CALIBRATION_LEVELS + 1) + 1
    spectral = float(np.sum(np.exp(-N * t) * tab[:, 0] * tab[:, 1]))
    return spectral * math.exp(0.5 * _log_sinh2t(t) + _phase(t, x, y))


def mehler_constant(d: int) -> float:
    """c_d, fixed by matching the truncated spectral sum at (t, x, y) = (0.5, 0, 0)."""
    if d < 1:
        raise InputError("dimension must be >= 1")
    return _axis_constant() ** d


def mehler_params(t: float, d: int) -> MehlerParams:
    _check_time(t)
    return MehlerParams(t=float(t), d=int(d), c_d=mehler_constant(d))


def _axis_kernel(t: float, x, y) -> np.ndarray:
    """One-dimensional k_t(x, y), broadcast over x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _axis_constant() * _safe_exp(-0.5 * _log_sinh2t(t) - _phase(t, x, y))


def _points(x, y, d: int) -> Tuple[np.ndarray, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[-1] != d or y.shape[-1] != d:
        raise InputError(f"kernel points must have dimension {d}")
    return x, y


def _resolve(t: float, x, params: Optional[MehlerParams]) -> MehlerParams:
    _check_time(t)
    if params is None:
        return mehler_params(t, np.atleast_1d(np.asarray(x)).shape[-1])
    return params


def mehler_kernel(t: float, x, y, params: Optional[MehlerParams] = None) -> float:
    """c_d (sinh 2t)^{-d/2} exp(-(|x|^2+|y|^2) coth(2t)/2 + x.y / sinh(2t))."""
    p = _resolve(t, x, params)
    x, y = _points(x, y, p.d)
    e = math.log(p.c_d) - 0.5 * p.d * _log_sinh2t(t) - float(np.sum(_phase(t, x, y)))
    return float(_safe_exp(e))


def mehler_dt_kernel(t: float, x, y, params: Optional[MehlerParams] = None) -> float:
    """d/dt k_t(x, y) = -k_t(x, y) (d coth 2t + sum_a phi_t(x_a, y_a))."""
    p = _resolve(t, x, params)
    x, y = _points(x, y, p.d)
    k = mehler_kernel(t, x, y, p)
    return -k * (p.d / math.tanh(2.0 * t) + float(np.sum(_phase_t(t, x, y))))


def mehler_dy_dt_kernel(t: float, x, y, axis: int = 0, params: Optional[MehlerParams] = None) -> float:
    """d/dy_axis d/dt k_t(x, y)."""
    p = _resolve(t, x, params)
    x, y = _points(x, y, p.d)
    k = mehler_kernel(t, x, y, p)
    s = p.d / math.tanh(2.0 * t) + float(np.sum(_phase_t(t, x, y)))
    py = float(_phase_y(t, x[axis], y[axis]))
    pty = float(_phase_ty(t, x[axis], y[axis]))
    return k * (py * s - pty)


def mehler_dx_dt_kernel(t: float, x, y, axis: int = 0, params: Optional[MehlerParams] = None) -> float:
    """d/dx_axis d/dt k_t(x, y); the kernel is symmetric in (x, y)."""
    return mehler_dy_dt_kernel(t, y, x, axis, params)


# ---------------------------------------------------------------------------
# semigroup application


def _axis_matrices(f: MatrixField, t: float, derivative: bool) -> List[np.ndarray]:
    out = []
    for x, w in zip(f.grid.axis_nodes, f.grid.axis_weights):
        k = _axis_kernel(t, x[:, None], x[None, :])
        if derivative:
            k = -k * (1.0 / math.tanh(2.0 * t) + _phase_t(t, x[:, None], x[None, :]))
        out.append(k * w[None, :])
    return out


def _apply_axes(arr: np.ndarray, mats: List[np.ndarray]) -> np.ndarray:
    for a, m in enumerate(mats):
        arr = np.moveaxis(np.tensordot(m, np.moveaxis(arr, a, 0), axes=(1, 0)), 0, a)
    return arr


def _kernel_apply(f: MatrixField, t: float, derivative: bool) -> MatrixField:
    plain = _axis_matrices(f, t, derivative=False)
    arr = f.tensor_view()
    if not derivative:
        out = _apply_axes(arr, plain)
    else:
        deriv = _axis_matrices(f, t, derivative=True)
        out = np.zeros_like(arr)
        for a in range(f.grid.d):
            mats = [deriv[b] if b == a else plain[b] for b in range(f.grid.d)]
            out += _apply_axes(arr, mats)
    n = f.matrix_size
    return MatrixField(f.grid, out.reshape(f.grid.size, n, n))


def _spectral_factor(t: float, k: int):
    return lambda N: (-N) ** k * np.exp(-N * t)


def semigroup_apply(f: MatrixField, t: float, mode: str = "spectral", degree_cap: Optional[int] = None) -> MatrixField:
    _check_time(t)
    if mode == "spectral":
        c = analyze(f, degree_cap)
        return synthesize(c.scaled_by_level(level_values(c, _spectral_factor(t, 0))), f.grid)
    if mode == "kernel":
        return _kernel_apply(f, t, derivative=False)
    raise InputError(f"unknown semigroup mode {mode!r}")


def dt_semigroup_apply(f: MatrixField, t: float, mode: str = "spectral", degree_cap: Optional[int] = None) -> MatrixField:
    _check_time(t)
    if mode == "spectral":
        c = analyze(f, degree_cap)
        return synthesize(c.scaled_by_level(level_values(c, _spectral_factor(t, 1))), f.grid)
    if mode == "kernel":
        return _kernel_apply(f, t, derivative=True)
    raise InputError(f"unknown semigroup mode {mode!r}")


def semigroup_continuity_curve(f: MatrixField, times: Sequence[float], degree_cap: Optional[int] = None) -> List[float]:
    """||H^t f - f||_2 for each t."""
    c = analyze(f, degree_cap)
    base = synthesize(c, f.grid)
    out = []
    for t in times:
        _check_time(t)
        h = synthesize(c.scaled_by_level(level_values(c, _spectral_factor(t, 0))), f.grid)
        out.append(nc_lp_norm(h - base, 2.0))
    return out


# ---------------------------------------------------------------------------
# Littlewood-Paley functions


def _default_grid(c: SpectralCoeffs, grid: Optional[TimeGrid]) -> TimeGrid:
    if grid is not None:
        return grid
    return time_grid(n_max=2 * c.degree_cap + c.d)


def _derivative_slices(c: SpectralCoeffs, f: MatrixField, times: np.ndarray, k: int) -> Iterator[np.ndarray]:
    for t in times:
        yield synthesize(c.scaled_by_level(level_values(c, _spectral_factor(float(t), k))), f.grid).samples


def g_k_square(f: MatrixField, k: int, grid: Optional[TimeGrid], degree_cap: Optional[int]) -> np.ndarray:
    """sum_j w_j t_j^{2k-1} |d_t^k H^{t_j} f|^2 at every grid point."""
    c = analyze(f, degree_cap)
    tg = _default_grid(c, grid)
    w = tg.weights(2.0 * k - 1.0)
    acc = np.zeros(f.samples.shape, dtype=complex)
    for wj, a in zip(w, _derivative_slices(c, f, tg.times, k)):
        acc += wj * (np.conj(np.swapaxes(a, 1, 2)) @ a)
    return acc


def _psd_field(f: MatrixField, square: np.ndarray) -> MatrixField:
    return MatrixField(f.grid, matrix_sqrt_psd(square), hermitian=True, positive=True)


def g_k_function(f: MatrixField, k: int, time_grid: Optional[TimeGrid] = None, degree_cap: Optional[int] = None) -> MatrixField:
    if k < 1:
        raise InputError(f"g_k needs k >= 1, got {k}")
    return _psd_field(f, g_k_square(f, int(k), time_grid, degree_cap))


def g_function(f: MatrixField, time_grid: Optional[TimeGrid] = None, degree_cap: Optional[int] = None) -> MatrixField:
    return g_k_function(f, 1, time_grid, degree_cap)


def g_star_square(f: MatrixField, k: float, grid: Optional[TimeGrid], degree_cap: Optional[int], chunk: int = 512) -> np.ndarray:
    c = analyze(f, degree_cap)
    tg = _default_grid(c, grid)
    d = f.grid.d
    pts = f.grid.points
    wy = f.grid.weights
    w = tg.weights(0.0) * tg.times ** ((2.0 - d) / 2.0)
    acc = np.zeros(f.samples.shape, dtype=complex)
    rows = chunked(range(pts.shape[0]), chunk)
    for wj, t, a in zip(w, tg.times, _derivative_slices(c, f, tg.times, 1)):
        sq = np.conj(np.swapaxes(a, 1, 2)) @ a
        for idx in rows:
            dist2 = np.sum((pts[idx][:, None, :] - pts[None, :, :]) ** 2, axis=2)
            weight = (1.0 + dist2 / t) ** (-k) * wy[None, :]
            acc[idx] += wj * np.einsum("xy,yij->xij", weight, sq)
    return acc


def g_star_k(f: MatrixField, k: float, time_grid: Optional[TimeGrid] = None, degree_cap: Optional[int] = None) -> MatrixField:
    """(int int t^{(2-d)/2} (1 + |x-y|^2/t)^{-k} |d_t H^t f(y)|^2 dt dy)^{1/2}."""
    if k < 1:
        raise InputError(f"g*_k needs k >= 1, got {k}")
    return _psd_field(f, g_star_square(f, float(k), time_grid, degree_cap))


def psd_domination_report(
    name: str,
    lower: np.ndarray,
    upper: np.ndarray,
    points: np.ndarray,
    threshold: float,
    lattice: Dict,
    coords: Optional[Dict] = None,
) -> ProbeReport:
    """Fitted C with lower <= C^2 upper (PSD order) at every point."""
    c2 = sandwich_constant(lower, upper)
    big = float(np.max(c2, initial=0.0))
    scale = max(big * float(np.max(np.linalg.norm(upper, 2, axis=(1, 2)), initial=0.0)), 1e-300)
    residual = float(np.min(psd_margin(lower, big * upper), initial=0.0)) / scale
    samples = [
        {"coords": {**(coords or {}), "x": [float(v) for v in x]}, "ratio": math.sqrt(float(v))}
        for x, v in zip(points, c2)
    ]
    report = fit_report(name, samples, [], threshold, lattice, extra={"min_relative_residual": residual})
    report.passed = report.passed and residual >= -1e-9
    return report


def gk_chain_report(f: MatrixField, k: int, time_grid: Optional[TimeGrid] = None, threshold: float = 4.0) -> ProbeReport:
    """Fitted C_k in g_k(f)^2 <= C_k^2 g_{k+1}(f)^2."""
    if k < 1:
        raise InputError(f"g_k chain needs k >= 1, got {k}")
    low = g_k_square(f, k, time_grid, None)
    high = g_k_square(f, k + 1, time_grid, None)
    return psd_domination_report(f"g-chain-k{k}", low, high, f.grid.points, threshold, {"k": k}, {"k": k})


# ---------------------------------------------------------------------------
# Hermite-Hardy norms

EP_SIDES = ("column", "row", "sum", "intersection", "mixed")


def ep_norm(f: MatrixField, p: float, side: str = "column", time_grid: Optional[TimeGrid] = None) -> float:
    """||g(f)||_p (column), ||g(f*)||_p (row) or their combination.

    sum: min of the two, an upper bound for the infimum over decompositions;
    intersection: max; mixed: sum for p < 2, intersection for p >= 2.
    """
    if not p >= 1:
        raise InputError(f"E_p needs p >= 1, got {p}")
    if side not in EP_SIDES:
        raise InputError(f"unknown E_p side {side!r}")
    if side == "column":
        return nc_lp_norm(g_function(f, time_grid), p)
    if side == "row":
        return nc_lp_norm(g_function(f.adjoint(), time_grid), p)
    col = ep_norm(f, p, "column", time_grid)
    row = ep_norm(f, p, "row", time_grid)
    if side == "mixed":
        side = "sum" if p < 2 else "intersection"
    return min(col, row) if side == "sum" else max(col, row)


# ---------------------------------------------------------------------------
# kernel bounds

KERNEL_ITEMS = ("dt", "dy_dt", "dx_dt", "rd_dt", "rd_dy_dt", "rd_dx_dt")


def _kernel_value(item: str, t: float, x: np.ndarray, y: np.ndarray, p: MehlerParams) -> float:
    if item.endswith("dy_dt"):
        return mehler_dy_dt_kernel(t, x, y, 0, p)
    if item.endswith("dx_dt"):
        return mehler_dx_dt_kernel(t, x, y, 0, p)
    return mehler_dt_kernel(t, x, y, p)


def _pointwise_samples(item: str, a: float, d: int, t_values, pairs) -> List[Dict]:
    power = d / 2.0 + (1.0 if item == "dt" else 1.5)
    samples = []
    for t in t_values:
        p = mehler_params(t, d)
        for x, y in pairs:
            v = abs(_kernel_value(item, t, x, y, p))
            dist2 = float(np.sum((x - y) ** 2))
            ratio = v * t ** power * math.exp(min(a * dist2 / t, 700.0))
            samples.append(
                {
                    "coords": {
                        "regime": "t<1" if t < 1 else "t>=1",
                        "t": float(t),
                        "x": [float(v) for v in x],
                        "y": [float(v) for v in y],
                    },
                    "ratio": ratio,
                }
            )
    return samples


def _rd_samples(item: str, d: int, tg: TimeGrid, x_values, z_values) -> List[Dict]:
    power = d if item == "rd_dt" else d + 1
    w = tg.weights(1.0)
    samples = []
    for xv in x_values:
        x = np.full(d, float(xv))
        for z in z_values:
            y = x.copy()
            y[0] += float(z)
            vals = np.array([_kernel_value(item, float(t), x, y, mehler_params(float(t), d)) for t in tg.times])
            norm = math.sqrt(float(np.sum(w * vals ** 2)))
            samples.append({"coords": {"z": float(z), "x": [float(v) for v in x]}, "ratio": norm * abs(z) ** power})
    return samples


def kernel_bound_report(
    lattice: Dict[str, Sequence],
    d: int = 1,
    a_grid: Sequence[float] = (1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8),
    times: Optional[TimeGrid] = None,
    threshold: float = 4.0,
) -> ProbeReport:
    """Gaussian envelope fits for dt k_t and its spatial derivatives, and R_d norm fits.

    lattice keys: t_values, x_values, y_values (coordinates repeated over the d
    axes), z_values (offsets |x - y| along the first axis for the R_d items).
    For each pointwise item the largest a in a_grid whose fit is finite and
    stable across the t < 1 / t >= 1 regimes is kept.
    """
    t_values = [float(t) for t in lattice["t_values"]]
    if not t_values:
        raise InputError("kernel bound lattice needs time values")
    if not any(t < 1 for t in t_values) or not any(t >= 1 for t in t_values):
        warn("kernel bound lattice does not span both t < 1 and t >= 1")
    pairs = [
        (np.full(d, float(x)), np.full(d, float(y)))
        for x in lattice["x_values"]
        for y in lattice["y_values"]
    ]
    if not pairs:
        raise InputError("kernel bound lattice has no (x, y) points")
    tg = times or time_grid()
    items: Dict[str, ProbeReport] = {}
    for item in KERNEL_ITEMS[:3]:
        fits = []
        for a in sorted(a_grid):
            rep = fit_report(item, _pointwise_samples(item, a, d, t_values, pairs), ["regime"], threshold, {"a": a})
            rep.extra["a"] = a
            fits.append(rep)
        stable = [r for r in fits if r.stable]
        items[item] = stable[-1] if stable else fits[0]
    z_values = [float(z) for z in lattice.get("z_values", (0.5, 1.0, 2.0))]
    for item in KERNEL_ITEMS[3:]:
        items[item] = fit_report(item, _rd_samples(item, d, tg, lattice["x_values"], z_values), ["z"], threshold, {})
    return combine_reports(
        "mehler-kernel-bounds",
        items,
        {"d": d, "a_grid": list(a_grid), **{k: list(v) for k, v in lattice.items()}},
        threshold,
        head="dt",
    )
