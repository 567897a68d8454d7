"""
riesz.py
Bochner-Riesz means S_R^alpha = sum_n (1 - (2n+d)/R)_+^alpha P_n, their kernels,
the order-lifting identity, decay probes for the kernels and the pointwise
sandwich/domination constructions.
"""

from __future__ import annotations
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma, roots_jacobi

from .errors import InputError
from .expansion import analyze, apply_level_multiplier, evaluate_at, level_energies, level_values, synthesize
from .hermite import cell_edges, diagonal_kernel, gauss_hermite_grid, gauss_legendre
from .nc import matrix_sqrt_psd, nc_lp_norm, psd_margin, sandwich_constant
from .probes import fit_report
from .types import MatrixField, ProbeReport, QuadratureGrid, RieszParams


def riesz_multiplier(N, R: float, alpha: complex) -> np.ndarray:
    """(1 - N/R)_+^alpha; complex orders use the principal power of the positive base."""
    base = 1.0 - np.asarray(N, dtype=float) / R
    pos = base > 0
    a = complex(alpha)
    if a.imag == 0.0:
        out = np.zeros(base.shape)
        out[pos] = base[pos] ** a.real
    else:
        out = np.zeros(base.shape, dtype=complex)
        out[pos] = np.exp(a * np.log(base[pos]))
    return out


def top_level(R: float, d: int) -> int:
    """Largest n with 2n + d < R, or -1 when every factor vanishes."""
    if R <= d:
        return -1
    return int(math.ceil((R - d) / 2.0)) - 1


def riesz_apply(f: MatrixField, params: RieszParams, degree_cap: Optional[int] = None) -> MatrixField:
    if params.d != f.grid.d:
        raise InputError(f"parameters for d={params.d} applied to a {f.grid.d}-d field")
    return apply_level_multiplier(f, lambda N: riesz_multiplier(N, params.R, params.alpha), degree_cap)


def _kernel_levels(params: RieszParams) -> Optional[np.ndarray]:
    top = top_level(params.R, params.d)
    if top < 0:
        return None
    N = 2 * np.arange(top + 1) + params.d
    return riesz_multiplier(N, params.R, params.alpha)


def riesz_kernel_rows(x: Sequence[float], ys, params: RieszParams) -> np.ndarray:
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    levels = _kernel_levels(params)
    if levels is None:
        return np.zeros(ys.shape[0])
    return diagonal_kernel(levels, x, ys)


def riesz_kernel(x, y, params: RieszParams):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.size != params.d or y.size != params.d:
        raise InputError(f"kernel points must have dimension {params.d}")
    val = riesz_kernel_rows(x, y[None, :], params)[0]
    return complex(val) if np.iscomplexobj(val) else float(val)


def _lift_nodes(R: float, d: int, beta: float, per_panel: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on (0, 1] for integrals of h(t)(1-t)^{beta-1}.

    Panels break at the level thresholds N/R so every level is smooth on each
    panel; t = a + (b-a)v^2 removes the left-end (t - N/R)^alpha kink and the
    last panel carries the (1-v)^{beta-1} factor in a Gauss-Jacobi weight.
    """
    N = 2 * np.arange(top_level(R, d) + 1) + d
    breaks = sorted({float(n) / R for n in N if 0 < n / R < 1})
    if not breaks:
        return np.zeros(0), np.zeros(0)
    edges = breaks + [1.0]
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        last = b == 1.0
        if last:
            x, w = roots_jacobi(per_panel, beta - 1.0, 0.0)
            v = 0.5 * (x + 1.0)
            wv = w * 2.0 ** (-beta)
            # (1 - t) = (b - a)(1 - v)(1 + v); the (1 - v)^{beta-1} part is in the weight
            extra = ((b - a) * (1.0 + v)) ** (beta - 1.0)
        else:
            v, wv = gauss_legendre(0.0, 1.0, per_panel)
            extra = (1.0 - (a + (b - a) * v * v)) ** (beta - 1.0)
        t = a + (b - a) * v * v
        ts.append(t)
        ws.append(wv * 2.0 * (b - a) * v * extra)
    return np.concatenate(ts), np.concatenate(ws)


def order_lift_multiplier(N, R: float, alpha: complex, beta: float, quadrature_count: int, d: int = 1) -> np.ndarray:
    """Per-level value of c * sum_j w_j t_j^alpha S_{R t_j}^alpha at eigenvalues N."""
    t, w = _lift_nodes(R, d, beta, quadrature_count)
    const = gamma(alpha + beta + 1.0) / (gamma(alpha + 1.0) * gamma(beta))
    N = np.asarray(N, dtype=float)
    out = np.zeros(N.shape, dtype=complex)
    for tj, wj in zip(t, w):
        out += wj * complex(tj) ** alpha * riesz_multiplier(N, R * tj, alpha)
    return const * out


def order_lift_residual(
    f: MatrixField,
    R: float,
    alpha: complex,
    beta: float,
    quadrature_count: int,
    degree_cap: Optional[int] = None,
) -> float:
    """||S_R^{alpha+beta} f - c int_0^1 (1-t)^{beta-1} t^alpha S_{Rt}^alpha f dt||_2 / ||f||_2."""
    if quadrature_count < 8:
        raise InputError(f"order-lift quadrature needs at least 8 points, got {quadrature_count}")
    if complex(alpha).real <= 0 or not (isinstance(beta, (int, float)) and beta > 0):
        raise InputError("order lifting needs Re(alpha) > 0 and real beta > 0")
    c = analyze(f, degree_cap)
    energy = level_energies(c)
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    target = level_values(c, lambda N: riesz_multiplier(N, R, alpha + beta))
    lifted = level_values(c, lambda N: order_lift_multiplier(N, R, alpha, beta, quadrature_count, c.d))
    return math.sqrt(float(np.sum(np.abs(target - lifted) ** 2 * energy)) / total)


def riesz_convergence_curve(f: MatrixField, alpha: complex, radii: Sequence[float], p: float) -> List[float]:
    """||S_R^alpha f - f||_p along the radii."""
    c = analyze(f)
    out = []
    for R in radii:
        s = synthesize(c.scaled_by_level(level_values(c, lambda N: riesz_multiplier(N, R, alpha))), f.grid)
        out.append(nc_lp_norm(s - f, p))
    return out


def _decay_exponent(alpha: complex) -> float:
    return complex(alpha).real + 5.0 / 6.0


def kernel_decay_report(
    alpha: complex,
    lattice: Dict[str, Sequence],
    mode: str = "d1",
    p: float = 2.0,
    d: int = 1,
    threshold: float = 4.0,
) -> ProbeReport:
    """Fitted constant for |S_R^alpha(x, y)| against its decay envelope.

    d1: lattice has radii, xs, ys; envelope
        R^{1/2}{(1+R^{1/2}|x-y|)^{-a-5/6} + (1+R^{1/2}|x+y|)^{-a-5/6}}.
    hd: lattice has radii, r_values, x_points (and optional node_count); the
        quantity is the L_p norm of S_R^alpha(x, .) off the ball B(x, r), envelope
        R^{d/2q}(1+R^{1/2}r)^{-a-1/2+d(1/p-1/2)}.
    """
    a_re = complex(alpha).real
    if mode == "d1":
        if d != 1 or a_re <= 1.0 / 6.0:
            raise InputError("the one-dimensional decay envelope holds for d = 1 and Re(alpha) > 1/6")
        samples = []
        s = _decay_exponent(alpha)
        for R in lattice["radii"]:
            params = RieszParams(float(R), alpha, 1)
            ys = np.asarray(lattice["ys"], dtype=float)
            rt = math.sqrt(R)
            for x in lattice["xs"]:
                vals = np.abs(riesz_kernel_rows([x], ys[:, None], params))
                env = rt * ((1 + rt * np.abs(x - ys)) ** (-s) + (1 + rt * np.abs(x + ys)) ** (-s))
                for y, v, e in zip(ys, vals, env):
                    samples.append({"coords": {"R": float(R), "x": float(x), "y": float(y)}, "ratio": float(v / e)})
        return fit_report("riesz-kernel-d1", samples, ["R"], threshold, {"mode": "d1", "alpha": alpha, **lattice})
    if mode == "hd":
        if d < 2 or not (1.0 <= p <= 2.0) or a_re <= (d - 1) / 2.0:
            raise InputError("the off-ball decay envelope holds for d >= 2, 1 <= p <= 2 and Re(alpha) > (d-1)/2")
        q = math.inf if p == 1.0 else p / (p - 1.0)
        expo = -a_re - 0.5 + d * (1.0 / p - 0.5)
        samples = []
        for R in lattice["radii"]:
            params = RieszParams(float(R), alpha, d)
            cap = max(top_level(R, d), 0)
            m = int(lattice.get("node_count", 0)) or 2 * cap + 8
            grid = gauss_hermite_grid(m, d)
            pts = grid.points
            w = grid.weights
            for x in lattice["x_points"]:
                x = np.asarray(x, dtype=float)
                vals = np.abs(riesz_kernel_rows(x, pts, params))
                dist = np.linalg.norm(pts - x, axis=1)
                for r in lattice["r_values"]:
                    mask = dist >= r
                    norm = float(np.sum(w[mask] * vals[mask] ** p)) ** (1.0 / p)
                    env = R ** (d / (2.0 * q) if q != math.inf else 0.0) * (1 + math.sqrt(R) * r) ** expo
                    samples.append(
                        {
                            "coords": {"R": float(R), "r": float(r), "x": [float(v) for v in x]},
                            "ratio": norm / env,
                        }
                    )
        return fit_report("riesz-kernel-hd", samples, ["r", "R"], threshold, {"mode": "hd", "alpha": alpha, "p": p, **lattice})
    raise InputError(f"unknown decay mode {mode!r}")


def scale_function_G(t: float, alpha: float, d: int, k_range: int = 40) -> float:
    """sum_{|k| <= k_range} (2^k t)^{d/2} (1 + 2^k t)^{-alpha-1/2}."""
    if alpha <= (d - 1) / 2.0:
        raise InputError("the dyadic scale sum converges only for alpha > (d-1)/2")
    if t <= 0:
        raise InputError("scale function needs t > 0")
    s = np.ldexp(float(t), np.arange(-k_range, k_range + 1))
    return float(np.sum(s ** (d / 2.0) * (1.0 + s) ** (-alpha - 0.5)))


# ---------------------------------------------------------------------------
# pointwise sandwiches


def _require_positive(f: MatrixField) -> None:
    if f.positive:
        return
    s = f.samples
    herm_err = np.max(np.abs(s - np.conj(np.swapaxes(s, 1, 2))), initial=0.0)
    scale = max(float(np.max(np.abs(s), initial=0.0)), 1e-300)
    if herm_err > 1e-10 * scale or np.any(psd_margin(np.zeros_like(s), s) < -1e-10 * scale):
        raise InputError("sandwich checks need a pointwise PSD field")


def _decay_convolutions(c, x: np.ndarray, R: float, s: float, reach: float, panels: int = 16, per_panel: int = 32):
    """(E_R * f)(x) and (E_R * f~)(x) by quadrature in u = R^{1/2}|z| = e^v - 1."""
    rt = math.sqrt(R)
    vmax = math.log1p(rt * reach)
    vs, ws = [], []
    for j in range(panels):
        v, w = gauss_legendre(vmax * j / panels, vmax * (j + 1) / panels, per_panel)
        vs.append(v)
        ws.append(w)
    v = np.concatenate(vs)
    wv = np.concatenate(ws) * np.exp((1.0 - s) * v)
    z = np.expm1(v) / rt
    direct = np.zeros((x.size,) + (c.matrix_size,) * 2, dtype=complex)
    mirror = np.zeros_like(direct)
    for sign in (1.0, -1.0):
        arg = x[:, None] - sign * z[None, :]
        vals = evaluate_at(c, arg.reshape(-1, 1)).reshape(x.size, z.size, c.matrix_size, c.matrix_size)
        direct += np.einsum("z,xzij->xij", wv, vals)
        vals = evaluate_at(c, (-arg).reshape(-1, 1)).reshape(x.size, z.size, c.matrix_size, c.matrix_size)
        mirror += np.einsum("z,xzij->xij", wv, vals)
    return direct, mirror


class _CellGeometry:
    """Cell boxes around grid nodes, used for overlap-weighted ball averages."""

    def __init__(self, grid: QuadratureGrid, sub: int = 4):
        edges = [cell_edges(grid, a) for a in range(grid.d)]
        lo = np.meshgrid(*[e[:-1] for e in edges], indexing="ij")
        hi = np.meshgrid(*[e[1:] for e in edges], indexing="ij")
        self.lo = np.stack([m.ravel() for m in lo], axis=-1)
        self.hi = np.stack([m.ravel() for m in hi], axis=-1)
        self.volume = np.prod(self.hi - self.lo, axis=1)
        offs = (np.arange(sub) + 0.5) / sub
        mesh = np.meshgrid(*([offs] * grid.d), indexing="ij")
        self.offsets = np.stack([m.ravel() for m in mesh], axis=-1)
        self.d = grid.d

    def overlap(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Approximate fraction of every cell inside the ball."""
        near = np.sum(np.maximum(0.0, np.maximum(self.lo - center, center - self.hi)) ** 2, axis=1)
        far = np.sum(np.maximum(np.abs(self.lo - center), np.abs(self.hi - center)) ** 2, axis=1)
        r2 = radius * radius
        frac = np.where(far <= r2, 1.0, 0.0)
        part = (near < r2) & (far > r2)
        if np.any(part):
            lo, hi = self.lo[part], self.hi[part]
            pts = lo[:, None, :] + (hi - lo)[:, None, :] * self.offsets[None, :, :]
            inside = np.sum((pts - center) ** 2, axis=2) <= r2
            frac[part] = np.mean(inside, axis=1)
        return frac


def ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius ** d


def ball_average(values: np.ndarray, grid: QuadratureGrid, center, radius: float, geometry: Optional[_CellGeometry] = None) -> np.ndarray:
    """Volume-normalized average of piecewise-constant cell values over B(center, radius)."""
    geo = geometry or _CellGeometry(grid)
    frac = geo.overlap(np.asarray(center, dtype=float), radius)
    return np.einsum("p,pij->ij", frac * geo.volume, values) / ball_volume(grid.d, radius)


def dyadic_dominant(f: MatrixField, scales: Sequence[int]) -> Tuple[np.ndarray, List[np.ndarray]]:
    """F(x) = sum_k A_{2^k}(f^2)(x) and the individual averages A_{2^k}(f^2)."""
    sq = f.samples @ f.samples
    geo = _CellGeometry(f.grid)
    pts = f.grid.points
    terms = []
    for k in scales:
        r = 2.0 ** k
        terms.append(np.stack([ball_average(sq, f.grid, x, r, geo) for x in pts]))
    return np.sum(terms, axis=0), terms


def sandwich_check(
    f: MatrixField,
    params: RieszParams,
    mode: str = "d1",
    radii: Optional[Sequence[float]] = None,
    scales: Sequence[int] = tuple(range(-3, 4)),
    threshold: float = 4.0,
) -> ProbeReport:
    """Smallest C with -C D <= S_R^alpha f <= C D at every grid point.

    d1: D = E_R * f + E_R * f~ with E_R(x) = R^{1/2}(1 + R^{1/2}|x|)^{-alpha-5/6}.
    hd: D = F^{1/2} with F the dyadic dominant of f^2; G(R^{1/2}) is recorded.
    """
    _require_positive(f)
    a = complex(params.alpha)
    if a.imag != 0.0:
        raise InputError("PSD sandwiches need a real order")
    d = f.grid.d
    if mode == "d1" and (d != 1 or a.real <= 1.0 / 6.0):
        raise InputError("the one-dimensional sandwich needs d = 1 and alpha > 1/6")
    if mode == "hd" and (d < 2 or a.real <= (d - 1) / 2.0):
        raise InputError("the dominant sandwich needs d >= 2 and alpha > (d-1)/2")
    if mode not in ("d1", "hd"):
        raise InputError(f"unknown sandwich mode {mode!r}")
    radii = list(radii) if radii else [params.R]
    c = analyze(f)
    pts = f.grid.points
    samples, residuals, extra = [], [], {}
    if mode == "hd":
        big_f, _ = dyadic_dominant(f, scales)
        dom_hd = matrix_sqrt_psd(big_f)
    for R in radii:
        s = synthesize(c.scaled_by_level(level_values(c, lambda N: riesz_multiplier(N, R, a.real))), f.grid).samples
        if mode == "d1":
            reach = 2.0 * f.grid.half_width + 8.0
            direct, mirror = _decay_convolutions(c, pts[:, 0], R, _decay_exponent(a), reach)
            dom = direct + mirror
        else:
            dom = dom_hd
            extra[f"G(R^1/2) at R={R}"] = scale_function_G(math.sqrt(R), a.real, d)
        cx = sandwich_constant(s, dom)
        big_c = float(np.max(cx, initial=0.0))
        scale = max(big_c * float(np.max(np.linalg.norm(dom, 2, axis=(1, 2)), initial=0.0)), 1e-300)
        low = psd_margin(-big_c * dom, s)
        high = psd_margin(s, big_c * dom)
        residuals.append(float(min(np.min(low), np.min(high))) / scale)
        for x, v in zip(pts, cx):
            samples.append({"coords": {"R": float(R), "x": [float(t) for t in x]}, "ratio": float(v)})
    extra["min_relative_residual"] = min(residuals) if residuals else 0.0
    report = fit_report(f"sandwich-{mode}", samples, ["R"], threshold, {"mode": mode, "alpha": a.real, "radii": radii}, extra=extra)
    report.passed = report.passed and extra["min_relative_residual"] >= -1e-9
    return report
