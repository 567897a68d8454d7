"""
experiments.py
Task plans for each experiment kind.

A plan is a list of independent tasks (run by the orchestrator's worker pool)
plus an optional finish step that builds cross-task reports from the merged
rows. Every task draws its randomness from rng_for(seed, ...) keyed by its own
parameters, so results do not depend on scheduling.
"""

from __future__ import annotations
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InputError
from .expansion import analyze, coeff_norm2, random_band_limited
from .hermite import gauss_hermite_grid, phi_table
from .multipliers import (
    M_kernel_report,
    apply_oscillating,
    domination_check,
    lp_ratio_sweep,
    marcinkiewicz_report,
    parity,
    parse_multiplier,
)
from .nc import nc_lp_norm, op_cauchy_schwarz_residual
from .oscillating import h1_atom_test, kernel_self_convergence, oscillating_bounds_report
from .probes import fit_report, spread
from .riesz import (
    kernel_decay_report,
    order_lift_residual,
    riesz_convergence_curve,
    sandwich_check,
    scale_function_G,
)
from .semigroup import (
    g_function,
    g_k_square,
    g_star_k,
    g_star_square,
    gk_chain_report,
    kernel_bound_report,
    mehler_kernel,
    psd_domination_report,
    semigroup_apply,
    semigroup_continuity_curve,
    time_grid,
    truncation_defect,
)
from .types import ExperimentConfig, MatrixField, OscillatingParams, ProbeReport, RieszParams
from .util import log_spaced, params_label, rng_for, warn

KINDS = (
    "riesz-convergence",
    "riesz-kernel-probe",
    "semigroup-gfunction",
    "mehler-probe",
    "marcinkiewicz",
    "oscillating-probe",
    "h1-atoms",
    "norm-equivalence",
    "identities",
)

# offsets |x - y| for the oscillating kernel lattice
_OFFSETS = tuple(float(z) for z in log_spaced(0.1, 6.0, 8))
_SPECTRAL_LEVELS = 200
SHIFTED_CENTER = 0.7  # off-center bump spreads over many Hermite levels
RATE_SLACK = 4.0


@dataclass
class Partial:
    rows: List[Dict[str, Any]] = field(default_factory=list)
    reports: List[ProbeReport] = field(default_factory=list)
    curves: Dict[str, Dict[str, Any]] = field(default_factory=dict)


class Task(NamedTuple):
    key: tuple
    run: Callable[[], Partial]


@dataclass
class Plan:
    tasks: List[Task]
    finish: Optional[Callable[[List[Dict[str, Any]]], Partial]] = None


# ---------------------------------------------------------------------------
# helpers


def row(kind: str, metric: str, value: float, **params) -> Dict[str, Any]:
    """One long-format result row; `_params` is kept for sorting and finish steps."""
    return {
        "experiment": kind,
        "parameters": params_label(params),
        "metric": metric,
        "value": float(value),
        "_params": params,
    }


def curve(name: str, x: Sequence[float], series: Dict[str, Sequence[float]], xlabel: str, ylabel: str) -> Dict:
    return {name: {"x": [float(v) for v in x], "series": {k: [float(v) for v in s] for k, s in series.items()}, "xlabel": xlabel, "ylabel": ylabel}}


def limit_report(name: str, samples: List[Dict], limit: float, lattice: Dict, required: bool = True) -> ProbeReport:
    """Passes when every sampled ratio is finite and at most `limit`."""
    report = fit_report(name, samples, [], math.inf, lattice, required=required)
    report.threshold = limit
    report.stable = report.passed = bool(math.isfinite(report.fitted_constant) and report.fitted_constant <= limit)
    return report


def _samples(rows: List[Dict], metric: str, transform: Callable[[float], float] = lambda v: v) -> List[Dict]:
    return [{"coords": dict(r["_params"]), "ratio": transform(r["value"])} for r in rows if r["metric"] == metric]


def _grid(cfg: ExperimentConfig, cap: Optional[int] = None, d: Optional[int] = None):
    cap = cfg.degree_cap if cap is None else int(cap)
    m = cfg.node_count or 2 * cap + 8
    return gauss_hermite_grid(max(m, cap + 1), cfg.d if d is None else d)


def _psd_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g @ np.conj(g.T) / n + 0.1 * np.eye(n)


def gaussian_bump(grid, matrix: np.ndarray, center: Sequence[float] = ()) -> MatrixField:
    """e^{-|x - c|^2 / 2} times a fixed PSD matrix."""
    c = np.asarray(center if len(center) else np.zeros(grid.d), dtype=float)
    profile = np.exp(-0.5 * np.sum((grid.points - c) ** 2, axis=1))
    return MatrixField(grid, profile[:, None, None] * matrix[None], hermitian=True, positive=True)


def _bump_sum(grid, rng: np.random.Generator, n: int, centers: Sequence[float]) -> MatrixField:
    total = None
    for c in centers:
        f = gaussian_bump(grid, _psd_matrix(rng, n), np.full(grid.d, c))
        total = f if total is None else total + f
    return MatrixField(grid, total.samples, hermitian=True, positive=True)


def _within(values: Sequence[float], factor: float) -> bool:
    return bool(values) and all(math.isfinite(v) for v in values) and spread(values) <= factor


# ---------------------------------------------------------------------------
# riesz-convergence


def _trend_report(name: str, radii: Sequence[float], errors: Sequence[float], p: float, drop: float = 1e-3) -> ProbeReport:
    first = errors[0] if errors else 0.0
    samples = [
        {"coords": {"R": float(R), "p": p}, "ratio": (e / first) if first > 0 else 0.0}
        for R, e in zip(radii, errors)
    ]
    monotone = all(b <= a * (1 + 1e-12) + 1e-300 for a, b in zip(errors, errors[1:]))
    final = samples[-1]["ratio"] if samples else 0.0
    report = fit_report(name, samples, [], drop, {"radii": list(radii), "p": p}, extra={"monotone": monotone, "final_ratio": final})
    report.stability = final
    report.stable = report.passed = bool(monotone and final <= drop)
    return report


def _plan_riesz_convergence(cfg: ExperimentConfig) -> Plan:
    kind = cfg.kind

    def convergence(p: float) -> Partial:
        grid = _grid(cfg)
        f = gaussian_bump(grid, _psd_matrix(rng_for(cfg.seed, 0), cfg.matrix_size))
        errors = riesz_convergence_curve(f, cfg.alpha, cfg.radii, p)
        shifted = gaussian_bump(grid, _psd_matrix(rng_for(cfg.seed, 2), cfg.matrix_size), np.full(grid.d, SHIFTED_CENTER))
        spread_errors = riesz_convergence_curve(shifted, cfg.alpha, cfg.radii, p)
        rows = [row(kind, "lp_error", e, R=R, p=p, alpha=cfg.alpha, d=cfg.d) for R, e in zip(cfg.radii, errors)]
        rows += [
            row(kind, "lp_error_shifted", e, R=R, p=p, alpha=cfg.alpha, d=cfg.d, center=SHIFTED_CENTER)
            for R, e in zip(cfg.radii, spread_errors)
        ]
        # many levels: only the 1/R rate is checked
        rate = RATE_SLACK * float(cfg.radii[0]) / float(cfg.radii[-1])
        return Partial(
            rows,
            [
                _trend_report(f"riesz-convergence p={p}", cfg.radii, errors, p),
                _trend_report(f"riesz-convergence-shifted p={p}", cfg.radii, spread_errors, p, drop=rate),
            ],
            curve(
                "riesz_convergence",
                cfg.radii,
                {f"p={p}": errors, f"p={p} shifted": spread_errors},
                "R",
                "||S_R f - f||_p",
            ),
        )

    def order_lift() -> Partial:
        grid = _grid(cfg)
        f = random_band_limited(rng_for(cfg.seed, 1), grid, cfg.degree_cap, cfg.matrix_size)
        rows = []
        for alpha, beta in ((1.0, 1.0), (0.5, 2.0)):
            for R in cfg.radii[:3]:
                res = order_lift_residual(f, R, alpha, beta, 64)
                rows.append(row(kind, "order_lift_residual", res, R=R, alpha=alpha, beta=beta, d=cfg.d))
        report = limit_report("order-lift", _samples(rows, "order_lift_residual"), 1e-6, {"radii": cfg.radii[:3]})
        return Partial(rows, [report])

    tasks = [Task(("convergence", float(p)), lambda p=p: convergence(p)) for p in cfg.p_values]
    tasks.append(Task(("order-lift",), order_lift))
    return Plan(tasks)


# ---------------------------------------------------------------------------
# riesz-kernel-probe


def _plan_riesz_kernel(cfg: ExperimentConfig) -> Plan:
    kind, d = cfg.kind, cfg.d
    p = next((float(v) for v in cfg.p_values if 1.0 <= v <= 2.0), 2.0)

    def decay() -> Partial:
        if d == 1:
            lattice = {"radii": list(cfg.radii), "xs": list(cfg.x_values), "ys": list(cfg.y_values)}
            report = kernel_decay_report(cfg.alpha, lattice, "d1", d=1, threshold=cfg.threshold)
        else:
            lattice = {
                "radii": list(cfg.radii),
                "r_values": list(cfg.r_values),
                "x_points": [[float(x)] * d for x in cfg.x_values[:2]],
            }
            report = kernel_decay_report(cfg.alpha, lattice, "hd", p=p, d=d, threshold=cfg.threshold)
        rows = [
            row(kind, "kernel_ratio", s["ratio"], alpha=cfg.alpha, d=d,
                **{k: (str(v) if isinstance(v, list) else v) for k, v in s["coords"].items()})
            for s in report.samples
        ]
        slices: Dict[float, float] = {}
        for s in report.samples:
            R = s["coords"]["R"]
            slices[R] = max(slices.get(R, 0.0), s["ratio"])
        xs = sorted(slices)
        return Partial(rows, [report], curve(f"riesz_kernel_d{d}", xs, {f"alpha={cfg.alpha}": [slices[R] for R in xs]}, "R", "fitted constant"))

    def sandwich() -> Partial:
        grid = _grid(cfg)
        mode = "d1" if d == 1 else "hd"
        params = RieszParams(float(cfg.radii[0]), cfg.alpha, d)
        radii = list(cfg.radii[:3])
        rows, reports, constants = [], [], {}
        for n in sorted({1, cfg.matrix_size}):
            f = _bump_sum(grid, rng_for(cfg.seed, 2, n), n, (-1.0, 0.5))
            rep = sandwich_check(f, params, mode, radii, threshold=cfg.threshold)
            rep.name = f"{rep.name} n={n}"
            reports.append(rep)
            constants[n] = rep.fitted_constant
            rows.append(row(kind, "sandwich_constant", rep.fitted_constant, n=n, mode=mode, alpha=cfg.alpha, d=d))
            rows.append(row(kind, "sandwich_residual", rep.extra["min_relative_residual"], n=n, mode=mode, alpha=cfg.alpha, d=d))
        values = list(constants.values())
        consistency = fit_report(
            "sandwich-consistency",
            [{"coords": {"n": n}, "ratio": v} for n, v in constants.items()],
            ["n"],
            2.0,
            {"matrix_sizes": sorted(constants)},
        )
        consistency.stable = consistency.passed = _within(values, 2.0)
        reports.append(consistency)
        return Partial(rows, reports)

    def scale_function() -> Partial:
        if cfg.alpha <= (d - 1) / 2.0:
            return Partial()
        k_range = 40
        rows, samples = [], []
        a = float(cfg.alpha)

        def term(s: float) -> float:
            return s ** (d / 2.0) * (1.0 + s) ** (-a - 0.5)

        for j in range(-3, 4):
            t = 2.0 ** j
            g1 = scale_function_G(t, a, d, k_range)
            g2 = scale_function_G(2 * t, a, d, k_range)
            boundary = term(math.ldexp(t, k_range + 1)) - term(math.ldexp(t, -k_range))
            defect = abs(g2 - g1 - boundary) / g1
            rows.append(row(kind, "scale_G", g1, t=t, alpha=a, d=d))
            rows.append(row(kind, "scale_G_shift_defect", defect, t=t, alpha=a, d=d))
            samples.append({"coords": {"t": t}, "ratio": defect})
        return Partial(rows, [limit_report("scale-function", samples, 1e-8, {"k_range": k_range, "alpha": a, "d": d})])

    return Plan([Task(("decay",), decay), Task(("sandwich",), sandwich), Task(("scale",), scale_function)])


# ---------------------------------------------------------------------------
# semigroup-gfunction


def _kernel_nodes(cap: int, t: float) -> int:
    """Node count at which the Mehler quadrature of a degree-cap field is accurate to ~1e-8."""
    return max(2 * cap + 8, int(math.ceil((9.5 / t + cap + 1) / 2.0)))


def _plan_semigroup(cfg: ExperimentConfig) -> Plan:
    kind, d, cap = cfg.kind, cfg.d, cfg.degree_cap
    tg = time_grid(n_max=2 * cap + d, points=cfg.time_points, t_min=cfg.t_min, t_max=cfg.t_max)
    kernel_times = [float(t) for t in cfg.t_values if t >= 0.05]

    def sample(i: int) -> Partial:
        grid = _grid(cfg)
        f = random_band_limited(rng_for(cfg.seed, 3, i), grid, cap, cfg.matrix_size)
        norm = nc_lp_norm(f, 2.0)
        rows = [row(kind, "g_l2_ratio", nc_lp_norm(g_function(f, tg), 2.0) / norm, sample=i, d=d)]
        t, s = float(cfg.t_values[0]), float(cfg.t_values[-1])
        law = semigroup_apply(semigroup_apply(f, t), s) - semigroup_apply(f, t + s)
        rows.append(row(kind, "semigroup_law_defect", nc_lp_norm(law, 2.0) / norm, sample=i, t=t, s=s, d=d))
        for tt in cfg.t_values:
            excess = nc_lp_norm(semigroup_apply(f, tt), 2.0) / norm - math.exp(-d * tt)
            rows.append(row(kind, "contraction_excess", max(excess, 0.0), sample=i, t=tt, d=d))
        if kernel_times and i < 3:
            kgrid = gauss_hermite_grid(_kernel_nodes(cap, min(kernel_times)), d)
            fk = random_band_limited(rng_for(cfg.seed, 4, i), kgrid, cap, cfg.matrix_size)
            fk_norm = nc_lp_norm(fk, 2.0)
            for tt in kernel_times:
                gap = semigroup_apply(fk, tt, "kernel", cap) - semigroup_apply(fk, tt, "spectral", cap)
                rows.append(row(kind, "kernel_spectral_gap", nc_lp_norm(gap, 2.0) / fk_norm, sample=i, t=tt, d=d))
        return Partial(rows)

    def chain() -> Partial:
        grid = _grid(cfg)
        f = random_band_limited(rng_for(cfg.seed, 5), grid, cap, cfg.matrix_size)
        reports = [gk_chain_report(f, k, tg, cfg.threshold) for k in (cfg.k, cfg.k + 1)]
        rows = [row(kind, "g_chain_constant", r.fitted_constant, k=r.lattice["k"], d=d) for r in reports]
        return Partial(rows, reports)

    def g_star() -> Partial:
        grid = _grid(cfg)
        f = random_band_limited(rng_for(cfg.seed, 6), grid, cap, cfg.matrix_size)
        gs = g_star_k(f, float(cfg.k), tg)
        rows = [row(kind, "g_star_lp_ratio", nc_lp_norm(gs, p) / nc_lp_norm(f, p), k=cfg.k, p=p, d=d) for p in cfg.p_values]
        low = g_k_square(f, 1, tg, None)
        high = g_star_square(f, float(cfg.k), tg, None)
        report = psd_domination_report(f"g-by-gstar k={cfg.k}", low, high, grid.points, cfg.threshold, {"k": cfg.k})
        rows.append(row(kind, "g_by_gstar_constant", report.fitted_constant, k=cfg.k, d=d))
        return Partial(rows, [report])

    def continuity() -> Partial:
        grid = _grid(cfg)
        f = random_band_limited(rng_for(cfg.seed, 7), grid, cap, cfg.matrix_size)
        times = [float(t) for t in log_spaced(1e-4, 1.0, 9)]
        values = semigroup_continuity_curve(f, times)
        rows = [row(kind, "continuity", v, t=t, d=d) for t, v in zip(times, values)]
        rows.append(row(kind, "time_truncation_defect", truncation_defect(tg, 2 * cap + d), N=2 * cap + d))
        return Partial(rows, [], curve("semigroup_continuity", times, {f"d={d}": values}, "t", "||H^t f - f||_2"))

    def finish(rows: List[Dict]) -> Partial:
        reports = [
            limit_report("g-l2-identity", _samples(rows, "g_l2_ratio", lambda v: abs(v - 0.5)), 1e-3, {"samples": cfg.samples}),
            limit_report("semigroup-law", _samples(rows, "semigroup_law_defect"), 1e-8, {"t_values": cfg.t_values}),
            limit_report("semigroup-contraction", _samples(rows, "contraction_excess"), 1e-10, {"t_values": cfg.t_values}),
        ]
        gaps = _samples(rows, "kernel_spectral_gap")
        if gaps:
            reports.append(limit_report("semigroup-modes", gaps, 1e-6, {"t_values": kernel_times}))
        return Partial([], reports)

    tasks = [Task(("sample", i), lambda i=i: sample(i)) for i in range(cfg.samples)]
    tasks += [Task(("chain",), chain), Task(("continuity",), continuity)]
    if d == 1:
        tasks.append(Task(("g-star",), g_star))
    return Plan(tasks, finish)


# ---------------------------------------------------------------------------
# mehler-probe


def spectral_mehler(t: float, x: float, y: float, levels: int = _SPECTRAL_LEVELS):
    """sum_{n <= levels} e^{-(2n+1)t} phi_n(x) phi_n(y) and the sum of absolute terms."""
    tab = phi_table(np.array([x, y]), levels)
    terms = np.exp(-(2 * np.arange(levels + 1) + 1) * t) * tab[:, 0] * tab[:, 1]
    return float(np.sum(terms)), float(np.sum(np.abs(terms)))


def _plan_mehler(cfg: ExperimentConfig) -> Plan:
    kind = cfg.kind
    if not cfg.t_values or not cfg.x_values or not cfg.y_values:
        raise InputError("mehler-probe lattice has no points")

    def match(t: float) -> Partial:
        rows = []
        for x in cfg.x_values:
            for y in cfg.y_values:
                s, scale = spectral_mehler(t, x, y)
                k = mehler_kernel(t, [x], [y])
                rows.append(row(kind, "spectral_mismatch", abs(k - s) / max(abs(s), 1e-8 * scale, 1e-300), t=t, x=x, y=y))
        return Partial(rows)

    def bounds() -> Partial:
        lattice = {"t_values": list(cfg.t_values), "x_values": list(cfg.x_values), "y_values": list(cfg.y_values)}
        report = kernel_bound_report(lattice, cfg.d, threshold=cfg.threshold)
        rows = [row(kind, "kernel_bound_constant", v, item=item, d=cfg.d) for item, v in report.slice_constants.items()]
        return Partial(rows, [report])

    def finish(rows: List[Dict]) -> Partial:
        samples = _samples(rows, "spectral_mismatch")
        return Partial([], [limit_report("mehler-spectral-match", samples, 1e-6, {"levels": _SPECTRAL_LEVELS})])

    tasks = [Task(("match", float(t)), lambda t=t: match(float(t))) for t in cfg.t_values]
    tasks.append(Task(("bounds",), bounds))
    return Plan(tasks, finish)


# ---------------------------------------------------------------------------
# marcinkiewicz


def _plan_marcinkiewicz(cfg: ExperimentConfig) -> Plan:
    kind, d = cfg.kind, cfg.d
    mu = parse_multiplier(cfg.multiplier)
    caps = [int(c) for c in cfg.degree_caps]

    def condition() -> Partial:
        report = marcinkiewicz_report(mu, cfg.order, cfg.n_max)
        rows = [
            row(kind, "C_r", v, r=int(r), N_max=m, multiplier=mu.tag)
            for r, cs in report.extra["C_r"].items()
            for m, v in zip(report.lattice["N_max"], cs)
        ]
        return Partial(rows, [report])

    def control() -> Partial:
        rep = marcinkiewicz_report(parity(), 1, cfg.n_max)
        flipped = dataclasses.replace(
            rep,
            name="marcinkiewicz-control parity",
            passed=not rep.passed,
            extra={**rep.extra, "expected": "condition fails"},
        )
        return Partial([row(kind, "control_growth", rep.stability, multiplier="parity")], [flipped])

    def lp_ratio(p: float) -> Partial:
        report = lp_ratio_sweep(mu, p, caps, cfg.samples, cfg.seed, d, cfg.matrix_size)
        intervals = report.extra["interval"]
        rows = []
        for c in caps:
            lo, hi = intervals[str(c)]
            rows.append(row(kind, "lp_ratio_min", lo, cap=c, p=p, multiplier=mu.tag))
            rows.append(row(kind, "lp_ratio_max", hi, cap=c, p=p, multiplier=mu.tag))
        return Partial(rows, [report], curve("marcinkiewicz_lp_ratio", caps, {f"p={p}": [intervals[str(c)][1] for c in caps]}, "degree cap", "max ||T f||_p / ||f||_p"))

    def m_kernel() -> Partial:
        lattice = {"t_values": list(cfg.t_values), "x_values": list(cfg.x_values), "y_values": list(cfg.y_values)}
        report = M_kernel_report(mu, cfg.k, lattice, d, max(256, cfg.degree_cap), cfg.threshold, cfg.n_max)
        rows = [row(kind, "M_kernel_constant", v, item=item, k=cfg.k, multiplier=mu.tag) for item, v in report.slice_constants.items()]
        return Partial(rows, [report])

    def domination(cap: int) -> Partial:
        grid = _grid(cfg, cap)
        f = random_band_limited(rng_for(cfg.seed, 8, cap), grid, cap, cfg.matrix_size)
        tg = time_grid(n_max=2 * cap + d, points=cfg.time_points, t_min=cfg.t_min, t_max=cfg.t_max)
        report = domination_check(f, mu, cfg.k, tg, cfg.threshold)
        report.name = f"{report.name} cap={cap}"
        rows = [
            row(kind, "domination_constant", report.fitted_constant, cap=cap, k=cfg.k, multiplier=mu.tag),
            row(kind, "domination_residual", report.extra["min_relative_residual"], cap=cap, k=cfg.k, multiplier=mu.tag),
        ]
        return Partial(rows, [report])

    def finish(rows: List[Dict]) -> Partial:
        samples = _samples(rows, "domination_constant")
        if not samples:
            return Partial()
        report = fit_report("domination-stability", samples, ["cap"], 2.0, {"caps": caps, "k": cfg.k})
        return Partial([], [report])

    tasks = [Task(("condition",), condition), Task(("control",), control), Task(("m-kernel",), m_kernel)]
    tasks += [Task(("lp", float(p)), lambda p=p: lp_ratio(float(p))) for p in cfg.p_values]
    if cfg.k > d / 2.0:
        tasks += [Task(("domination", c), lambda c=c: domination(c)) for c in caps]
    else:
        warn(f"pointwise domination needs k > d/2; skipped for k={cfg.k}, d={d}")
    return Plan(tasks, finish)


# ---------------------------------------------------------------------------
# oscillating-probe and h1-atoms


def _require_d1(cfg: ExperimentConfig) -> None:
    if cfg.d != 1:
        raise InputError(f"{cfg.kind} runs in one dimension, got d={cfg.d}")


def _oscillation_times(cfg: ExperimentConfig, lo: float = 0.0) -> List[float]:
    ts = [float(t) for t in cfg.t_values if lo <= t <= math.pi / 4 + 1e-12 and t > 0]
    if not ts:
        raise InputError(f"{cfg.kind} needs t_values in ({lo}, pi/4], got {cfg.t_values}")
    return ts


def _plan_oscillating(cfg: ExperimentConfig) -> Plan:
    _require_d1(cfg)
    kind = cfg.kind
    ts = _oscillation_times(cfg)

    def bounds(e: float) -> Partial:
        params = OscillatingParams(ts[0], 0.5, kernel_exponent=e)
        report = oscillating_bounds_report(
            {"t_values": ts, "x_values": list(cfg.x_values), "z_values": list(_OFFSETS)}, params, cfg.threshold
        )
        rows = [row(kind, "bound_constant", v, item=item, exponent=e) for item, v in report.slice_constants.items()]
        return Partial(rows, [report])

    def self_convergence() -> Partial:
        rows = []
        for t in ts:
            for x in cfg.x_values[:3]:
                for z in _OFFSETS[::3]:
                    gap = kernel_self_convergence(x, x + z, OscillatingParams(t, 0.5))
                    rows.append(row(kind, "lambda_self_convergence", gap, t=t, x=x, z=z))
        return Partial(rows, [limit_report("lambda-quadrature", _samples(rows, "lambda_self_convergence"), 1e-8, {"t_values": ts})])

    def isometry() -> Partial:
        grid = _grid(cfg)
        rows = []
        for i in range(min(cfg.samples, 5)):
            f = random_band_limited(rng_for(cfg.seed, 9, i), grid, cfg.degree_cap, cfg.matrix_size)
            for t in ts:
                out = apply_oscillating(f, OscillatingParams(t, 0.0))
                rows.append(row(kind, "isometry_defect", abs(nc_lp_norm(out, 2.0) / nc_lp_norm(f, 2.0) - 1.0), sample=i, t=t))
        return Partial(rows, [limit_report("oscillating-isometry", _samples(rows, "isometry_defect"), 1e-10, {"t_values": ts})])

    tasks = [Task(("bounds", float(e)), lambda e=e: bounds(float(e))) for e in cfg.kernel_exponents]
    tasks += [Task(("self-convergence",), self_convergence), Task(("isometry",), isometry)]
    return Plan(tasks)


def _plan_h1(cfg: ExperimentConfig) -> Plan:
    _require_d1(cfg)
    kind = cfg.kind
    ts = _oscillation_times(cfg, cfg.t0)
    sizes = sorted({1, cfg.matrix_size})

    def atoms(n: int) -> Partial:
        report = h1_atom_test(
            OscillatingParams(ts[0], 0.5),
            cfg.deltas,
            ts,
            samples=cfg.samples,
            seed=cfg.seed,
            matrix_size=n,
            degree_cap=cfg.degree_cap,
            t0=cfg.t0,
        )
        rows = [row(kind, "atom_ratio", s["ratio"], n=n, **s["coords"]) for s in report.samples]
        sup: Dict[float, float] = {}
        for s in report.samples:
            dl = s["coords"]["delta"]
            sup[dl] = max(sup.get(dl, 0.0), s["ratio"])
        xs = sorted(sup)
        return Partial(rows, [report], curve("h1_atoms", xs, {f"n={n}": [sup[v] for v in xs]}, "cube side", "sup ||T a||_1 / |Q|"))

    def finish(rows: List[Dict]) -> Partial:
        sups = {}
        for r in rows:
            if r["metric"] == "atom_ratio":
                n = r["_params"]["n"]
                sups[n] = max(sups.get(n, 0.0), r["value"])
        if len(sups) < 2:
            return Partial()
        report = fit_report("h1-consistency", [{"coords": {"n": n}, "ratio": v} for n, v in sups.items()], ["n"], 2.0, {"matrix_sizes": sizes})
        return Partial([], [report])

    return Plan([Task(("atoms", n), lambda n=n: atoms(n)) for n in sizes], finish)


# ---------------------------------------------------------------------------
# norm-equivalence


def _plan_norm_equivalence(cfg: ExperimentConfig) -> Plan:
    kind, d = cfg.kind, cfg.d
    caps = [int(c) for c in cfg.degree_caps]

    def ratios(cap: int) -> Partial:
        grid = _grid(cfg, cap)
        tg = time_grid(n_max=2 * cap + d, points=cfg.time_points, t_min=cfg.t_min, t_max=cfg.t_max)
        rows = []
        for i in range(cfg.samples):
            f = random_band_limited(rng_for(cfg.seed, 10, cap, i), grid, cap, cfg.matrix_size)
            col, rw = g_function(f, tg), g_function(f.adjoint(), tg)
            for p in cfg.p_values:
                a, b = nc_lp_norm(col, p), nc_lp_norm(rw, p)
                ep = min(a, b) if p < 2 else max(a, b)
                rows.append(row(kind, "ep_ratio", ep / nc_lp_norm(f, p), cap=cap, p=float(p), sample=i))
        return Partial(rows)

    def finish(rows: List[Dict]) -> Partial:
        reports, curves = [], {}
        for p in cfg.p_values:
            lows, highs = [], []
            for cap in caps:
                vals = [r["value"] for r in rows if r["metric"] == "ep_ratio" and r["_params"]["p"] == float(p) and r["_params"]["cap"] == cap]
                lows.append(min(vals))
                highs.append(max(vals))
            samples = [{"coords": {"cap": c, "p": float(p)}, "ratio": h} for c, h in zip(caps, highs)]
            report = fit_report(f"norm-equivalence p={p}", samples, ["cap"], 2.0, {"caps": caps, "samples": cfg.samples})
            report.extra["interval"] = {str(c): [lo, hi] for c, lo, hi in zip(caps, lows, highs)}
            report.stability = max(spread(lows), spread(highs))
            report.stable = report.passed = _within(lows, 2.0) and _within(highs, 2.0)
            reports.append(report)
            curves.update(curve(f"norm_equivalence_p{p}", caps, {"min": lows, "max": highs}, "degree cap", "E_p / L_p"))
        return Partial([], reports, curves)

    return Plan([Task(("ratios", c), lambda c=c: ratios(c)) for c in caps], finish)


# ---------------------------------------------------------------------------
# identities: orthonormality, Parseval, operator Cauchy-Schwarz


def _plan_identities(cfg: ExperimentConfig) -> Plan:
    kind = cfg.kind

    def orthonormality() -> Partial:
        grid = gauss_hermite_grid(65, 1)
        tab = phi_table(grid.axis_nodes[0], 64)
        gram = (tab * grid.weights) @ tab.T
        defect = float(np.max(np.abs(gram - np.eye(65))))
        rows = [row(kind, "orthonormality_defect", defect, levels=64, nodes=65)]
        return Partial(rows, [limit_report("orthonormality", _samples(rows, "orthonormality_defect"), 1e-10, {"levels": 64})])

    def parseval(d: int) -> Partial:
        cap = min(cfg.degree_cap, 32)
        grid = gauss_hermite_grid(cap + 1, d)
        rows = []
        for i in range(min(cfg.samples, 5)):
            f = random_band_limited(rng_for(cfg.seed, 11, d, i), grid, cap, cfg.matrix_size)
            energy = nc_lp_norm(f, 2.0) ** 2
            rows.append(row(kind, "parseval_defect", abs(energy - coeff_norm2(analyze(f))) / energy, d=d, sample=i))
        return Partial(rows, [limit_report(f"parseval d={d}", _samples(rows, "parseval_defect"), 1e-8, {"degree_cap": cap})])

    def cauchy_schwarz() -> Partial:
        grid = gauss_hermite_grid(24, 1)
        w = grid.weights
        rows = []
        for i in range(100):
            rng = rng_for(cfg.seed, 12, i)
            phi = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
            f = random_band_limited(rng, grid, 12, cfg.matrix_size)
            scale = float(np.sum(w * np.abs(phi) ** 2)) * float(np.sum(w * np.sum(np.abs(f.samples) ** 2, axis=(1, 2))))
            rows.append(row(kind, "cauchy_schwarz_residual", op_cauchy_schwarz_residual(phi, f) / scale, instance=i))
        samples = _samples(rows, "cauchy_schwarz_residual", lambda v: max(-v, 0.0))
        return Partial(rows, [limit_report("operator-cauchy-schwarz", samples, 1e-10, {"instances": 100})])

    tasks = [Task(("orthonormality",), orthonormality), Task(("cauchy-schwarz",), cauchy_schwarz)]
    tasks += [Task(("parseval", d), lambda d=d: parseval(d)) for d in (1, 2)]
    return Plan(tasks)


PLANNERS: Dict[str, Callable[[ExperimentConfig], Plan]] = {
    "riesz-convergence": _plan_riesz_convergence,
    "riesz-kernel-probe": _plan_riesz_kernel,
    "semigroup-gfunction": _plan_semigroup,
    "mehler-probe": _plan_mehler,
    "marcinkiewicz": _plan_marcinkiewicz,
    "oscillating-probe": _plan_oscillating,
    "h1-atoms": _plan_h1,
    "norm-equivalence": _plan_norm_equivalence,
    "identities": _plan_identities,
}


def build_plan(cfg: ExperimentConfig) -> Plan:
    if cfg.kind not in PLANNERS:
        raise InputError(f"unknown experiment kind {cfg.kind!r}; known: {', '.join(KINDS)}")
    return PLANNERS[cfg.kind](cfg)


def verify_configs(seed: int = 0) -> List[ExperimentConfig]:
    """The built-in acceptance battery, sized to run each item in well under a minute."""
    quarter = math.pi / 4
    return [
        ExperimentConfig(kind="identities", seed=seed),
        ExperimentConfig(kind="riesz-convergence", alpha=1.0, degree_cap=16, p_values=[1.5, 2.0, 4.0], seed=seed),
        ExperimentConfig(kind="riesz-kernel-probe", alpha=0.5, radii=[64.0, 256.0, 1024.0], x_values=[-2.0, -0.5, 0.0, 1.0, 3.0], seed=seed),
        ExperimentConfig(
            kind="riesz-kernel-probe", d=2, alpha=1.0, p_values=[2.0], radii=[16.0, 32.0], r_values=[0.25, 1.0],
            degree_cap=10, x_values=[0.0, 0.5], seed=seed,
        ),
        ExperimentConfig(kind="semigroup-gfunction", degree_cap=32, t_values=[0.05, 0.1, 0.5], samples=20, seed=seed),
        ExperimentConfig(kind="mehler-probe", t_values=[0.1, 0.5, 1.0], seed=seed),
        ExperimentConfig(
            kind="marcinkiewicz", multiplier="unimodular_power gamma=1", order=2, n_max=4096,
            p_values=[1.5, 3.0], degree_caps=[32, 64, 128], samples=20, t_values=[0.1, 0.5, 1.0], seed=seed,
        ),
        ExperimentConfig(kind="oscillating-probe", t_values=[0.4, 0.6, quarter], kernel_exponents=[-0.5, -1.0], seed=seed),
        ExperimentConfig(kind="h1-atoms", t_values=[0.5, quarter], deltas=[2.0 ** j for j in range(-3, 4)], samples=20, degree_cap=512, seed=seed),
        ExperimentConfig(kind="norm-equivalence", p_values=[1.5, 2.0, 3.0, 4.0], degree_caps=[16, 32], samples=20, seed=seed),
    ]
