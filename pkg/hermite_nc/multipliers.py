"""
multipliers.py
Spectral multipliers T_mu f = sum_n mu(2n + d) P_n f.

- a small catalogue of named multipliers, parsed from config strings such as
  "unimodular_power gamma=1" or "heat t=0.5 * parity"
- finite differences and the Marcinkiewicz condition |delta^r mu(N)| <= C N^{-r}
- probes for the kernel M(t, x, y) = sum_nu e^{-Nt} mu(N) Phi_nu(x) Phi_nu(y)
  and for the pointwise domination g_{k+1}(T_mu f) <= C g*_k(f)
"""

from __future__ import annotations
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.special import comb

from .errors import InputError
from .expansion import apply_level_multiplier, random_band_limited
from .hermite import diagonal_kernel, gauss_hermite_grid
from .nc import nc_lp_norm
from .probes import combine_reports, fit_report
from .semigroup import g_star_square, g_k_square, psd_domination_report
from .types import MatrixField, MultiplierSpec, OscillatingParams, ProbeReport, TimeGrid
from .util import rng_for, warn

# ---------------------------------------------------------------------------
# catalogue


def constant(value: complex = 1.0) -> MultiplierSpec:
    c = complex(value)
    return MultiplierSpec(f"constant value={value}", lambda N: np.full(np.shape(N), c))


def unimodular_power(gamma: float = 1.0) -> MultiplierSpec:
    """N^{i gamma}."""
    return MultiplierSpec(f"unimodular_power gamma={gamma}", lambda N: np.exp(1j * gamma * np.log(N)))


def inverse_power(alpha: float = 1.0) -> MultiplierSpec:
    """N^{-alpha}."""
    return MultiplierSpec(f"inverse_power alpha={alpha}", lambda N: N ** (-float(alpha)))


def oscillating(alpha: float = 0.5, t: float = math.pi / 4) -> MultiplierSpec:
    """N^{-alpha} e^{i N t}."""
    return MultiplierSpec(
        f"oscillating alpha={alpha} t={t}", lambda N: N ** (-float(alpha)) * np.exp(1j * float(t) * N)
    )


def heat(t: float = 1.0) -> MultiplierSpec:
    """e^{-N t}."""
    return MultiplierSpec(f"heat t={t}", lambda N: np.exp(-float(t) * N))


def parity() -> MultiplierSpec:
    """(-1)^N; violates the first-difference condition."""
    return MultiplierSpec("parity", lambda N: np.where(np.mod(np.rint(N), 2) == 0, 1.0, -1.0))


def table(path: str) -> MultiplierSpec:
    """Explicit values from a CSV with header N,re,im (integer N >= 1)."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"multiplier table not found: {p}")
    data = np.atleast_2d(np.loadtxt(p, delimiter=",", skiprows=1))
    if data.shape[1] != 3:
        raise InputError(f"multiplier table {p} needs columns N,re,im")
    values = {int(n): complex(re, im) for n, re, im in data}

    def evaluate(N: np.ndarray) -> np.ndarray:
        flat = np.rint(np.ravel(N)).astype(int)
        missing = [int(n) for n in flat if int(n) not in values]
        if missing:
            raise InputError(f"multiplier table {p} has no value for N={missing[0]}")
        return np.array([values[int(n)] for n in flat]).reshape(np.shape(N))

    return MultiplierSpec(f"table path={path}", evaluate)


CATALOGUE: Dict[str, Callable[..., MultiplierSpec]] = {
    "constant": constant,
    "unimodular_power": unimodular_power,
    "inverse_power": inverse_power,
    "oscillating": oscillating,
    "heat": heat,
    "parity": parity,
    "table": table,
}


def _parse_one(text: str) -> MultiplierSpec:
    parts = text.split()
    if not parts:
        raise InputError("empty multiplier description")
    name, args = parts[0], parts[1:]
    if name not in CATALOGUE:
        raise InputError(f"unknown multiplier {name!r}; known: {', '.join(sorted(CATALOGUE))}")
    kwargs = {}
    for a in args:
        key, sep, value = a.partition("=")
        if not sep:
            raise InputError(f"multiplier argument {a!r} must look like key=value")
        try:
            kwargs[key] = value if name == "table" else float(value)
        except ValueError:
            raise InputError(f"multiplier argument {a!r} is not a number")
    try:
        return CATALOGUE[name](**kwargs)
    except TypeError:
        raise InputError(f"multiplier {name!r} does not accept {sorted(kwargs)}")


def parse_multiplier(text: str) -> MultiplierSpec:
    """'name key=value ...' terms joined by '*' compose pointwise."""
    specs = [_parse_one(term) for term in str(text).split("*")]
    out = specs[0]
    for s in specs[1:]:
        out = out * s
    return out


# ---------------------------------------------------------------------------
# Marcinkiewicz condition


def finite_difference(mu: MultiplierSpec, r: int, N) -> np.ndarray:
    """delta^r mu(N) = sum_j (-1)^{r-j} C(r, j) mu(N + j)."""
    if r < 0:
        raise InputError(f"difference order must be >= 0, got {r}")
    N = np.asarray(N, dtype=float)
    out = np.zeros(N.shape, dtype=complex)
    for j in range(r + 1):
        out += (-1) ** (r - j) * comb(r, j, exact=True) * mu(N + j)
    return out


def marcinkiewicz_report(mu: MultiplierSpec, n: int, N_max: int, growth: float = 2.0) -> ProbeReport:
    """C_r = max_{N <= M} |delta^r mu(N)| N^r for r = 0..n and M in N_max/4, N_max/2, N_max.

    The condition holds when every C_r stays within `growth` of its value at N_max/4.
    """
    if n < 1:
        raise InputError(f"Marcinkiewicz order must be >= 1, got {n}")
    if N_max < 4:
        raise InputError(f"N_max must be >= 4, got {N_max}")
    caps = [N_max // 4, N_max // 2, N_max]
    N = np.arange(1, N_max + 1, dtype=float)
    samples, constants, growths = [], {}, []
    for r in range(n + 1):
        vals = np.abs(finite_difference(mu, r, N)) * N ** r
        running = np.maximum.accumulate(vals)
        cs = [float(running[m - 1]) for m in caps]
        constants[str(r)] = cs
        for m, c in zip(caps, cs):
            samples.append({"coords": {"N_max": m, "r": r}, "ratio": c})
        if cs[0] == 0.0:
            growths.append(1.0 if cs[-1] == 0.0 else math.inf)
        else:
            growths.append(cs[-1] / cs[0])
    report = fit_report(f"marcinkiewicz {mu.tag}", samples, [], growth, {"n": n, "N_max": caps})
    report.stability = max(growths)
    report.stable = report.passed = bool(math.isfinite(report.fitted_constant) and report.stability <= growth)
    report.extra["C_r"] = constants
    return report


def apply_Tmu(f: MatrixField, mu: MultiplierSpec, degree_cap: Optional[int] = None) -> MatrixField:
    return apply_level_multiplier(f, mu, degree_cap)


def apply_oscillating(f: MatrixField, params: OscillatingParams, degree_cap: Optional[int] = None) -> MatrixField:
    """sum_n N^{-alpha} e^{i N t} P_n f."""
    return apply_Tmu(f, oscillating(params.alpha, params.t), degree_cap)


# ---------------------------------------------------------------------------
# kernel M(t, x, y)


def truncation_time(degree_cap: int, d: int) -> float:
    """Smallest t at which the top retained level is damped by e^{-12}."""
    return 12.0 / (2 * degree_cap + d)


def m_kernel_levels(mu: MultiplierSpec, t: float, k: int, degree_cap: int, d: int) -> np.ndarray:
    N = 2 * np.arange(degree_cap + 1) + d
    return (-N.astype(float)) ** k * np.exp(-N * t) * mu(N)


def M_kernel_report(
    mu: MultiplierSpec,
    k: int,
    lattice: Dict[str, Sequence],
    d: int = 1,
    degree_cap: int = 256,
    threshold: float = 4.0,
    n_max: int = 4096,
) -> ProbeReport:
    """Fits |d_t^k M(t,x,y)| t^{d/2+k} and t^{d/2+k} int |x-y|^{2k} |d_t^k M(t,x,y)|^2 dy.

    lattice keys: t_values, x_values, y_values (coordinates repeated over the d axes).
    The bounds presume mu satisfies the Marcinkiewicz condition of order k; when
    it does not, the report is kept but marked optional and failed.
    """
    if k < 1:
        raise InputError(f"time-derivative order must be >= 1, got {k}")
    condition = marcinkiewicz_report(mu, k, n_max)
    t_cut = truncation_time(degree_cap, d)
    times = []
    for t in lattice["t_values"]:
        if float(t) < t_cut:
            warn(f"M kernel: t={t} is below the truncation time {t_cut:.4g} for degree_cap={degree_cap}; excluded")
        else:
            times.append(float(t))
    xs = [np.full(d, float(x)) for x in lattice["x_values"]]
    ys = np.array([np.full(d, float(y)) for y in lattice["y_values"]])
    if not times or not xs or ys.size == 0:
        raise InputError("M kernel lattice is empty after exclusions")
    grid = gauss_hermite_grid(degree_cap + k + 8, d)
    pts, w = grid.points, grid.weights
    sup_samples, moment_samples = [], []
    for t in times:
        levels = m_kernel_levels(mu, t, k, degree_cap, d)
        env = t ** (d / 2.0 + k)
        for x in xs:
            vals = np.abs(diagonal_kernel(levels, x, ys))
            for y, v in zip(ys, vals):
                sup_samples.append(
                    {"coords": {"t": t, "x": [float(c) for c in x], "y": [float(c) for c in y]}, "ratio": float(v) * env}
                )
            row = np.abs(diagonal_kernel(levels, x, pts)) ** 2
            moment = float(np.sum(w * np.sum((pts - x) ** 2, axis=1) ** k * row))
            moment_samples.append({"coords": {"t": t, "x": [float(c) for c in x]}, "ratio": moment * env})
    items = {
        "sup": fit_report("sup", sup_samples, ["t"], threshold, {}),
        "moment": fit_report("moment", moment_samples, ["t"], threshold, {}),
    }
    lat = {"k": k, "d": d, "degree_cap": degree_cap, "t_values": times, "excluded_below": t_cut}
    precondition = {"order": k, "N_max": n_max, "growth": condition.stability, "passed": condition.passed}
    report = combine_reports(f"M-kernel {mu.tag}", items, lat, threshold, head="sup", extra={"precondition": precondition})
    if not condition.passed:
        warn(f"M kernel: {mu.tag} fails the Marcinkiewicz condition of order {k}; bounds not claimed")
        report.required = False
        report.passed = False
    return report


def domination_check(
    f: MatrixField,
    mu: MultiplierSpec,
    k: int,
    time_grid: Optional[TimeGrid] = None,
    threshold: float = 4.0,
) -> ProbeReport:
    """Fitted C with g_{k+1}(T_mu f)(x)^2 <= C^2 g*_k(f)(x)^2 at every grid point."""
    d = f.grid.d
    if not k > d / 2.0:
        raise InputError(f"pointwise domination needs k > d/2, got k={k}, d={d}")
    big_f = apply_Tmu(f, mu)
    low = g_k_square(big_f, k + 1, time_grid, None)
    high = g_star_square(f, float(k), time_grid, None)
    return psd_domination_report(
        f"domination {mu.tag}", low, high, f.grid.points, threshold, {"k": k, "multiplier": mu.tag}
    )


def lp_ratio_sweep(
    mu: MultiplierSpec,
    p: float,
    caps: Sequence[int],
    samples: int = 20,
    seed: int = 0,
    d: int = 1,
    matrix_size: int = 2,
    growth: float = 2.0,
) -> ProbeReport:
    """||T_mu f||_p / ||f||_p over random band-limited f, sliced by degree_cap."""
    rows: List[Dict] = []
    for cap in caps:
        grid = gauss_hermite_grid(2 * int(cap) + 8, d)
        for i in range(samples):
            f = random_band_limited(rng_for(seed, int(cap), i), grid, int(cap), matrix_size)
            ratio = nc_lp_norm(apply_Tmu(f, mu, int(cap)), p) / nc_lp_norm(f, p)
            rows.append({"coords": {"cap": int(cap), "sample": i}, "ratio": ratio})
    report = fit_report(f"lp-ratio {mu.tag} p={p}", rows, ["cap"], growth, {"p": p, "caps": list(caps), "samples": samples})
    by_cap: Dict[int, List[float]] = {}
    for r in rows:
        by_cap.setdefault(r["coords"]["cap"], []).append(r["ratio"])
    report.extra["interval"] = {str(c): [min(v), max(v)] for c, v in by_cap.items()}
    return report
