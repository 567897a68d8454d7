"""
oscillating.py
Kernel of the oscillating multiplier N^{-1/2} e^{iNt} (d = 1) written as the
lambda-integral over (0, 1]

    K_t(x, y) = int_0^1 lambda^{-1/2} {sinh 2(lambda - it)}^e e^{-A} e^{iB} dlambda

with e = -1/2 (default) or -1, the four kernel bounds probed on a lattice, and
the L_1 test of T_t applied to column atoms.

lambda = u^2 removes the endpoint singularity: lambda^{-1/2} dlambda = 2 du.
Im sinh 2(lambda - it) < 0 on the whole path, so the principal power is
continuous; this is checked on every node set.
"""

from __future__ import annotations
import math
from typing import Dict, List, NamedTuple, Sequence

import numpy as np

from .errors import InputError, NumericError
from .expansion import analyze, level_values, synthesize
from .hermite import gauss_hermite_grid, gauss_legendre
from .multipliers import oscillating
from .nc import make_column_atom, nc_lp_norm, validate_atom
from .probes import combine_reports, fit_report
from .types import OscillatingParams, ProbeReport
from .util import rng_for, warn

H1_DEGREE_CAP = 512


class Phases(NamedTuple):
    """A, B and their derivatives at every lambda node."""

    A: np.ndarray
    B: np.ndarray
    dA_dy: np.ndarray
    dB_dy: np.ndarray
    dB_dlambda: np.ndarray


def phases(x: float, y: float, lam: np.ndarray, t: float) -> Phases:
    """Closed-form A_t, B_t. B carries sinh 2t in front; the shared denominator uses sin 2t."""
    lam = np.asarray(lam, dtype=float)
    s2l, c2l = np.sinh(2 * lam), np.cosh(2 * lam)
    sin2t, c2t = math.sin(2 * t), math.cos(2 * t)
    sh2t = math.sinh(2 * t)
    S = s2l ** 2 + sin2t ** 2
    dS = 2.0 * np.sinh(4 * lam)
    diff2, sq = (x - y) ** 2, x * x + y * y
    two_a = s2l / S * (c2t * diff2 + (c2l - c2t) * sq)
    P = c2l * diff2 - (c2l - c2t) * sq
    two_b = -sh2t * P / S
    two_a_y = s2l / S * (-2.0 * c2t * (x - y) + 2.0 * (c2l - c2t) * y)
    two_b_y = -sh2t / S * (-2.0 * c2l * (x - y) - 2.0 * (c2l - c2t) * y)
    dP = -4.0 * x * y * s2l
    two_b_l = -sh2t * (dP / S - P * dS / S ** 2)
    return Phases(0.5 * two_a, 0.5 * two_b, 0.5 * two_a_y, 0.5 * two_b_y, 0.5 * two_b_l)


def _nodes(count: int):
    u, w = gauss_legendre(0.0, 1.0, count)
    return u, 2.0 * w


def sinh_power(lam: np.ndarray, t: float, exponent: float) -> np.ndarray:
    """{sinh 2(lambda - it)}^exponent on the principal branch, continuity checked."""
    z = np.sinh(2.0 * (np.asarray(lam, dtype=float) - 1j * t))
    arg = np.angle(z)
    if arg.size > 1 and np.max(np.abs(np.diff(arg))) >= math.pi / 2:
        raise NumericError("branch of sinh 2(lambda - it) jumps along the lambda path", params={"t": t})
    return np.power(z, exponent)


def oscillating_kernel(x: float, y: float, params: OscillatingParams) -> complex:
    """int_0^1 lambda^{-1/2} {sinh 2(lambda - it)}^e e^{-A} e^{iB} dlambda."""
    u, w = _nodes(params.u_points)
    lam = u * u
    ph = phases(float(x), float(y), lam, params.t)
    vals = sinh_power(lam, params.t, params.kernel_exponent) * np.exp(-ph.A + 1j * ph.B)
    return complex(np.sum(w * vals))


def bound_items(x: float, y: float, params: OscillatingParams) -> Dict[str, complex]:
    """The four lambda-integrals behind the kernel bounds, without their envelopes."""
    u, w = _nodes(params.u_points)
    lam = u * u
    ph = phases(float(x), float(y), lam, params.t)
    k = sinh_power(lam, params.t, params.kernel_exponent) * np.exp(-ph.A)
    eib = np.exp(1j * ph.B)
    return {
        "plain": complex(np.sum(w * k)),
        "dy_kernel": complex(np.sum(w * (-ph.dA_dy * k) * eib)),
        "dy_phase": complex(np.sum(w * k * 1j * ph.dB_dy * eib)),
        "dlambda_phase": complex(np.sum(w * lam * k * 1j * ph.dB_dlambda * eib)),
    }


def _envelope(item: str, dist: float, t: float) -> float:
    if item == "plain":
        return dist
    if item == "dy_kernel":
        return dist ** 2
    if item == "dy_phase":
        return math.sin(2 * t) ** 1.5
    return dist ** 3


def oscillating_bounds_report(
    lattice: Dict[str, Sequence],
    params: OscillatingParams,
    threshold: float = 4.0,
) -> ProbeReport:
    """Fitted constants for the four lambda-integral bounds.

    lattice keys: t_values (default [params.t]), x_values, z_values with y = x + z.
    Points with x = y are left out.
    """
    t_values = [float(t) for t in lattice.get("t_values", [params.t])]
    pairs = [(float(x), float(x) + float(z)) for x in lattice["x_values"] for z in lattice["z_values"] if float(z) != 0.0]
    if not pairs or not t_values:
        raise InputError("oscillating lattice has no points")
    names = ("plain", "dy_kernel", "dy_phase", "dlambda_phase")
    samples: Dict[str, List[Dict]] = {n: [] for n in names}
    for t in t_values:
        p = OscillatingParams(t, params.alpha, params.u_points, params.kernel_exponent)
        for x, y in pairs:
            vals = bound_items(x, y, p)
            dist = abs(x - y)
            for n in names:
                coords = {"t": t, "x": x, "y": y}
                samples[n].append({"coords": coords, "ratio": abs(vals[n]) * _envelope(n, dist, t)})
    items = {n: fit_report(n, samples[n], ["t"], threshold, {}) for n in names}
    lat = {"t_values": t_values, "pairs": [list(p) for p in pairs], "kernel_exponent": params.kernel_exponent}
    return combine_reports(
        f"oscillating-bounds e={params.kernel_exponent}", items, lat, threshold, extra={"u_points": params.u_points}
    )


# ---------------------------------------------------------------------------
# H1 atoms


def _atom_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([int(seed), *keys]).generate_state(1)[0])


def h1_atom_test(
    params: OscillatingParams,
    deltas: Sequence[float],
    t_values: Sequence[float],
    samples: int = 20,
    seed: int = 0,
    matrix_size: int = 2,
    degree_cap: int = H1_DEGREE_CAP,
    cells: int = 64,
    t0: float = 0.3,
    threshold: float = 2.0,
) -> ProbeReport:
    """||T_t a||_1 / |Q| over random column atoms, sliced by cube side.

    Atoms are piecewise constant on `cells` cells and analyzed exactly; the
    image is synthesized on a Gauss-Hermite grid with 2 * degree_cap + 8 nodes.
    """
    if abs(params.alpha - 0.5) > 1e-12:
        raise InputError(f"the atom test runs at alpha = 1/2, got {params.alpha}")
    cap = min(int(degree_cap), H1_DEGREE_CAP)
    ts = [float(t) for t in t_values]
    if any(not (t0 <= t <= math.pi / 4 + 1e-12) for t in ts):
        raise InputError(f"atom test times must lie in [{t0}, pi/4], got {ts}")
    if not deltas:
        raise InputError("atom test needs at least one cube side")
    grid = gauss_hermite_grid(2 * cap + 8, 1)
    rows: List[Dict] = []
    skipped: List[Dict] = []
    for di, delta in enumerate(deltas):
        for i in range(samples):
            center = float(rng_for(seed, di, i).uniform(-2.0, 2.0))
            try:
                atom = make_column_atom(_atom_seed(seed, di, i), ((center,), float(delta)), matrix_size, cells=cells)
            except NumericError as e:
                warn(f"atom {i} at delta={delta} rejected: {e}")
                skipped.append({"delta": float(delta), "atom": i, "reason": str(e)})
                continue
            problems = validate_atom(atom)
            if problems:
                warn(f"atom {i} at delta={delta} fails {problems}; skipped")
                skipped.append({"delta": float(delta), "atom": i, "reason": problems})
                continue
            c = analyze(atom.field, cap)
            for t in ts:
                mu = oscillating(params.alpha, t)
                image = synthesize(c.scaled_by_level(level_values(c, mu)), grid)
                rows.append(
                    {
                        "coords": {"delta": float(delta), "t": t, "atom": i},
                        "ratio": nc_lp_norm(image, 1.0) / atom.volume,
                    }
                )
    return fit_report(
        f"h1-atoms n={matrix_size}",
        rows,
        ["delta", "t"],
        threshold,
        {"deltas": list(deltas), "t_values": ts, "samples": samples, "degree_cap": cap, "cells": cells},
        extra={"skipped": skipped},
    )


def kernel_self_convergence(x: float, y: float, params: OscillatingParams) -> float:
    """|K_t(x, y) with 2u nodes - K_t(x, y) with u nodes|."""
    fine = OscillatingParams(params.t, params.alpha, 2 * params.u_points, params.kernel_exponent)
    return abs(oscillating_kernel(x, y, fine) - oscillating_kernel(x, y, params))
