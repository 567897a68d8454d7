"""
nc.py
Noncommutative norm and order toolbox for matrix fields:
|A| = (A*A)^{1/2}, Schatten-type L_p norms under the trace-integral, weak L_p,
PSD ordering, the operator Cauchy-Schwarz residual, dyadic row/column BMO and
column atoms.

The trace is the unnormalized matrix trace throughout.
"""

from __future__ import annotations
import itertools, json, math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, NumericError
from .hermite import cell_edges, uniform_grid
from .types import ColumnAtom, MatrixField, QuadratureGrid
from .util import log_spaced, rng_for, warn, write_json


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def _eigh(a: np.ndarray):
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"eigendecomposition failed: {e}", matrix=a)


def matrix_sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Principal square root of (batched) PSD matrices; tiny negative eigenvalues clip to 0."""
    lam, v = _eigh(_herm(np.asarray(a, dtype=complex)))
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (v * root[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def matrix_abs(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise InputError("matrix_abs needs a finite matrix")
    return matrix_sqrt_psd(np.conj(np.swapaxes(a, -1, -2)) @ a)


def singular_values(f: MatrixField) -> np.ndarray:
    """Eigenvalues of |f(x)| at every grid point, shape (points, n)."""
    try:
        return np.linalg.svd(f.samples, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"singular value decomposition failed: {e}", matrix=f.samples[:1])


def nc_lp_norm(f: MatrixField, p: float) -> float:
    if not p >= 1:
        raise InputError(f"L_p norm needs p >= 1, got {p}")
    s = singular_values(f)
    if math.isinf(p):
        return float(np.max(s, initial=0.0))
    total = float(np.sum(f.grid.weights * np.sum(s ** p, axis=1)))
    return total ** (1.0 / p)


def weak_lp_quasinorm(f: MatrixField, p: float, lambda_grid: Optional[Sequence[float]] = None) -> float:
    """max over lambda of lambda * (integral of #{eigenvalues of |f| > lambda})^{1/p}.

    A lower bound of the sup over all lambda > 0; refining the grid converges from below.
    """
    if not p >= 1:
        raise InputError(f"weak L_p needs p >= 1, got {p}")
    s = singular_values(f)
    top = float(np.max(s, initial=0.0))
    if lambda_grid is None:
        if top == 0.0:
            return 0.0
        lambda_grid = log_spaced(top * 1e-6, top, 64)
    lams = np.asarray(list(lambda_grid), dtype=float)
    if lams.size == 0:
        raise InputError("weak L_p needs a nonempty lambda grid")
    if np.any(lams <= 0):
        raise InputError("lambda grid must be positive")
    w = f.grid.weights
    counts = np.array([np.sum(w * np.sum(s > lam, axis=1)) for lam in lams])
    return float(np.max(lams * counts ** (1.0 / p)))


def pairing(f: MatrixField, g: MatrixField) -> complex:
    """Trace-integral pairing of f and g."""
    return complex(np.sum(f.grid.weights * np.einsum("pij,pji->p", f.samples, g.samples)))


def _check_hermitian(a: np.ndarray, name: str) -> None:
    scale = 1.0 + float(np.max(np.abs(a), initial=0.0))
    if np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2))), initial=0.0) > 1e-12 * scale:
        raise InputError(f"{name} is not Hermitian")


def psd_margin(a, b) -> np.ndarray:
    """Smallest eigenvalue of b - a (batched)."""
    diff = _herm(np.asarray(b, dtype=complex) - np.asarray(a, dtype=complex))
    try:
        return np.linalg.eigvalsh(diff)[..., 0]
    except np.linalg.LinAlgError as e:
        raise NumericError(f"eigenvalue computation failed: {e}", matrix=diff)


def psd_leq(a, b, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_hermitian(a, "A")
    _check_hermitian(b, "B")
    bnorm = float(np.linalg.norm(b, 2)) if b.size else 0.0
    return bool(psd_margin(a, b) >= -tol * (1.0 + bnorm))


def sandwich_constant(s: np.ndarray, dom: np.ndarray, ridge: float = 1e-12) -> np.ndarray:
    """Per point, the smallest C with -C*dom <= s <= C*dom in PSD order.

    `dom` is PSD, `s` Hermitian; a ridge relative to the largest dominant keeps
    the generalized eigenproblem well posed where dom degenerates.
    """
    s = _herm(np.asarray(s, dtype=complex))
    dom = _herm(np.asarray(dom, dtype=complex))
    n = dom.shape[-1]
    scale = float(np.max(np.linalg.norm(dom, 2, axis=(-2, -1)), initial=0.0))
    if scale == 0.0:
        return np.where(np.max(np.abs(s), axis=(-2, -1)) > 0, np.inf, 0.0)
    lam, v = _eigh(dom + ridge * scale * np.eye(n))
    inv_root = (v * (1.0 / np.sqrt(lam))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    m = _herm(inv_root @ s @ inv_root)
    ev = np.linalg.eigvalsh(m)
    return np.max(np.abs(ev), axis=-1)


def op_cauchy_schwarz_residual(phi, f, weights=None) -> float:
    """Min eigenvalue of (int |phi|^2)(int |f|^2) - |int phi f|^2."""
    samples = f.samples if isinstance(f, MatrixField) else np.asarray(f, dtype=complex)
    if weights is None:
        if not isinstance(f, MatrixField):
            raise InputError("weights are required when f is a raw sample array")
        weights = f.grid.weights
    phi = np.asarray(phi, dtype=complex)
    w = np.asarray(weights, dtype=float)
    if samples.ndim != 3 or phi.shape != (samples.shape[0],) or w.shape != phi.shape:
        raise InputError(
            f"shapes do not conform: phi {phi.shape}, f {samples.shape}, weights {w.shape}"
        )
    a = float(np.sum(w * np.abs(phi) ** 2))
    b = np.einsum("p,pji,pjk->ik", w, np.conj(samples), samples)
    v = np.einsum("p,p,pij->ij", w, phi, samples)
    m = a * b - np.conj(v.T) @ v
    return float(psd_margin(np.zeros_like(m), m))


def _grid_box(grid: QuadratureGrid) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.array([cell_edges(grid, a)[0] for a in range(grid.d)])
    hi = np.array([cell_edges(grid, a)[-1] for a in range(grid.d)])
    return lo, hi


def bmo_norm(
    f: MatrixField,
    side: str = "column",
    box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    levels: int = 1,
) -> float:
    """Dyadic row/column BMO norm over generations 0..levels-1 of the box.

    A lower bound of the sup over all cubes.
    """
    if side not in ("row", "column", "max"):
        raise InputError(f"unknown BMO side {side!r}")
    if levels < 1:
        raise InputError("BMO needs at least one refinement level")
    if side == "max":
        return max(bmo_norm(f, "row", box, levels), bmo_norm(f, "column", box, levels))
    lo, hi = _grid_box(f.grid) if box is None else (np.asarray(box[0], float), np.asarray(box[1], float))
    pts = f.grid.points
    w = f.grid.weights
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    best = 0.0
    for gen in range(levels):
        parts = 2 ** gen
        idx = np.floor((pts - lo) / (hi - lo) * parts).astype(int)
        idx = np.clip(idx, 0, parts - 1)
        for cube in itertools.product(range(parts), repeat=f.grid.d):
            sel = inside & np.all(idx == np.array(cube), axis=1)
            mass = float(np.sum(w[sel]))
            if mass <= 0.0:
                warn(f"BMO: dyadic cube {cube} at generation {gen} holds no grid points; skipped")
                continue
            vals = f.samples[sel]
            ws = w[sel]
            mean = np.einsum("p,pij->ij", ws, vals) / mass
            osc = vals - mean
            if side == "column":
                sq = np.einsum("p,pji,pjk->ik", ws, np.conj(osc), osc) / mass
            else:
                sq = np.einsum("p,pij,pkj->ik", ws, osc, np.conj(osc)) / mass
            top = float(np.linalg.eigvalsh(_herm(sq))[-1])
            best = max(best, math.sqrt(max(top, 0.0)))
    return best


def column_size(field: MatrixField) -> float:
    """tau[(int |a|^2)^{1/2}]."""
    sq = np.einsum("p,pji,pjk->ik", field.grid.weights, np.conj(field.samples), field.samples)
    return float(np.real(np.trace(matrix_sqrt_psd(sq))))


def make_column_atom(
    seed: int,
    cube: Tuple[Sequence[float], float],
    matrix_size: int,
    cells: int = 64,
    modes: int = 4,
    max_tries: int = 8,
) -> ColumnAtom:
    """Random smooth mean-zero atom on the cube, normalized to size |Q|^{1/2} exactly."""
    center, side = tuple(float(c) for c in cube[0]), float(cube[1])
    grid = uniform_grid(center, side, cells)
    u = (grid.points - (np.array(center) - 0.5 * side)) / side
    vol = side ** len(center)
    for attempt in range(max_tries):
        rng = rng_for(seed, attempt)
        samples = np.zeros((grid.size, matrix_size, matrix_size), dtype=complex)
        for j in range(1, modes + 1):
            g = rng.standard_normal((matrix_size, matrix_size)) + 1j * rng.standard_normal((matrix_size, matrix_size))
            profile = np.prod(np.cos(math.pi * j * u), axis=1)
            samples += profile[:, None, None] * g / j
        w = grid.weights
        samples -= np.einsum("p,pij->ij", w, samples) / np.sum(w)
        size = column_size(MatrixField(grid, samples))
        if size > 1e-300:
            atom = ColumnAtom(center, side, MatrixField(grid, samples * (math.sqrt(vol) / size)))
            problems = validate_atom(atom)
            if problems:
                raise NumericError(f"generated atom failed validation: {problems}", params=(seed, cube))
            return atom
        warn(f"atom draw {attempt} for seed {seed} degenerate; retrying with next substream")
    raise NumericError("no nondegenerate atom draw", params=(seed, cube))


def validate_atom(atom: ColumnAtom, tol: float = 1e-10) -> List[str]:
    """Names of the violated atom conditions (empty when valid)."""
    problems = []
    grid = atom.field.grid
    lo = np.array(atom.center) - 0.5 * atom.side
    hi = np.array(atom.center) + 0.5 * atom.side
    slack = 1e-12 * max(1.0, atom.side)
    outside = ~np.all((grid.points >= lo - slack) & (grid.points <= hi + slack), axis=1)
    if np.any(np.abs(atom.field.samples[outside]) > 0):
        problems.append("support")
    w = grid.weights
    mean = np.einsum("p,pij->ij", w, atom.field.samples)
    mass = float(np.sum(w * np.linalg.norm(atom.field.samples, axis=(1, 2))))
    if np.linalg.norm(mean, 2) > tol * max(1.0, mass):
        problems.append("mean")
    if column_size(atom.field) > math.sqrt(atom.volume) * (1.0 + tol):
        problems.append("size")
    if column_size(atom.field) == 0.0:
        problems.append("zero")
    return problems


def translate_atom(atom: ColumnAtom, shift: Sequence[float]) -> ColumnAtom:
    g = atom.field.grid
    grid = QuadratureGrid(
        tuple(x + s for x, s in zip(g.axis_nodes, shift)), g.axis_weights, kind=g.kind
    )
    center = tuple(c + s for c, s in zip(atom.center, shift))
    return ColumnAtom(center, atom.side, MatrixField(grid, atom.field.samples))


def scale_atom(atom: ColumnAtom, c: complex) -> ColumnAtom:
    return ColumnAtom(atom.center, atom.side, atom.field * c)


def save_field(field: MatrixField, path: Path) -> None:
    write_json(
        path,
        {
            "format": "hermite-nc/matrix-field",
            "kind": field.grid.kind,
            "axis_nodes": [x.tolist() for x in field.grid.axis_nodes],
            "axis_weights": [w.tolist() for w in field.grid.axis_weights],
            "matrix_size": field.matrix_size,
            "hermitian": field.hermitian,
            "positive": field.positive,
            "samples": [[z.real, z.imag] for z in field.samples.ravel()],
        },
    )


def load_field(path: Path) -> MatrixField:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "hermite-nc/matrix-field":
        raise InputError(f"{path} is not a matrix-field container")
    grid = QuadratureGrid(
        tuple(np.array(x) for x in doc["axis_nodes"]),
        tuple(np.array(w) for w in doc["axis_weights"]),
        kind=doc["kind"],
    )
    flat = np.array(doc["samples"], dtype=float)
    n = int(doc["matrix_size"])
    samples = (flat[:, 0] + 1j * flat[:, 1]).reshape(grid.size, n, n)
    return MatrixField(grid, samples, hermitian=doc["hermitian"], positive=doc["positive"])
