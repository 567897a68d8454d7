"""
types.py
Dataclasses used across modules: grids and fields, spectral coefficients,
operator parameters, probe reports and the experiment configuration.

Array-carrying types are frozen and compare by identity; the arrays they hold
are treated as read-only after construction.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import InputError

GRID_KINDS = ("gauss-hermite", "uniform")


@dataclass(frozen=True)
class MultiIndex:
    components: Tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if len(comps) < 1:
            raise InputError("multi-index needs at least one component")
        if any(c < 0 for c in comps):
            raise InputError(f"multi-index components must be >= 0, got {comps}")
        object.__setattr__(self, "components", comps)

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return sum(self.components)

    @property
    def eigenvalue(self) -> int:
        return 2 * self.order + self.d


@dataclass(frozen=True)
class HermiteBasis:
    degree_cap: int
    nodes: np.ndarray
    weights: np.ndarray
    compensated_weights: np.ndarray
    phi_table: np.ndarray  # (degree_cap + 1, node count)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor grid; `axis_weights` integrate plain Lebesgue measure.

    For Gauss-Hermite grids these are the Gaussian-compensated weights
    w_j e^{x_j^2}, so sum(weights * g) approximates the integral of g.
    """

    axis_nodes: Tuple[np.ndarray, ...]
    axis_weights: Tuple[np.ndarray, ...]
    kind: str = "gauss-hermite"

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise InputError(f"unknown grid kind {self.kind!r}")
        if len(self.axis_nodes) < 1 or len(self.axis_nodes) != len(self.axis_weights):
            raise InputError("grid needs matching per-axis nodes and weights")
        nodes = tuple(np.asarray(n, dtype=float) for n in self.axis_nodes)
        weights = tuple(np.asarray(w, dtype=float) for w in self.axis_weights)
        for n, w in zip(nodes, weights):
            if n.ndim != 1 or n.shape != w.shape or n.size < 1:
                raise InputError("axis nodes and weights must be equal-length vectors")
        object.__setattr__(self, "axis_nodes", nodes)
        object.__setattr__(self, "axis_weights", weights)

    @property
    def d(self) -> int:
        return len(self.axis_nodes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(n.size for n in self.axis_nodes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axis_nodes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def weights(self) -> np.ndarray:
        w = self.axis_weights[0]
        for extra in self.axis_weights[1:]:
            w = np.multiply.outer(w, extra)
        return np.asarray(w).ravel()

    @property
    def half_width(self) -> float:
        return float(max(np.max(np.abs(n)) for n in self.axis_nodes))


@dataclass(frozen=True, eq=False)
class MatrixField:
    grid: QuadratureGrid
    samples: np.ndarray  # (grid.size, n, n) complex
    hermitian: bool = False
    positive: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None, None]
        if s.ndim != 3 or s.shape[1] != s.shape[2] or s.shape[1] < 1:
            raise InputError(f"samples must have shape (points, n, n), got {s.shape}")
        if s.shape[0] != self.grid.size:
            raise InputError(
                f"sample count {s.shape[0]} does not match grid point count {self.grid.size}"
            )
        if not np.all(np.isfinite(s)):
            raise InputError("samples must be finite")
        object.__setattr__(self, "samples", s)
        if self.positive:
            eig = np.linalg.eigvalsh(0.5 * (s + np.conj(np.swapaxes(s, 1, 2))))
            scale = np.max(np.abs(eig), axis=1, initial=0.0)
            if np.any(eig[:, 0] < -1e-10 * np.maximum(scale, 1e-300)):
                raise InputError("field flagged positive has a non-PSD sample")

    @property
    def matrix_size(self) -> int:
        return self.samples.shape[1]

    def tensor_view(self) -> np.ndarray:
        n = self.matrix_size
        return self.samples.reshape(self.grid.shape + (n, n))

    def adjoint(self) -> "MatrixField":
        return MatrixField(
            self.grid, np.conj(np.swapaxes(self.samples, 1, 2)), self.hermitian, self.positive
        )

    def with_samples(self, samples: np.ndarray, **flags) -> "MatrixField":
        return MatrixField(self.grid, samples, **flags)

    def __add__(self, other: "MatrixField") -> "MatrixField":
        return MatrixField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        return MatrixField(self.grid, self.samples - other.samples)

    def __mul__(self, c: complex) -> "MatrixField":
        return MatrixField(self.grid, complex(c) * self.samples)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Fourier-Hermite coefficients stored densely as (K+1,)*d + (n, n).

    Entries with |nu| > degree_cap are kept at zero.
    """

    d: int
    degree_cap: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        expected = (self.degree_cap + 1,) * self.d
        if v.shape[: self.d] != expected or v.ndim != self.d + 2:
            raise InputError(f"coefficient array shape {v.shape} does not fit d={self.d}, cap={self.degree_cap}")
        v = np.where(self.level_grid()[(...,) + (None, None)] <= self.degree_cap, v, 0)
        object.__setattr__(self, "values", v)

    @property
    def matrix_size(self) -> int:
        return self.values.shape[-1]

    def level_grid(self) -> np.ndarray:
        """|nu| for every stored index."""
        axes = np.meshgrid(*([np.arange(self.degree_cap + 1)] * self.d), indexing="ij")
        return np.sum(axes, axis=0)

    def eigenvalue_grid(self) -> np.ndarray:
        return 2 * self.level_grid() + self.d

    def __getitem__(self, nu) -> np.ndarray:
        comps = nu.components if isinstance(nu, MultiIndex) else tuple(nu)
        if len(comps) != self.d:
            raise InputError(f"multi-index of dimension {len(comps)} for d={self.d}")
        if sum(comps) > self.degree_cap:
            return np.zeros((self.matrix_size,) * 2, dtype=complex)
        return self.values[tuple(comps)]

    def items(self) -> Iterator[Tuple[MultiIndex, np.ndarray]]:
        for idx in np.ndindex(*self.values.shape[: self.d]):
            if sum(idx) <= self.degree_cap:
                yield MultiIndex(idx), self.values[idx]

    def scaled_by_level(self, factors: np.ndarray) -> "SpectralCoeffs":
        """Multiply the coefficient of every nu by factors[|nu|]."""
        lv = self.level_grid()
        f = np.asarray(factors)[np.minimum(lv, len(factors) - 1)]
        f = np.where(lv < len(factors), f, 0)
        return SpectralCoeffs(self.d, self.degree_cap, self.values * f[(...,) + (None, None)])


@dataclass(frozen=True, eq=False)
class ColumnAtom:
    center: Tuple[float, ...]
    side: float
    field: MatrixField

    @property
    def volume(self) -> float:
        return float(self.side ** len(self.center))


@dataclass(frozen=True)
class RieszParams:
    R: float
    alpha: complex
    d: int = 1

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InputError(f"summability radius must be positive, got {self.R}")
        if complex(self.alpha).real <= 0:
            raise InputError(f"Bochner-Riesz order needs Re(alpha) > 0, got {self.alpha}")
        if self.d < 1:
            raise InputError("dimension must be >= 1")


@dataclass(frozen=True)
class MehlerParams:
    t: float
    d: int
    c_d: float

    def __post_init__(self):
        if not self.t > 0:
            raise InputError(f"heat time must be positive, got {self.t}")


@dataclass(frozen=True, eq=False)
class MultiplierSpec:
    """mu(N) on integers N >= 1; `tag` is the closed-form name used in reports."""

    tag: str
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, N) -> np.ndarray:
        vals = np.asarray(self.evaluator(np.asarray(N, dtype=float)), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise InputError(f"multiplier {self.tag!r} is not finite on the requested levels")
        return vals

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        return MultiplierSpec(f"{self.tag} * {other.tag}", lambda N: self(N) * other(N))


@dataclass(frozen=True)
class OscillatingParams:
    t: float
    alpha: float = 0.5
    u_points: int = 256
    kernel_exponent: float = -0.5

    def __post_init__(self):
        if not (0 < self.t <= math.pi / 4 + 1e-12):
            raise InputError(f"oscillation time must lie in (0, pi/4], got {self.t}")
        if self.alpha < 0:
            raise InputError("oscillating multiplier needs alpha >= 0")
        if self.kernel_exponent not in (-0.5, -1.0):
            raise InputError("kernel exponent must be -1/2 or -1")
        if self.u_points < 8:
            raise InputError("lambda quadrature needs at least 8 points")


@dataclass(frozen=True, eq=False)
class TimeGrid:
    times: np.ndarray
    log_weights: np.ndarray  # trapezoid weights in s = log t, already times t

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size < 16:
            raise InputError("time grid needs at least 16 points")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise InputError("time grid must be positive and strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    def weights(self, power: float) -> np.ndarray:
        """Weights for the integral of g(t) t^power dt over (0, t_max]."""
        w = self.log_weights * self.times ** power
        w[0] += self.times[0] ** (power + 1) / (power + 1)
        return w


@dataclass
class ProbeReport:
    name: str
    lattice: Dict[str, Any]
    samples: List[Dict[str, Any]]
    fitted_constant: float
    worst: Dict[str, Any]
    slice_constants: Dict[str, float]
    stability: float
    threshold: float
    stable: bool
    passed: bool
    required: bool = True
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentConfig:
    # experiment
    kind: str
    d: int = 1
    matrix_size: int = 2
    degree_cap: int = 32
    node_count: int = 0
    seed: int = 0
    out_dir: str = "results"
    samples: int = 20
    plots: bool = True
    threshold: float = 4.0
    # parameter ranges
    p_values: List[float] = field(default_factory=lambda: [2.0])
    alpha: float = 1.0
    radii: List[float] = field(default_factory=lambda: [2.0 ** j for j in range(2, 13)])
    r_values: List[float] = field(default_factory=lambda: [0.25, 1.0])
    t_values: List[float] = field(default_factory=lambda: [0.1, 0.5, 1.0])
    x_values: List[float] = field(default_factory=lambda: [-2.0, -0.5, 0.0, 1.0, 3.0])
    y_values: List[float] = field(default_factory=lambda: [-3.0, -1.0, 0.0, 0.5, 2.0])
    degree_caps: List[int] = field(default_factory=lambda: [32, 64])
    # semigroup
    k: int = 1
    time_points: int = 96
    t_min: float = 1e-3
    t_max: float = 12.0
    # multipliers
    multiplier: str = "unimodular_power gamma=1"
    order: int = 2
    n_max: int = 4096
    kernel_exponents: List[float] = field(default_factory=lambda: [-0.5, -1.0])
    t0: float = 0.3
    deltas: List[float] = field(default_factory=lambda: [2.0 ** j for j in range(-3, 4)])
    # runtime
    workers: int = 0
    log_level: str = "INFO"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentResult:
    kind: str
    rows: List[Dict[str, Any]]
    reports: List[ProbeReport]
    curves: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
