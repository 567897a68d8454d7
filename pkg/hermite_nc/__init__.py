"""
hermite_nc package
- Hermite expansions of matrix-valued functions and numerical probes of
  Bochner-Riesz means, the Hermite heat semigroup and spectral multipliers
  in noncommutative L_p.
"""

__all__ = [
    "cli",
    "config",
    "orchestrator",
    "experiments",
    "plots",
    "probes",
    "hermite",
    "expansion",
    "nc",
    "riesz",
    "semigroup",
    "multipliers",
    "oscillating",
    "util",
    "types",
    "errors",
    "bundle",
]
__version__ = "0.1.0"
