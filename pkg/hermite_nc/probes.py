"""
probes.py
Assembly of ProbeReports from sampled ratios |quantity| / envelope.

The fitted constant is the largest ratio; the worst point breaks ties by the
lexicographic order of its coordinates. Stability is the spread (max/min) of
the per-slice maxima along the first slice key; zero slices are left out.
"""

from __future__ import annotations
import math
from typing import Any, Dict, List, Optional, Sequence

from .types import ProbeReport
from .util import lex_key


def _slice_maxima(samples: List[Dict[str, Any]], key: str) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for s in samples:
        label = f"{key}={s['coords'][key]}"
        out[label] = max(out.get(label, 0.0), s["ratio"])
    return out


def spread(values: Sequence[float]) -> float:
    pos = [v for v in values if v > 0]
    if any(not math.isfinite(v) for v in values):
        return math.inf
    if len(pos) < 2:
        return 1.0
    return max(pos) / min(pos)


def fit_report(
    name: str,
    samples: List[Dict[str, Any]],
    slice_keys: Sequence[str],
    threshold: float,
    lattice: Dict[str, Any],
    extra: Optional[Dict[str, Any]] = None,
    required: bool = True,
) -> ProbeReport:
    extra = dict(extra or {})
    if samples:
        ordered = sorted(samples, key=lambda s: lex_key(s["coords"]))
        worst = max(ordered, key=lambda s: s["ratio"])
        fitted = float(worst["ratio"])
        worst_coords = dict(worst["coords"])
    else:
        fitted, worst_coords = 0.0, {}
    slices: Dict[str, float] = {}
    stability = 1.0
    if slice_keys and samples:
        slices = _slice_maxima(samples, slice_keys[0])
        stability = spread(list(slices.values()))
        others = {k: spread(list(_slice_maxima(samples, k).values())) for k in slice_keys[1:]}
        if others:
            extra["stability_by"] = others
    finite = math.isfinite(fitted)
    stable = finite and stability <= threshold
    return ProbeReport(
        name=name,
        lattice=lattice,
        samples=samples,
        fitted_constant=fitted,
        worst=worst_coords,
        slice_constants=slices,
        stability=stability,
        threshold=threshold,
        stable=stable,
        passed=stable,
        required=required,
        extra=extra,
    )


def combine_reports(
    name: str,
    items: Dict[str, ProbeReport],
    lattice: Dict[str, Any],
    threshold: float,
    head: Optional[str] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> ProbeReport:
    """One report over several fitted items; passes only if every item passes."""
    if not items:
        raise ValueError("combine_reports needs at least one item")
    first = items[head] if head else next(iter(items.values()))
    summary = {
        key: {
            "fitted_constant": r.fitted_constant,
            "stability": r.stability,
            "stable": r.stable,
            "passed": r.passed,
            "worst": r.worst,
            **{k: v for k, v in r.extra.items() if not isinstance(v, (list, dict))},
        }
        for key, r in items.items()
    }
    return ProbeReport(
        name=name,
        lattice=lattice,
        samples=[{**s, "coords": {**s["coords"], "item": key}} for key, r in items.items() for s in r.samples],
        fitted_constant=first.fitted_constant,
        worst=first.worst,
        slice_constants={key: r.fitted_constant for key, r in items.items()},
        stability=max(r.stability for r in items.values()),
        threshold=threshold,
        stable=all(r.stable for r in items.values()),
        passed=all(r.passed for r in items.values()),
        extra={"items": summary, **(extra or {})},
    )
