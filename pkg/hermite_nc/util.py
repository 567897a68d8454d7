"""
util.py
Cross-cutting utilities:
- Console logging with bracketed level prefixes, gated by log level
- Seeded random streams (one substream per task key)
- Small helpers: clamp, time, atomic JSON/CSV writing
"""

from __future__ import annotations
import csv, io, json, math, sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

_LEVELS = {"DEBUG": 10, "INFO": 20, "WARN": 30, "WARNING": 30, "ERROR": 40}
_level = _LEVELS["INFO"]


def set_log_level(name: str) -> None:
    global _level
    _level = _LEVELS.get(str(name).upper(), _LEVELS["INFO"])


def debug(msg: str) -> None:
    if _level <= _LEVELS["DEBUG"]:
        print(f"[debug] {msg}")


def info(msg: str) -> None:
    if _level <= _LEVELS["INFO"]:
        print(f"[info] {msg}")


def warn(msg: str) -> None:
    if _level <= _LEVELS["WARN"]:
        print(f"[warn] {msg}", file=sys.stderr)


def clamp(lo, x, hi):
    return max(lo, min(x, hi))


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, key...) so parallel tasks stay reproducible."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def ensure_dir(p: Path):
    """Create directory with better error reporting."""
    try:
        p.mkdir(parents=True, exist_ok=True)
    except PermissionError:
        raise PermissionError(f"Cannot create directory {p} - insufficient permissions")
    except OSError as e:
        raise OSError(f"Cannot create directory {p}: {e}")


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def write_json(path: Path, obj):
    ensure_dir(path.parent)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True))
    tmp.replace(path)


def format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, rows: Sequence[Dict[str, Any]], columns: List[str]):
    """Atomic CSV write; `rows` are written in the order given."""
    ensure_dir(path.parent)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(c, "")) for c in columns])
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(buf.getvalue())
    tmp.replace(path)


def sort_key(value: Any):
    """Total order over parameter strings/numbers for deterministic row sorting."""
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return (0, float(value), "")
    return (1, 0.0, str(value))


def lex_key(coords: Dict[str, Any]) -> tuple:
    return tuple((k, sort_key(coords[k])) for k in sorted(coords))


def log_spaced(lo: float, hi: float, count: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), count))


def chunked(items: Iterable[Any], size: int) -> List[List[Any]]:
    items = list(items)
    return [items[i : i + size] for i in range(0, len(items), size)]


def ok(msg: str) -> None:
    if _level <= _LEVELS["INFO"]:
        print(f"[ok] {msg}")


def params_label(params: Dict[str, Any]) -> str:
    """Deterministic 'k=v;...' label for a parameter tuple."""
    return ";".join(f"{k}={format_value(params[k])}" for k in sorted(params))
