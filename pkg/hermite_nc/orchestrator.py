"""
orchestrator.py
Coordinates one experiment run with concurrency:
  - build the task plan for the configured kind
  - run the tasks in a thread pool, collecting rows, reports and curves
  - sort rows by parameter tuple, run the plan's finish step
  - write results.csv, report.json, plot_*.svg and a run-summary.json
  - print the probe summary and return the exit code
"""

from __future__ import annotations
import concurrent.futures, dataclasses, os, sys, time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .errors import NumericError
from .experiments import Partial, build_plan, verify_configs
from .plots import write_plots
from .types import ExperimentConfig, ExperimentResult, ProbeReport
from .util import clamp, ensure_dir, info, lex_key, ok, set_log_level, utc_now_iso, warn, write_csv, write_json

CSV_COLUMNS = ["experiment", "parameters", "metric", "value"]


def auto_workers(explicit: int) -> int:
    if explicit and explicit > 0:
        return explicit
    cpu = os.cpu_count() or 2
    return clamp(1, cpu // 2, 8)


def _row_order(r: Dict) -> tuple:
    return (r["experiment"], lex_key(r["_params"]), r["metric"])


def merge_curves(into: Dict[str, Dict], new: Dict[str, Dict]) -> None:
    for name, c in new.items():
        if name in into:
            into[name]["series"].update(c["series"])
        else:
            into[name] = {**c, "series": dict(c["series"])}


def collect(cfg: ExperimentConfig, workers: int) -> ExperimentResult:
    """Run the plan for `cfg`; a NumericError in a task is recorded with its parameter tuple."""
    plan = build_plan(cfg)
    info(f"kind={cfg.kind} tasks={len(plan.tasks)} workers={workers} seed={cfg.seed}")
    parts: Dict[tuple, Partial] = {}
    error = None
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as ex:
        futs = {ex.submit(t.run): t.key for t in plan.tasks}
        for f in concurrent.futures.as_completed(futs):
            key = futs[f]
            try:
                parts[key] = f.result()
            except NumericError as e:
                warn(f"task {key} failed: {e}")
                error = error or f"{e} (task {key})"
    rows: List[Dict] = []
    reports: List[ProbeReport] = []
    curves: Dict[str, Dict] = {}
    for key in sorted(parts, key=repr):
        p = parts[key]
        rows.extend(p.rows)
        reports.extend(p.reports)
        merge_curves(curves, p.curves)
    rows.sort(key=_row_order)
    if plan.finish is not None and error is None:
        done = plan.finish(rows)
        rows.extend(done.rows)
        reports.extend(done.reports)
        merge_curves(curves, done.curves)
        rows.sort(key=_row_order)
    reports.sort(key=lambda r: r.name)
    return ExperimentResult(cfg.kind, rows, reports, curves, error)


def write_artifacts(cfg: ExperimentConfig, result: ExperimentResult, out_dir: Path) -> List[Path]:
    ensure_dir(out_dir)
    write_csv(out_dir / "results.csv", result.rows, CSV_COLUMNS)
    write_json(
        out_dir / "report.json",
        {"kind": result.kind, "config": cfg.to_dict(), "reports": [r.to_dict() for r in result.reports]},
    )
    paths = [out_dir / "results.csv", out_dir / "report.json"]
    if cfg.plots:
        paths += write_plots(result.curves, out_dir)
    return paths


def emit_summary(reports: Sequence[ProbeReport], stream=None) -> int:
    """Print one line per probe; 1 if any required probe failed."""
    stream = stream or sys.stdout
    if not reports:
        print("[info] no probes to report.", file=stream)
        return 0
    width = max(len(r.name) for r in reports)
    print(f"{'probe':<{width}}  {'fitted C':>12}  {'stability':>10}  {'stable':>6}  result", file=stream)
    for r in reports:
        verdict = "pass" if r.passed else ("FAIL" if r.required else "fail (optional)")
        print(
            f"{r.name:<{width}}  {r.fitted_constant:>12.5g}  {r.stability:>10.4g}  {str(r.stable).lower():>6}  {verdict}",
            file=stream,
        )
    failed = [r.name for r in reports if r.required and not r.passed]
    if failed:
        print(f"[warn] {len(failed)} required probe(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def run_experiment(
    cfg: ExperimentConfig,
    workers_override: Optional[int] = None,
    out_override: Optional[str] = None,
    seed_override: Optional[int] = None,
) -> int:
    overrides = {}
    if out_override is not None:
        overrides["out_dir"] = out_override
    if seed_override is not None:
        overrides["seed"] = int(seed_override)
    cfg = dataclasses.replace(cfg, **overrides)
    set_log_level(cfg.log_level)
    workers = auto_workers(workers_override if workers_override is not None else cfg.workers)
    out_dir = Path(cfg.out_dir)

    started = utc_now_iso()
    start = time.time()
    result = collect(cfg, workers)
    try:
        paths = write_artifacts(cfg, result, out_dir)
        write_json(
            out_dir / "run-summary.json",
            {
                "started_utc": started,
                "duration_sec": round(time.time() - start, 2),
                "kind": cfg.kind,
                "seed": cfg.seed,
                "workers": workers,
                "rows": len(result.rows),
                "probes": len(result.reports),
                "error": result.error,
            },
        )
    except PermissionError as e:
        print(f"❌ Error writing results: {e}")
        print(f"💡 Hint: Check permissions on {out_dir} or pass --out DIR")
        return 1
    except OSError as e:
        print(f"❌ Error writing results: {e}")
        print("💡 Hint: Check disk space and directory permissions")
        return 1

    code = emit_summary(result.reports)
    if result.error:
        print(f"❌ Numeric failure: {result.error}")
        print("💡 Hint: The offending parameter tuple is shown above; shrink the lattice or raise the grid size")
        return 1
    if code == 0:
        ok(f"{cfg.kind}: {len(result.rows)} rows written to {out_dir} ({', '.join(p.name for p in paths)})")
    return code


def run_verify(out_dir: str = "verify", workers_override: Optional[int] = None, seed: int = 0) -> int:
    """Run every configuration of the built-in battery; 1 if any of them fails."""
    failed: List[str] = []
    configs = verify_configs(seed)
    for i, cfg in enumerate(configs):
        sub = Path(out_dir) / f"{i:02d}-{cfg.kind}"
        info(f"[{i + 1}/{len(configs)}] {cfg.kind} d={cfg.d}")
        code = run_experiment(dataclasses.replace(cfg, out_dir=str(sub)), workers_override)
        if code != 0:
            failed.append(sub.name)
    if failed:
        print(f"[warn] {len(failed)} battery item(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    ok("acceptance battery passed.")
    return 0
