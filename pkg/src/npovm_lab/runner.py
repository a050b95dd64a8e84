"""Configuration-driven experiment runner: parameter sweeps over encodings,
CSV + manifest persistence, and the canned grids behind the two summary
figures (noise-strength sweeps and XY-model advantage curves)."""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .encodings import PRESETS, make_encoding
from .errors import DomainError
from .strategies import (
    GENERAL,
    POSITIVE,
    OptimizerConfig,
    embed_positive_params,
    optimize_fisher,
)

CSV_COLUMNS = ("param_value", "class", "fi", "delta_theta", "converged", "restarts_used")

#: Reference parabola coefficients (A1, A2) for the noise-strength precision
#: curves, reported next to our fits for comparison only.
REFERENCE_FIT_COEFFS = {"amp_damp": (-1.25, 0.192), "dephasing": (-2.51, 0.384)}

NON_INFORMATIVE_FI = 1e-9


@dataclass(frozen=True)
class SweepConfig:
    encoding_id: str
    grid_start: float
    grid_stop: float
    grid_count: int
    output_path: str
    classes: tuple[str, ...] = (POSITIVE, GENERAL)
    fixed: dict | None = None
    optimizer: OptimizerConfig = OptimizerConfig()
    estimated_param: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.encoding_id not in PRESETS:
            raise DomainError(f"unknown encoding id '{self.encoding_id}'")
        if self.grid_count < 2:
            raise DomainError("grid needs at least 2 points")
        if not self.grid_start < self.grid_stop:
            raise DomainError("grid start must be below stop")
        bad = [c for c in self.classes if c not in (POSITIVE, GENERAL)]
        if bad:
            raise DomainError(f"unknown strategy classes {bad}")
        if not self.classes:
            raise DomainError("at least one strategy class required")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_start, self.grid_stop, self.grid_count)


def load_sweep_config(path: str | Path) -> SweepConfig:
    """Parse a TOML sweep configuration (see docs/example configs)."""
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    raw = Path(path).read_bytes()
    data = tomllib.loads(raw.decode("utf-8"))
    try:
        sweep = data["sweep"]
        grid = sweep["grid"]
        opt = data.get("optimizer", {})
        return SweepConfig(
            encoding_id=sweep["encoding"],
            grid_start=float(grid["start"]),
            grid_stop=float(grid["stop"]),
            grid_count=int(grid["count"]),
            output_path=sweep["output"],
            classes=tuple(sweep.get("classes", [POSITIVE, GENERAL])),
            fixed=dict(sweep.get("fixed", {})),
            estimated_param=sweep.get("estimated_param"),
            jobs=int(sweep.get("jobs", 1)),
            optimizer=OptimizerConfig(
                restarts=int(opt.get("restarts", 20)),
                max_iters=int(opt.get("max_iters", 2000)),
                simplex_tol=float(opt.get("simplex_tol", 1e-8)),
                seed=int(opt.get("seed", 0)),
                warm_start_sld=bool(opt.get("warm_start_sld", True)),
                fd_step=float(opt.get("fd_step", 1e-4)),
            ),
        )
    except KeyError as exc:
        raise DomainError(f"sweep config missing key {exc}") from exc


def _point_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def _run_point(task: tuple) -> list[dict]:
    """One grid point: optimize every requested class. Positive runs first so
    its optimum can seed the general-class search (superset property)."""
    encoding_id, fixed, value, classes, opt_dict, seed = task
    enc = make_encoding(encoding_id, fixed)
    cfg = OptimizerConfig(**opt_dict, seed=seed)
    rows = []
    positive_report = None
    for klass in (POSITIVE, GENERAL):
        if klass not in classes:
            continue
        extra = ()
        if klass == GENERAL and positive_report is not None:
            extra = (embed_positive_params(positive_report.params_at_opt),)
        report = optimize_fisher(klass, enc, float(value), cfg, extra_starts=extra)
        if klass == POSITIVE:
            positive_report = report
        rows.append({
            "param_value": float(value),
            "class": klass,
            "fi": report.fi,
            "delta_theta": report.delta_theta,
            "converged": report.converged,
            "restarts_used": report.restarts_used,
        })
    return rows


def _format_row(row: dict) -> str:
    return ",".join([
        "%.12g" % row["param_value"],
        row["class"],
        "%.12g" % row["fi"],
        "%.12g" % row["delta_theta"],
        "true" if row["converged"] else "false",
        str(row["restarts_used"]),
    ])


def write_csv(rows: list[dict], path: Path) -> None:
    rows = sorted(rows, key=lambda r: (r["param_value"], r["class"]))
    lines = [",".join(CSV_COLUMNS)] + [_format_row(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",") != list(CSV_COLUMNS):
        raise DomainError(f"{path} does not match the sweep CSV schema")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append({
            "param_value": float(parts[0]),
            "class": parts[1],
            "fi": float(parts[2]),
            "delta_theta": float(parts[3]),
            "converged": parts[4] == "true",
            "restarts_used": int(parts[5]),
        })
    return rows


def _config_snapshot(cfg: SweepConfig) -> dict:
    opt = cfg.optimizer
    return {
        "encoding": cfg.encoding_id,
        "estimated_param": cfg.estimated_param,
        "grid": {"start": cfg.grid_start, "stop": cfg.grid_stop, "count": cfg.grid_count},
        "fixed": dict(cfg.fixed or {}),
        "classes": list(cfg.classes),
        "output": cfg.output_path,
        "jobs": cfg.jobs,
        "optimizer": {
            "restarts": opt.restarts, "max_iters": opt.max_iters,
            "simplex_tol": opt.simplex_tol, "seed": opt.seed,
            "warm_start_sld": opt.warm_start_sld, "fd_step": opt.fd_step,
        },
    }


def sweep_config_from_snapshot(snap: dict) -> SweepConfig:
    opt = snap["optimizer"]
    return SweepConfig(
        encoding_id=snap["encoding"],
        grid_start=snap["grid"]["start"],
        grid_stop=snap["grid"]["stop"],
        grid_count=snap["grid"]["count"],
        output_path=snap["output"],
        classes=tuple(snap["classes"]),
        fixed=dict(snap["fixed"]),
        estimated_param=snap.get("estimated_param"),
        jobs=snap.get("jobs", 1),
        optimizer=OptimizerConfig(**opt),
    )


def run_sweep(cfg: SweepConfig, output_path: str | Path | None = None) -> tuple[Path, Path]:
    """Run the sweep, write CSV + JSON manifest, return both paths.

    Deterministic for a fixed config: every grid point derives its own seed
    from (optimizer seed, point index), so results do not depend on worker
    scheduling or on the jobs count.
    """
    out = Path(output_path if output_path is not None else cfg.output_path)
    started = time.perf_counter()
    opt_dict = {
        "restarts": cfg.optimizer.restarts,
        "max_iters": cfg.optimizer.max_iters,
        "simplex_tol": cfg.optimizer.simplex_tol,
        "warm_start_sld": cfg.optimizer.warm_start_sld,
        "fd_step": cfg.optimizer.fd_step,
    }
    tasks = [
        (cfg.encoding_id, dict(cfg.fixed or {}), float(v), tuple(cfg.classes),
         opt_dict, _point_seed(cfg.optimizer.seed, i))
        for i, v in enumerate(cfg.grid)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    rows = [r for point in results for r in point]

    warnings = []
    for r in rows:
        if not r["converged"]:
            warnings.append("unconverged: %s at %.12g" % (r["class"], r["param_value"]))
        if r["fi"] < NON_INFORMATIVE_FI:
            warnings.append("non-informative (fi~0): %s at %.12g" % (r["class"], r["param_value"]))

    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out)
        manifest_path = out.with_suffix(".manifest.json")
        manifest = {
            "tool_version": __version__,
            "seed": cfg.optimizer.seed,
            "wall_clock_s": time.perf_counter() - started,
            "config": _config_snapshot(cfg),
            "points": [{k: row[k] for k in
                        ("param_value", "class", "converged", "fi", "restarts_used")}
                       for row in sorted(rows, key=lambda r: (r["param_value"], r["class"]))],
            "warnings": warnings,
        }
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot write sweep output to {out}: {exc}") from exc
    return out, manifest_path


def run_from_manifest(manifest_path: str | Path,
                      output_path: str | Path | None = None) -> tuple[Path, Path]:
    """Re-run the sweep recorded in a manifest; reproduces its CSV."""
    snap = json.loads(Path(manifest_path).read_text(encoding="utf-8"))["config"]
    return run_sweep(sweep_config_from_snapshot(snap), output_path=output_path)


# ---------------------------------------------------------------------------
# figure reproduction

def fit_symmetric_parabola(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares fit of y = a(x² − x) + b; returns (a, b)."""
    design = np.stack([xs * xs - xs, np.ones_like(xs)], axis=1)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    return float(coef[0]), float(coef[1])


def _advantage_curve(rows: list[dict]) -> tuple[np.ndarray, np.ndarray]:
    """Per-point Δ_P − Δ_G from a two-class sweep's rows."""
    pos = {r["param_value"]: r["delta_theta"] for r in rows if r["class"] == POSITIVE}
    gen = {r["param_value"]: r["delta_theta"] for r in rows if r["class"] == GENERAL}
    xs = np.array(sorted(set(pos) & set(gen)))
    return xs, np.array([pos[x] - gen[x] for x in xs])


FIG2_GRIDS = {
    "amp_damp": (0.05, 0.95, 19, {}),
    "dephasing": (0.05, 0.95, 19, {}),
    "xx": (0.1, 1.5, 15, {}),
}

FIG3_PANELS = {
    "xy_h": (4.0, 5.0, 21, {"J": 1.0, "gamma": 1.0}),
    "xy_J": (0.25, 2.5, 10, {"h": 1.0, "gamma": 1.0}),
    "xy_gamma": (0.1, 1.0, 10, {"h": 1.0, "J": 1.0}),
}

FIG3_ENV_MIXES = (0.0, 0.2, 0.4)


def reproduce(figure: str, out_dir: str | Path,
              optimizer: OptimizerConfig = OptimizerConfig(), jobs: int = 1) -> dict:
    """Run the canned sweeps behind the two figures; returns the summary dict
    (also written as JSON next to the CSVs)."""
    out_dir = Path(out_dir)
    summary: dict = {"figure": figure, "csv_files": []}

    if figure == "fig2":
        fits = {}
        for enc_id, (start, stop, count, fixed) in FIG2_GRIDS.items():
            cfg = SweepConfig(encoding_id=enc_id, grid_start=start, grid_stop=stop,
                              grid_count=count, fixed=fixed,
                              output_path=str(out_dir / f"fig2_{enc_id}.csv"),
                              optimizer=optimizer, jobs=jobs)
            csv_path, _ = run_sweep(cfg)
            summary["csv_files"].append(str(csv_path))
            rows = [r for r in read_csv(csv_path) if r["converged"]]
            if enc_id in REFERENCE_FIT_COEFFS:
                xs = np.array([r["param_value"] for r in rows if r["class"] == POSITIVE])
                ys = np.array([r["delta_theta"] for r in rows if r["class"] == POSITIVE])
                a, b = fit_symmetric_parabola(xs, ys)
                ref = REFERENCE_FIT_COEFFS[enc_id]
                fits[enc_id] = {"fit": [a, b], "reference": list(ref)}
        summary["parabola_fits"] = fits
    elif figure == "fig3":
        argmins = {}
        for enc_id, (start, stop, count, fixed) in FIG3_PANELS.items():
            for k in FIG3_ENV_MIXES:
                cfg = SweepConfig(
                    encoding_id=enc_id, grid_start=start, grid_stop=stop,
                    grid_count=count, fixed={**fixed, "k": k},
                    output_path=str(out_dir / f"fig3_{enc_id}_k{k:.1f}.csv"),
                    optimizer=optimizer, jobs=jobs)
                csv_path, _ = run_sweep(cfg)
                summary["csv_files"].append(str(csv_path))
                if enc_id == "xy_h":
                    xs, adv = _advantage_curve(read_csv(csv_path))
                    argmins[f"k={k:.1f}"] = float(xs[int(np.argmin(adv))])
        summary["h_curve_argmin"] = argmins
    else:
        raise DomainError(f"unknown figure '{figure}' (expected fig2 or fig3)")

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{figure}_summary.json").write_text(
            json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot write summary to {out_dir}: {exc}") from exc
    return summary
