"""CSV, SVG, trajectory and metadata persistence.

Data files carry no timestamps; provenance lives in a JSON sidecar.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, kernels
from .grid import Field, make_grid
from .monitors import EnergyReport
from .regularized import RegParams, Trajectory

REPORT_COLUMNS = (
    "run_id",
    "eps",
    "beta",
    "regime",
    "p",
    "lp_error",
    "weak_residual",
    "max_entropy_production",
    "max_sup_u",
    "steps",
    "wall_seconds",
)
ENTROPY_COLUMNS = ("pair_id", "phi_id", "production")


class OutputError(OSError):
    pass


@contextmanager
def _opened(path, mode="w"):
    path = Path(path)
    try:
        with open(path, mode, newline="") as fh:
            yield fh
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from exc


def fmt(value) -> str:
    """17 significant digits for floats, so parsing recovers the same bits."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    with _opened(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])
    return Path(path)


def _parse(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> list[dict]:
    with _opened(path, "r") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


# ---------------------------------------------------------------- reports


def report_rows(report) -> list[dict]:
    """One row per (run, p) of a ConvergenceReport."""
    rows = []
    for r in report.rows:
        for p in report.config.p_list:
            rows.append(
                {
                    "run_id": r.run_id,
                    "eps": float(r.params.eps),
                    "beta": float(r.params.beta),
                    "regime": r.params.label,
                    "p": float(p),
                    "lp_error": float(r.lp_errors.get(p, math.nan)),
                    "weak_residual": r.max_weak_residual,
                    "max_entropy_production": r.max_entropy_production,
                    "max_sup_u": float(r.max_sup_u),
                    "steps": int(r.steps),
                    "wall_seconds": float(r.wall_seconds),
                }
            )
    return rows


def write_report(report, path) -> Path:
    rows = report_rows(report) if report is not None else []
    return write_csv(path, REPORT_COLUMNS, rows)


def write_energy_csv(energy: EnergyReport, path) -> Path:
    cols = energy.columns()
    data = energy.as_dict()
    rows = ({c: float(data[c][k]) for c in cols} for k in range(len(energy)))
    return write_csv(path, cols, rows)


def read_energy_csv(path) -> EnergyReport:
    rows = read_csv(path)
    cols = EnergyReport.columns()
    return EnergyReport(**{c: np.array([float(r[c]) for r in rows]) for c in cols})


def write_entropy_csv(rows: Iterable[tuple[str, str, float]], path) -> Path:
    return write_csv(path, ENTROPY_COLUMNS, (dict(zip(ENTROPY_COLUMNS, r)) for r in rows))


# ---------------------------------------------------------------- trajectories


def save_trajectory(path, times, states, params: RegParams | None = None, meta: dict | None = None) -> Path:
    """Store a sampled trajectory as ``.npz``."""
    grid = states[0].grid
    extra = {}
    if params is not None:
        extra = {
            "eps": params.eps,
            "beta": params.beta,
            "regime": params.regime,
            "alpha": np.nan if params.alpha is None else params.alpha,
            "c_regime": params.c_regime,
        }
    try:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                times=np.asarray(times, dtype=float),
                states=np.stack([s.values for s in states]),
                domain=np.array([grid.x_min, grid.x_max, grid.n], dtype=float),
                meta=json.dumps(meta or {}, sort_keys=True),
                **extra,
            )
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from exc
    return Path(path)


def save_run(path, traj: Trajectory) -> Path:
    return save_trajectory(path, traj.times, traj.states, traj.params, traj.meta)


def load_trajectory(path):
    """Return ``(times, states, params_or_None)``."""
    try:
        data = np.load(path, allow_pickle=False)
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from exc
    x_min, x_max, n = data["domain"]
    grid = make_grid(float(x_min), float(x_max), int(n))
    states = [Field(v, grid) for v in data["states"]]
    params = None
    if "eps" in data.files:
        alpha = float(data["alpha"])
        params = RegParams(
            float(data["eps"]),
            float(data["beta"]),
            str(data["regime"]),
            None if math.isnan(alpha) else alpha,
            float(data["c_regime"]),
        )
    return data["times"], states, params


# ---------------------------------------------------------------- metadata


def metadata(**extra) -> dict:
    return {
        "package_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }


def write_metadata(path, **extra) -> Path:
    with _opened(path) as fh:
        json.dump(metadata(**extra), fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return Path(path)


# ---------------------------------------------------------------- SVG

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**k for k in range(math.floor(lo), math.ceil(hi) + 1) if lo - 1e-9 <= k <= hi + 1e-9]
    step = 10.0 ** math.floor(math.log10((hi - lo) or 1.0))
    if (hi - lo) / step < 3:
        step /= 2
    start = math.ceil(lo / step) * step
    return list(np.arange(start, hi + 0.5 * step, step))


def write_svg(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
    width: int = 640,
    height: int = 420,
) -> Path:
    """Line chart of ``(label, x, y)`` series; nonpositive values are
    dropped on log axes."""
    tx = np.log10 if logx else np.asarray
    ty = np.log10 if logy else np.asarray
    clean = []
    for label, x, y in series:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        if ok.any():
            clean.append((label, tx(x[ok]), ty(y[ok])))
    ml, mr, mt, mb = 70, 20, 36, 50
    pw, ph = width - ml - mr, height - mt - mb
    if clean:
        xs = np.concatenate([c[1] for c in clean])
        ys = np.concatenate([c[2] for c in clean])
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(x0, x1, logx):
        p = px(math.log10(v) if logx else v)
        out.append(f'<line x1="{p:.2f}" y1="{mt + ph}" x2="{p:.2f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{p:.2f}" y="{mt + ph + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1, logy):
        p = py(math.log10(v) if logy else v)
        out.append(f'<line x1="{ml - 4}" y1="{p:.2f}" x2="{ml}" y2="{p:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{p + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    for k, (label, x, y) in enumerate(clean):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 14 + 14 * k
        out.append(f'<text x="{ml + pw - 6}" y="{ly}" text-anchor="end" fill="{color}">{_esc(label)}</text>')
    out.append(f'<text x="{width / 2}" y="{mt - 14}" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2})">{_esc(ylabel)}</text>'
    )
    out.append("</svg>")
    with _opened(path) as fh:
        fh.write("\n".join(out) + "\n")
    return Path(path)


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
