"""Vanishing diffusion-dispersion sweeps against the entropy solution."""

from __future__ import annotations

import configparser
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import entropy as ent
from . import monitors
from .grid import Field, Grid1D, make_grid
from .hyperbolic import solve_reference
from .regularized import BlowUpError, RegParams, TimeControls, beta_for, integrate

log = logging.getLogger(__name__)

MOLLIFIER_SCALE = 1.0


# ---------------------------------------------------------------- initial data


def _heaviside(s):
    return 0.5 * (1.0 + np.tanh(s))


def profile(name: str, x: np.ndarray, **kw) -> np.ndarray:
    """Named initial profiles.

    ``gaussian``: ``amp * exp(-((x - x0) / width)^2)``.
    ``riemann``: a smoothed jump from ``u_l`` to ``u_r`` at ``x0`` inside a
    smooth window of half-length ``half_length``, so the datum decays.
    ``sine``: ``amp * sin(2 pi k (x - x_min) / L)``.
    ``box``: ``amp`` on ``[a, b]``, smoothed by ``width``.
    ``constant``: ``value`` everywhere.
    """
    if name == "constant":
        return np.full_like(x, kw.get("value", 0.0))
    if name == "gaussian":
        amp, x0, width = kw.get("amp", 1.0), kw.get("x0", 0.0), kw.get("width", 1.0)
        return amp * np.exp(-(((x - x0) / width) ** 2))
    if name == "riemann":
        ul, ur = kw.get("u_l", 0.0), kw.get("u_r", 1.0)
        width, x0, half = kw.get("width", 0.02), kw.get("x0", 0.0), kw.get("half_length", 2.0)
        jump = ul + (ur - ul) * _heaviside((x - x0) / width)
        window = _heaviside((x - x0 + half) / width) - _heaviside((x - x0 - half) / width)
        return jump * window
    if name == "box":
        amp, a, b, width = kw.get("amp", 1.0), kw.get("a", -1.0), kw.get("b", 1.0), kw.get("width", 0.02)
        return amp * (_heaviside((x - a) / width) - _heaviside((x - b) / width))
    if name == "sine":
        amp, k = kw.get("amp", 1.0), kw.get("k", 1)
        L = kw["length"]
        return amp * np.sin(2.0 * np.pi * k * (x - kw["x_min"]) / L)
    raise ValueError(f"unknown datum {name!r}")


def make_datum(grid: Grid1D, name: str, path: str | None = None, **kw) -> Field:
    if name == "file":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        # two columns (x, u) are resampled onto the grid, one column is taken as-is
        if data.shape[1] >= 2:
            return Field(np.interp(grid.x, data[:, 0], data[:, 1]), grid)
        return Field(data[:, 0], grid)
    if name == "sine":
        kw = {**kw, "length": grid.length, "x_min": grid.x_min}
    return Field(profile(name, grid.x, **kw), grid)


def mollifier_width(grid: Grid1D, p: RegParams, scale: float = MOLLIFIER_SCALE) -> float:
    return max(4.0 * grid.dx, scale * np.sqrt(p.beta + p.eps**2))


def mollify_initial(u0: Field, p: RegParams, scale: float = MOLLIFIER_SCALE) -> Field:
    """Periodic convolution with a unit-mass C-infinity bump of half-width
    ``max(4 dx, scale * sqrt(beta + eps^2))``."""
    grid = u0.grid
    h = mollifier_width(grid, p, scale)
    if 2.0 * h > grid.length / 4.0:
        raise ValueError(f"mollifier width {2 * h:.3g} exceeds a quarter of the domain")
    m = int(np.floor(h / grid.dx))
    offsets = np.arange(-m, m + 1) * grid.dx
    kernel = ent.bump(offsets / h)[0]
    kernel /= kernel.sum()
    padded = np.zeros(grid.n)
    padded[: m + 1] = kernel[m:]
    padded[-m:] = kernel[:m]
    out = np.fft.irfft(np.fft.rfft(u0.values) * np.fft.rfft(padded), n=grid.n)
    return Field(out, grid)


def lp_local_error(u: Field, v: Field, p: float, window: tuple[float, float]) -> float:
    """``(sum_{x_i in window} |u_i - v_i|^p dx)^(1/p)``."""
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    if not 1.0 <= p < 10.0:
        raise ValueError("p must lie in [1, 10)")
    mask = (u.grid.x >= window[0]) & (u.grid.x <= window[1])
    if not mask.any():
        raise ValueError("window contains no cells")
    diff = np.abs(u.values[mask] - v.values[mask])
    return float((np.sum(diff**p) * u.grid.dx) ** (1.0 / p))


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class SweepConfig:
    datum: str = "riemann"
    datum_params: dict = field(default_factory=dict)
    datum_path: str | None = None
    x_min: float = -4.0
    x_max: float = 4.0
    n: int = 4096
    T: float = 0.5
    eps_list: tuple[float, ...] = tuple(2.0**-k for k in range(3, 8))
    regime: str = "eps_squared"
    alpha: float | None = None
    c_regime: float = 1.0
    beta_power: float = 1.0  # free regime: beta = c_regime * eps**beta_power
    beta_list: tuple[float, ...] | None = None  # free regime: explicit betas
    p_list: tuple[float, ...] = (1.0, 2.0)
    window: tuple[float, float] | None = None
    scheme: str = "imex"
    cfl_safety: float = 0.5
    n_out: int = 100
    entropy_suite: str = "standard"
    phi_suite: str = "standard"
    workers: int | None = None

    def __post_init__(self):
        eps = np.asarray(self.eps_list, dtype=float)
        if eps.size == 0 or np.any(eps <= 0.0) or np.any(np.diff(eps) >= 0.0):
            raise ValueError("eps_list must be positive and strictly decreasing")
        if any(not 1.0 <= p < 10.0 for p in self.p_list):
            raise ValueError("p_list entries must lie in [1, 10)")
        if self.beta_list is not None and len(self.beta_list) != len(self.eps_list):
            raise ValueError("beta_list must match eps_list in length")
        if self.regime not in ("eps_squared", "eps_power", "free"):
            raise ValueError(f"unknown regime {self.regime!r}")
        a, b = self.window_bounds
        if not self.x_min <= a < b <= self.x_max:
            raise ValueError("window must lie inside the domain")

    @property
    def window_bounds(self) -> tuple[float, float]:
        if self.window is not None:
            return tuple(self.window)
        quarter = 0.25 * (self.x_max - self.x_min)
        return self.x_min + quarter, self.x_max - quarter

    def params(self) -> list[RegParams]:
        out = []
        for k, eps in enumerate(self.eps_list):
            if self.regime == "free":
                beta = self.beta_list[k] if self.beta_list is not None else self.c_regime * eps**self.beta_power
                out.append(RegParams(eps, beta, "free"))
            else:
                beta = beta_for(eps, self.regime, self.alpha, self.c_regime)
                out.append(RegParams(eps, beta, self.regime, self.alpha, self.c_regime))
        return out

    def grid(self) -> Grid1D:
        return make_grid(self.x_min, self.x_max, self.n)


_LIST_KEYS = {"eps_list", "p_list", "window", "beta_list"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name == "datum_params":
        out = {}
        for item in filter(None, (s.strip() for s in raw.split(";"))):
            k, v = item.split("=", 1)
            out[k.strip()] = float(v)
        return out
    if raw.lower() in ("none", ""):
        return None
    if name in _LIST_KEYS:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if name in ("n", "n_out", "workers"):
        return int(raw)
    if name in ("x_min", "x_max", "T", "alpha", "c_regime", "beta_power", "cfl_safety"):
        return float(raw)
    return raw


def parse_config_text(text: str) -> SweepConfig:
    """``key = value`` lines; lists are comma separated and
    ``datum_params`` is ``k=v; k=v``. A ``[sweep]`` header is optional."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[sweep]\n" + text
    cp.read_string(text)
    section = cp["sweep"]
    known = {f.name: f for f in fields(SweepConfig)}
    kw = {}
    for key, raw in section.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        kw[key] = _coerce(key, raw)
    return SweepConfig(**kw)


def load_config(path: str | os.PathLike) -> SweepConfig:
    return parse_config_text(Path(path).read_text())


def config_text(cfg: SweepConfig) -> str:
    """Inverse of :func:`parse_config_text`."""
    lines = []
    for f in fields(SweepConfig):
        v = getattr(cfg, f.name)
        if f.name == "window" and v is None:
            continue
        if v is None:
            lines.append(f"{f.name} = none")
        elif f.name == "datum_params":
            lines.append(f"{f.name} = " + "; ".join(f"{k}={float(x)!r}" for k, x in v.items()))
        elif isinstance(v, tuple):
            lines.append(f"{f.name} = " + ", ".join(repr(float(x)) for x in v))
        else:
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- sweep


@dataclass
class SweepRow:
    run_id: str
    params: RegParams
    status: str
    lp_errors: dict[float, float] = field(default_factory=dict)
    weak_residuals: list[float] = field(default_factory=list)
    entropy_productions: np.ndarray | None = None  # pairs x phis
    max_sup_u: float = float("nan")
    steps: int = 0
    wall_seconds: float = 0.0
    boundary_flag: bool = False
    agmon_violations: int = 0
    l2_identity: float = float("nan")
    energy: monitors.EnergyReport | None = None
    mass_drift: float = float("nan")
    error: str = ""

    @property
    def max_weak_residual(self) -> float:
        return float(np.max(np.abs(self.weak_residuals))) if self.weak_residuals else float("nan")

    @property
    def max_entropy_production(self) -> float:
        if self.entropy_productions is None:
            return float("nan")
        return float(np.max(self.entropy_productions))


@dataclass
class ConvergenceReport:
    config: SweepConfig
    rows: list[SweepRow]
    pair_names: list[str]
    phi_names: list[str]

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.rows])

    def errors(self, p: float = 1.0) -> np.ndarray:
        return np.array([r.lp_errors.get(p, np.nan) for r in self.rows])

    def rates(self) -> dict[float, float]:
        """Log-log slope of the ``L^p`` error against eps."""
        eps = self.column_eps()
        out = {}
        for p in self.config.p_list:
            err = self.errors(p)
            ok = np.isfinite(err) & (err > 0)
            out[p] = float(np.polyfit(np.log(eps[ok]), np.log(err[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
        return out

    def column_eps(self) -> np.ndarray:
        return np.array([r.params.eps for r in self.rows])

    def energy_runs(self):
        return [(r.params, r.energy) for r in self.rows if r.energy is not None]


def _suites(cfg: SweepConfig):
    if cfg.entropy_suite != "standard":
        raise ValueError(f"unknown entropy suite {cfg.entropy_suite!r}")
    if cfg.phi_suite != "standard":
        raise ValueError(f"unknown test-function suite {cfg.phi_suite!r}")
    return ent.standard_suite(), ent.standard_phi_suite(cfg.window_bounds, cfg.T)


def reference_solution(cfg: SweepConfig) -> Field:
    grid = cfg.grid()
    u0 = make_datum(grid, cfg.datum, cfg.datum_path, **cfg.datum_params)
    return solve_reference(u0, cfg.T)


def run_row(cfg: SweepConfig, k: int, p: RegParams, reference: Field | None = None) -> SweepRow:
    """One (eps, beta) run of a sweep; independent of every other row."""
    grid = cfg.grid()
    run_id = f"r{k:02d}_eps{p.eps:.6g}_beta{p.beta:.6g}"
    u0 = make_datum(grid, cfg.datum, cfg.datum_path, **cfg.datum_params)
    if reference is None:
        reference = solve_reference(u0, cfg.T)
    pairs, phis = _suites(cfg)
    tic = time.perf_counter()
    try:
        start = mollify_initial(u0, p)
        controls = TimeControls.uniform(cfg.T, cfg.n_out, scheme=cfg.scheme, cfl_safety=cfg.cfl_safety)
        traj = integrate(start, p, controls)
    except (BlowUpError, FloatingPointError) as exc:
        if cfg.regime != "free":
            raise
        return SweepRow(run_id, p, "blowup", wall_seconds=time.perf_counter() - tic, error=str(exc))
    report = monitors.energy_report(traj)
    row = SweepRow(
        run_id,
        p,
        "ok",
        lp_errors={q: lp_local_error(traj.final, reference, q, cfg.window_bounds) for q in cfg.p_list},
        weak_residuals=[ent.weak_residual(traj, phi) for phi in phis],
        entropy_productions=np.array(
            [[ent.entropy_production(traj, pair, phi) for phi in phis] for pair in pairs]
        ),
        max_sup_u=float(np.max(report.sup_abs)),
        steps=traj.steps,
        wall_seconds=time.perf_counter() - tic,
        boundary_flag=traj.boundary_flag,
        agmon_violations=monitors.agmon_violations(traj),
        l2_identity=monitors.lemma21_identity_residual(report, p).relative,
        energy=report,
        mass_drift=traj.final.integral() - traj.states[0].integral(),
    )
    return row


def _worker_count(cfg: SweepConfig, rows: int) -> int:
    cap = os.environ.get("IBSH_THREADS")
    n = cfg.workers or (int(cap) if cap else os.cpu_count() or 1)
    if cap:
        n = min(n, int(cap))
    return max(1, min(n, rows))


def run_sweep(cfg: SweepConfig) -> ConvergenceReport:
    """Run every (eps, beta) row of ``cfg`` and collect the diagnostics.

    Rows run in worker processes when more than one worker is allowed
    (``IBSH_THREADS`` caps the count); results are reduced in eps order.
    """
    params = cfg.params()
    reference = reference_solution(cfg)
    workers = _worker_count(cfg, len(params))
    if workers == 1:
        rows = [run_row(cfg, k, p, reference) for k, p in enumerate(params)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_row, cfg, k, p, reference) for k, p in enumerate(params)]
            rows = [f.result() for f in futures]
    pairs, phis = _suites(cfg)
    return ConvergenceReport(cfg, rows, [p.name for p in pairs], [f.name for f in phis])


def subconfig(cfg: SweepConfig, keep: list[int]) -> SweepConfig:
    """Same sweep restricted to the eps indices in ``keep``."""
    extra = {}
    if cfg.beta_list is not None:
        extra["beta_list"] = tuple(cfg.beta_list[k] for k in keep)
    return replace(cfg, eps_list=tuple(cfg.eps_list[k] for k in keep), **extra)
