"""Energy functionals along trajectories and the balance laws they obey.

L2 balance (multiply by u, integrate by parts)::

    d/dt ||u||^2 + 2 eps ||u_x||^2 + 36 beta int u^2 u_x^2 = 0

Higher-order balance (multiply by -beta u_xx + (3/5) u^5)::

    d/dt (beta/2 ||u_x||^2 + 1/10 ||u||_6^6) + beta eps ||u_xx||^2
      + 3 eps int u^4 u_x^2 + 3 beta^2 int u^2 u_xx^2
      + 18 beta int u^6 u_x^2 + 3 beta^2 ||u_x||_4^4 = 0

Alternative coefficients for the ``beta`` terms can be passed to the
residual functions so that competing constants can be compared on data.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .grid import Field, d1, d2

L2_BETA_COEFF = 36.0
L2_BETA_COEFF_ALT = 18.0
H1_BETA_COEFF = 18.0
H1_BETA_COEFF_ALT = 42.0 / 5.0
BOUND_SLACK = 100.0


@dataclass
class EnergyReport:
    times: np.ndarray
    l2_sq: np.ndarray
    grad_l2_sq: np.ndarray
    u2ux2: np.ndarray
    l6: np.ndarray
    l10: np.ndarray
    lap_l2_sq: np.ndarray
    grad_l4: np.ndarray
    u4ux2: np.ndarray
    u6ux2: np.ndarray
    u8ux2: np.ndarray
    u10ux2: np.ndarray
    u2uxx2: np.ndarray
    cross_l1: np.ndarray
    sup_abs: np.ndarray

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.columns()}

    def __len__(self):
        return len(self.times)

    def merge(self, other: "EnergyReport") -> "EnergyReport":
        """Union of two reports of one run, ordered by time."""
        merged = {k: np.concatenate([getattr(self, k), getattr(other, k)]) for k in self.columns()}
        _, idx = np.unique(merged["times"], return_index=True)
        return EnergyReport(**{k: v[idx] for k, v in merged.items()})


def functionals(v: np.ndarray, dx: float) -> dict[str, float]:
    """Every functional of one snapshot.

    Gradient integrals use the edge difference ``D+ u = (u[i+1] - u[i]) / dx``
    with endpoint-averaged weights (midpoint rule on cell edges), which is
    the form that sums by parts against ``d2``.
    """
    up = np.roll(v, -1)
    ux = (up - v) / dx
    uxx = d2(v, dx)
    ux2 = ux * ux
    u2 = v * v
    u2e = 0.5 * (u2 + up * up)

    def edge_pow(k):
        return 0.5 * (u2**k + (up * up) ** k)

    s = lambda a: float(np.sum(a) * dx)  # noqa: E731
    u4 = u2 * u2
    return {
        "l2_sq": s(u2),
        "grad_l2_sq": s(ux2),
        "u2ux2": s(u2e * ux2),
        "l6": s(u4 * u2),
        "l10": s(u4 * u4 * u2),
        "lap_l2_sq": s(uxx * uxx),
        "grad_l4": s(ux2 * ux2),
        "u4ux2": s(edge_pow(2) * ux2),
        "u6ux2": s(edge_pow(3) * ux2),
        "u8ux2": s(edge_pow(4) * ux2),
        "u10ux2": s(edge_pow(5) * ux2),
        "u2uxx2": s(u2 * uxx * uxx),
        "cross_l1": s(np.abs(d1(v, dx) * uxx)),
        "sup_abs": float(np.max(np.abs(v))),
    }


def energy_report(traj) -> EnergyReport:
    dx = traj.grid.dx
    rows = [functionals(s.values, dx) for s in traj.states]
    cols = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    return EnergyReport(times=np.asarray(traj.times, dtype=float), **cols)


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


@dataclass
class IdentityResidual:
    times: np.ndarray  # interior output times where the residual is defined
    residual: np.ndarray
    cumulative: np.ndarray  # conserved quantity on all output times
    scale: float  # initial value of the balanced functional

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def relative(self) -> float:
        return self.max_abs / self.scale if self.scale > 0 else self.max_abs

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.cumulative - self.cumulative[0])))


def _uniform_step(times: np.ndarray) -> float:
    if len(times) < 3:
        raise ValueError("need at least three output times")
    dt = np.diff(times)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
        raise ValueError("output times must be uniformly spaced")
    return float(dt[0])


def _residual(times, energy, dissipation) -> IdentityResidual:
    h = _uniform_step(times)
    rate = (energy[2:] - energy[:-2]) / (2.0 * h)
    res = rate + dissipation[1:-1]
    cumulative = energy + _cumtrapz(dissipation, times)
    return IdentityResidual(times[1:-1], res, cumulative, float(abs(energy[0])))


def _report(traj_or_report):
    return traj_or_report if isinstance(traj_or_report, EnergyReport) else energy_report(traj_or_report)


def lemma21_identity_residual(traj, p, beta_coeff: float = L2_BETA_COEFF) -> IdentityResidual:
    """Centred-difference residual of the L2 balance."""
    r = _report(traj)
    diss = 2.0 * p.eps * r.grad_l2_sq + beta_coeff * p.beta * r.u2ux2
    return _residual(r.times, r.l2_sq, diss)


def lemma22_identity_residual(traj, p, beta_coeff: float = H1_BETA_COEFF) -> IdentityResidual:
    r = _report(traj)
    b, e = p.beta, p.eps
    energy = 0.5 * b * r.grad_l2_sq + 0.1 * r.l6
    diss = (
        b * e * r.lap_l2_sq
        + 3.0 * e * r.u4ux2
        + 3.0 * b * b * r.u2uxx2
        + beta_coeff * b * r.u6ux2
        + 3.0 * b * b * r.grad_l4
    )
    return _residual(r.times, energy, diss)


def agmon_bound_check(u: Field) -> tuple[float, float]:
    """``(max u^2, 2 ||u|| ||u_x||)``; the first never exceeds the second."""
    v = u.values
    dx = u.grid.dx
    lhs = float(np.max(v * v))
    grad = (np.roll(v, -1) - v) / dx
    rhs = 2.0 * np.sqrt(np.sum(v * v) * dx) * np.sqrt(np.sum(grad * grad) * dx)
    return lhs, float(rhs)


def agmon_violations(traj, tol: float = 1e-8) -> int:
    bad = 0
    for s in traj.states:
        lhs, rhs = agmon_bound_check(s)
        bad += lhs > rhs + tol
    return bad


@dataclass
class Lemma23Row:
    eps: float
    beta: float
    q1: float
    q2: float
    q3: float


@dataclass
class Lemma23Table:
    rows: list[Lemma23Row]
    slack: float

    def _ratio(self, attr: str) -> float:
        vals = np.array([getattr(r, attr) for r in self.rows])
        return float(np.max(vals) / vals[0]) if vals[0] > 0 else np.inf

    @property
    def growth(self) -> dict[str, float]:
        return {k: self._ratio(k) for k in ("q1", "q2", "q3")}

    @property
    def bounded(self) -> dict[str, bool]:
        return {k: v <= self.slack for k, v in self.growth.items()}


def lemma23_trend(runs, slack: float = BOUND_SLACK) -> Lemma23Table:
    """Higher-order bounds along a sweep.

    ``runs`` is a sequence of ``(params, report)`` ordered by decreasing
    eps and sharing one final time. Each quantity is bounded if it stays
    within ``slack`` times its value at the first (largest eps) run.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("no runs")
    regimes = {(p.regime, p.alpha) for p, _ in runs}
    if len(regimes) > 1:
        raise ValueError(f"mixed regimes in one table: {sorted(map(str, regimes))}")
    t_ends = {float(r.times[-1]) for _, r in runs}
    if len(t_ends) > 1:
        raise ValueError("runs must share the final time")
    rows = []
    for p, r in runs:
        e, b, t = p.eps, p.beta, r.times
        integrated = _cumtrapz(
            45.0 * e * e * b * r.grad_l4
            + 4.0 * e * r.u8ux2
            + 0.5 * e**3 * r.lap_l2_sq
            + 15.0 * b * e * e * r.u2uxx2
            + 48.0 * b * r.u10ux2,
            t,
        )[-1]
        q1 = 0.1 * r.l10[-1] + 1.5 * e * e * r.grad_l2_sq[-1] + integrated
        q2 = b * _cumtrapz(r.cross_l1, t)[-1]
        q3 = b * b * _cumtrapz(r.lap_l2_sq, t)[-1] / e
        rows.append(Lemma23Row(e, b, float(q1), float(q2), float(q3)))
    return Lemma23Table(rows, slack)


def linf_scaling(runs) -> float:
    """Least-squares slope of ``log max_t sup|u|`` against ``log beta``."""
    runs = list(runs)
    betas = np.array([p.beta for p, _ in runs])
    if len(np.unique(betas)) < 3:
        raise ValueError("need at least three distinct beta values")
    sups = np.array([np.max(r.sup_abs) for _, r in runs])
    slope, _ = np.polyfit(np.log(betas), np.log(sups), 1)
    return float(slope)
