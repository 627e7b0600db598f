"""Explicit time stepping with two-derivative tableaux."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spatial import SemiDiscretization, total_variation, write_snapshot
from .sspcert import ShuOsherForm
from .tableau import TwoDerivativeTableau

__all__ = ["BlowUpError", "StepRecord", "TVMonitor", "step", "step_shu_osher", "evolve"]


class BlowUpError(FloatingPointError):
    """A stage (or the update) produced non-finite values."""

    def __init__(self, message, stage=None, step=None, records=None):
        super().__init__(message)
        self.stage = stage
        self.step = step
        self.records = records or []


@dataclass(frozen=True)
class StepRecord:
    step: int
    time: float
    tv_value: float
    snapshot: Path | None = None


@dataclass
class TVMonitor:
    """Records the total variation after every step; optionally dumps snapshots."""

    snapshot_every: int | None = None
    snapshot_dir: Path | None = None
    x: np.ndarray | None = None
    records: list[StepRecord] = field(default_factory=list)

    def __call__(self, n: int, t: float, u: np.ndarray) -> None:
        path = None
        if self.snapshot_every and n % self.snapshot_every == 0 and self.snapshot_dir is not None:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            path = self.snapshot_dir / f"snapshot_{n:06d}.dat"
            x = self.x if self.x is not None else np.arange(u.size, dtype=float)
            write_snapshot(path, x, u, header=f"step {n} t {t!r}")
        self.records.append(StepRecord(step=n, time=t, tv_value=total_variation(u), snapshot=path))


def _needs(tab: TwoDerivativeTableau):
    # stage j's F (Fdot) is used only if some later weight is nonzero
    need_f = np.any(tab.A != 0, axis=0) | (tab.b != 0)
    need_fd = np.any(tab.Ahat != 0, axis=0) | (tab.bhat != 0)
    return need_f, need_fd


def _eval(sys: SemiDiscretization, y, want_f, want_fd):
    if want_f and want_fd:
        return sys.evaluate(y)
    return (sys.f_op(y) if want_f else None), (sys.fdot_op(y) if want_fd else None)


def _check(y, stage):
    if not np.all(np.isfinite(y)):
        raise BlowUpError(f"non-finite values in stage {stage}", stage=stage)


def step(tab: TwoDerivativeTableau, sys: SemiDiscretization, u: np.ndarray, dt: float) -> np.ndarray:
    """One step of the Butcher form; each stage's F and Fdot is evaluated once."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float)
    need_f, need_fd = _needs(tab)
    A, Ah = tab.A, tab.Ahat
    dt2 = dt * dt
    Fs: list = []
    Ds: list = []
    for i in range(tab.s):
        y = u
        for j in range(i):
            if A[i, j] != 0:
                y = y + (dt * A[i, j]) * Fs[j]
            if Ah[i, j] != 0:
                y = y + (dt2 * Ah[i, j]) * Ds[j]
        if i:
            _check(y, i + 1)
        F, D = _eval(sys, y, need_f[i], need_fd[i])
        Fs.append(F)
        Ds.append(D)
    out = u
    for j in range(tab.s):
        if tab.b[j] != 0:
            out = out + (dt * tab.b[j]) * Fs[j]
        if tab.bhat[j] != 0:
            out = out + (dt2 * tab.bhat[j]) * Ds[j]
    _check(out, tab.s + 1)
    return out


def step_shu_osher(
    form: ShuOsherForm,
    tab: TwoDerivativeTableau,
    sys: SemiDiscretization,
    u: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Same step evaluated as the convex combination

    ``y_i = Rv_i u + sum_j P_ij (y_j + dt/r F(y_j)) + Q_ij (y_j + dt^2/rhat Fdot(y_j))``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float)
    n = tab.s + 1
    if form.Rv.shape != (n,):
        raise ValueError("Shu-Osher form does not match the tableau's stage count")
    fe = dt / form.r
    sd = dt * dt / form.rhat
    ys, fe_terms, sd_terms = [], [], []
    for i in range(n):
        y = form.Rv[i] * u
        for j in range(i):
            if form.P[i, j] != 0:
                y = y + form.P[i, j] * fe_terms[j]
            if form.Q[i, j] != 0:
                y = y + form.Q[i, j] * sd_terms[j]
        _check(y, i + 1)
        ys.append(y)
        if i < n - 1:
            needs_f = np.any(form.P[i + 1 :, i] != 0)
            needs_d = np.any(form.Q[i + 1 :, i] != 0)
            F, D = _eval(sys, y, needs_f, needs_d)
            fe_terms.append(y + fe * F if F is not None else None)
            sd_terms.append(y + sd * D if D is not None else None)
    return ys[-1]


def evolve(
    tab: TwoDerivativeTableau,
    sys: SemiDiscretization,
    u0: np.ndarray,
    dt: float,
    n_steps: int,
    monitor: TVMonitor | None = None,
) -> tuple[np.ndarray, list[StepRecord]]:
    """Apply :func:`step` ``n_steps`` times.

    On blow-up the raised :class:`BlowUpError` carries the step index and the
    records gathered so far.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    u = np.asarray(u0, dtype=float)
    for n in range(1, n_steps + 1):
        try:
            u = step(tab, sys, u, dt)
        except BlowUpError as exc:
            exc.step = n
            exc.records = list(monitor.records) if monitor else []
            raise
        if monitor is not None:
            monitor(n, n * dt, u)
    return u, (monitor.records if monitor is not None else [])
