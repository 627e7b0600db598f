"""Numerical studies: TVD sharpness sweeps and convergence tables.

Every study is a grid of independent cells, (method, lambda) or (method, N).
Cells can run in a process pool; results are always merged in the order of
the method list and then by parameter, so reports do not depend on ``jobs``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import weno
from .families import FAMILIES, FamilyMethod, canonical_family_id, make_family
from .integrator import BlowUpError, TVMonitor, evolve
from .spatial import FluxSpec, make_semidiscretization
from .tableau import format_number

__all__ = [
    "MethodSpec",
    "SineIC",
    "StepIC",
    "parse_ic",
    "SweepSpec",
    "ConvergenceSpec",
    "ReportRow",
    "ExperimentReport",
    "NoConvergenceError",
    "exact_burgers",
    "tv_rises",
    "tv_sharpness_sweep",
    "weno_sharpness_sweep",
    "temporal_refinement_study",
    "corefinement_study",
    "run_study",
    "observed_orders",
    "CSV_HEADERS",
    "TV_THRESHOLD",
]

TV_THRESHOLD = 1e-8
CSV_HEADERS = (
    "method",
    "K",
    "param",
    "tv_step_rise",
    "tv_init_rise",
    "error_linf",
    "error_l1",
    "order",
    "runtime_s",
)
SQRT_HALF = math.sqrt(0.5)


# --------------------------------------------------------------------------
# methods and initial conditions


@dataclass(frozen=True)
class MethodSpec:
    """A family id plus the K used to pick its coefficients (None if unused)."""

    family: str
    K: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family_id(self.family))
        if self.K is not None and not self.K > 0:
            raise ValueError("K must be positive")

    def build(self) -> FamilyMethod:
        info = FAMILIES[self.family]
        return make_family(self.family, self.K if (info.needs_k or self.K is not None) else None)

    @property
    def design_order(self) -> int:
        return FAMILIES[self.family].order

    def to_text(self) -> str:
        return self.family if self.K is None else f"{self.family}@{format_number(self.K)}"

    @classmethod
    def from_text(cls, text: str) -> "MethodSpec":
        name, _, k = text.strip().partition("@")
        return cls(name, float(k) if k else None)


@dataclass(frozen=True)
class SineIC:
    """``mean + amp * sin(freq * x)``."""

    mean: float
    amp: float
    freq: float

    def __call__(self, x):
        return self.mean + self.amp * np.sin(self.freq * np.asarray(x, dtype=float))

    def derivative(self, x):
        return self.amp * self.freq * np.cos(self.freq * np.asarray(x, dtype=float))

    def bounds(self) -> tuple[float, float]:
        return self.mean - abs(self.amp), self.mean + abs(self.amp)

    def to_text(self) -> str:
        return f"sine {format_number(self.mean)} {format_number(self.amp)} {format_number(self.freq)}"


@dataclass(frozen=True)
class StepIC:
    """``high`` on the closed interval ``[lo, hi]``, ``low`` elsewhere."""

    lo: float = 0.25
    hi: float = 0.5
    high: float = 1.0
    low: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.high, self.low)

    def to_text(self) -> str:
        return "step " + " ".join(format_number(v) for v in (self.lo, self.hi, self.high, self.low))


def parse_ic(text: str) -> SineIC | StepIC:
    kind, *vals = text.split()
    nums = [float(v) for v in vals]
    if kind == "sine" and len(nums) == 3:
        return SineIC(*nums)
    if kind == "step" and len(nums) in (2, 4):
        return StepIC(*nums)
    raise ValueError(f"cannot parse initial condition {text!r}")


# --------------------------------------------------------------------------
# study specifications


@dataclass(frozen=True)
class SweepSpec:
    """TV sharpness sweep: evolve at each lambda and measure total-variation rises.

    ``n_points`` counts distinct periodic grid points; ``dt = lambda * dx``.
    Give either ``n_steps`` or ``final_time`` (then ``n = ceil(T / dt)`` and
    the step is shrunk to land on T).
    """

    methods: tuple[MethodSpec, ...]
    scheme: str
    flux: str
    n_points: int
    lambdas: tuple[float, ...]
    x0: float = 0.0
    length: float = 1.0
    n_steps: int | None = None
    final_time: float | None = None
    ic: SineIC | StepIC = StepIC()
    threshold: float = TV_THRESHOLD
    refine: bool = True
    refine_tol: float = 1e-4
    weno_eps: float = weno.EPS

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        self.validate()

    def problems(self) -> list[str]:
        out = []
        if not self.methods:
            out.append("methods: at least one method is required")
        if not self.lambdas:
            out.append("lambdas: empty grid")
        if any(not v > 0 for v in self.lambdas):
            out.append("lambdas: all values must be positive")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            out.append("lambdas: grid must be strictly increasing")
        if (self.n_steps is None) == (self.final_time is None):
            out.append("give exactly one of n_steps and final_time")
        if self.n_steps is not None and self.n_steps < 1:
            out.append("n_steps must be at least 1")
        if self.final_time is not None and not self.final_time > 0:
            out.append("final_time must be positive")
        if self.n_points < 3:
            out.append("n_points must be at least 3")
        if not self.length > 0:
            out.append("length must be positive")
        if not self.threshold > 0:
            out.append("threshold must be positive")
        return out

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise ValueError("invalid sweep spec:\n  " + "\n  ".join(probs))

    @property
    def dx(self) -> float:
        return self.length / self.n_points


REFERENCE_MODES = ("translate", "exact-burgers", "self-reference")


@dataclass(frozen=True)
class ConvergenceSpec:
    """Error-vs-resolution study.

    ``mode="temporal"`` keeps the grid fixed at ``n_list[0]`` and refines
    ``lambdas``; ``mode="corefine"`` fixes ``lambdas[0]`` and refines
    ``n_list``. ``n_list`` uses the tabulated N; when ``endpoint_included``
    the periodic grid has ``N - 1`` distinct points and ``dx = length/(N-1)``.
    ``dt = lambda * dx / max|f'(u0)|`` when ``scale_by_speed`` is set.
    """

    methods: tuple[MethodSpec, ...]
    scheme: str
    flux: str
    mode: str
    n_list: tuple[int, ...]
    lambdas: tuple[float, ...]
    final_time: float
    ic: SineIC
    x0: float = 0.0
    length: float = 2.0
    endpoint_included: bool = True
    scale_by_speed: bool = False
    reference: str = "translate"
    weno_eps: float = weno.EPS

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "n_list", tuple(int(v) for v in self.n_list))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        self.validate()

    def problems(self) -> list[str]:
        out = []
        if not self.methods:
            out.append("methods: at least one method is required")
        if self.mode not in ("temporal", "corefine"):
            out.append(f"mode must be 'temporal' or 'corefine', got {self.mode!r}")
        if not self.final_time > 0:
            out.append("final_time must be positive")
        if not self.n_list:
            out.append("n_list: empty")
        if not self.lambdas or any(not v > 0 for v in self.lambdas):
            out.append("lambdas: need positive values")
        if self.mode == "corefine" and any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            out.append("n_list must be strictly increasing for co-refinement")
        if self.reference not in REFERENCE_MODES:
            out.append(f"reference must be one of {REFERENCE_MODES}")
        if self.reference == "exact-burgers" and self.flux != "burgers":
            out.append("exact-burgers reference needs the burgers flux")
        if self.reference == "translate" and self.flux == "burgers":
            out.append("translate reference is only exact for linear advection")
        if not self.length > 0:
            out.append("length must be positive")
        return out

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise ValueError("invalid convergence spec:\n  " + "\n  ".join(probs))

    def unique_points(self, n: int) -> int:
        return n - 1 if self.endpoint_included else n

    def params(self) -> tuple:
        return self.lambdas if self.mode == "temporal" else self.n_list

    def truncated(self, max_n: int) -> "ConvergenceSpec":
        """Drop resolutions above ``max_n`` (co-refinement only)."""
        from dataclasses import replace

        keep = tuple(n for n in self.n_list if n <= max_n) if self.mode == "corefine" else self.n_list
        return replace(self, n_list=keep)


# --------------------------------------------------------------------------
# reports


@dataclass
class ReportRow:
    method: str
    K: float | None
    param: float
    tv_step_rise: float | None = None
    tv_init_rise: float | None = None
    error_linf: float | None = None
    error_l1: float | None = None
    order: float | None = None
    runtime_s: float = 0.0
    order_l1: float | None = None
    dt: float | None = None


def _fmt_machine(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format_number(v)
    return str(v)


def _fmt_human(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        if v != 0 and (abs(v) < 1e-3 or abs(v) >= 1e5):
            return f"{v:.4g}"
        return f"{v:.4f}"
    return str(v)


@dataclass
class ExperimentReport:
    kind: str
    rows: list[ReportRow]
    breakdown: dict[str, float | None] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def rows_for(self, method: str) -> list[ReportRow]:
        return [r for r in self.rows if r.method == method]

    def methods(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.method not in seen:
                seen.append(r.method)
        return seen

    def orders(self, method: str, norm: str = "linf") -> list[float]:
        key = "order" if norm == "linf" else "order_l1"
        return [getattr(r, key) for r in self.rows_for(method) if getattr(r, key) is not None]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADERS)
        for r in self.rows:
            w.writerow([_fmt_machine(getattr(r, h)) for h in CSV_HEADERS])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "breakdown": self.breakdown,
            "spatial_dominated": self.flags,
            "orders_linf": {m: self.orders(m, "linf") for m in self.methods()},
            "orders_l1": {m: self.orders(m, "l1") for m in self.methods()},
            "meta": self.meta,
        }

    def to_json(self, path: str | Path | None = None) -> str:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v

        data = clean({"summary": self.summary(), "rows": [asdict(r) for r in self.rows]})
        text = json.dumps(data, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    def write_plot_data(self, directory: str | Path) -> list[Path]:
        """One two-column file per method and metric, ``param value``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        metrics = ("tv_step_rise", "tv_init_rise") if self.kind.endswith("sweep") else ("error_linf", "error_l1")
        paths = []
        for m in self.methods():
            rows = self.rows_for(m)
            for metric in metrics:
                pts = [(r.param, getattr(r, metric)) for r in rows if getattr(r, metric) is not None]
                if not pts:
                    continue
                p = directory / f"{m}_{metric}.dat"
                np.savetxt(p, np.array(pts, dtype=float), fmt="%.17g", header=f"param {metric}")
                paths.append(p)
        return paths

    def write_all(self, directory: str | Path) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.to_csv(directory / "report.csv")
        self.to_json(directory / "summary.json")
        self.write_plot_data(directory / "plot-data")
        return {"csv": directory / "report.csv", "json": directory / "summary.json"}

    def table(self) -> str:
        """Human-readable table, four significant figures."""
        cols = ("method", "param", "tv_init_rise", "error_linf", "order", "order_l1")
        if self.kind.endswith("sweep"):
            cols = ("method", "param", "tv_step_rise", "tv_init_rise")
        lines = ["  ".join(f"{c:>14}" for c in cols)]
        for r in self.rows:
            lines.append("  ".join(f"{_fmt_human(getattr(r, c)):>14}" for c in cols))
        if self.breakdown:
            lines.append("")
            for m, lam in self.breakdown.items():
                lines.append(f"breakdown lambda {m}: {_fmt_human(lam) if lam is not None else 'none'}")
        for m, flag in self.flags.items():
            if flag:
                lines.append(f"{m}: finest-pair order below design order (spatial error dominates)")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# exact Burgers solution


class NoConvergenceError(RuntimeError):
    """The characteristic equation could not be solved (typically past the shock time)."""


def _ic_derivative(ic: Callable) -> Callable:
    d = getattr(ic, "derivative", None)
    if d is not None:
        return d
    h = 1e-6
    return lambda x: (ic(x + h) - ic(x - h)) / (2 * h)


def exact_burgers(x, t: float, ic: Callable, newton_tol: float = 1e-14, max_iter: int = 100):
    """Smooth solution of ``U_t + (U^2/2)_x = 0`` by the method of characteristics.

    Solves ``xi + t*U0(xi) = x`` for the foot ``xi`` of the characteristic and
    returns ``U0(xi)``. Newton starts at ``xi = x``; because the map is
    increasing before the shock, each iterate is kept inside a sign-change
    bracket and replaced by the midpoint when it would leave it.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    dic = _ic_derivative(ic)

    def g(xi):
        return xi + t * ic(xi) - x

    if hasattr(ic, "bounds"):
        umin, umax = ic.bounds()
        lo, hi = x - t * umax, x - t * umin
    else:
        centre = x - t * ic(x)
        w = np.ones_like(x)
        for _ in range(60):
            lo, hi = centre - w, centre + w
            bad = (g(lo) > 0) | (g(hi) < 0)
            if not bad.any():
                break
            w = np.where(bad, 2 * w, w)
        else:
            raise NoConvergenceError("could not bracket the characteristic foot")
    lo = lo.copy()
    hi = hi.copy()

    xi = x.copy()
    for _ in range(max_iter):
        gx = g(xi)
        dg = 1.0 + t * dic(xi)
        lo = np.where(gx < 0, np.maximum(lo, xi), lo)
        hi = np.where(gx > 0, np.minimum(hi, xi), hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = xi - gx / dg
        ok = np.isfinite(new) & (dg > 0) & (new >= lo) & (new <= hi)
        new = np.where(gx == 0, xi, np.where(ok, new, 0.5 * (lo + hi)))
        change = np.abs(new - xi)
        xi = new
        if np.all(change <= newton_tol):
            break
    else:
        raise NoConvergenceError(
            f"characteristic equation did not converge in {max_iter} iterations "
            f"(largest update {float(np.max(change)):.3g}); is t past the shock time?"
        )
    if t > 0 and np.any(1.0 + t * dic(xi) <= 0):
        raise NoConvergenceError("characteristics have crossed: t is past the shock time")
    out = ic(xi)
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# TV sweeps


def tv_rises(tv_values: Sequence[float]) -> tuple[float, float]:
    """Largest per-step rise and largest rise over the initial value.

    ``tv_values[0]`` is the initial total variation.
    """
    tv = np.asarray(tv_values, dtype=float)
    if tv.size < 2:
        return 0.0, 0.0
    return float(np.max(np.diff(tv))), float(np.max(tv[1:] - tv[0]))


def _sweep_system(spec: SweepSpec):
    x = spec.x0 + spec.dx * np.arange(spec.n_points)
    u0 = spec.ic(x)
    sd = make_semidiscretization(spec.flux, spec.scheme, spec.n_points, spec.x0, spec.length, u0=u0)
    return sd, u0


def _sweep_cell(spec: SweepSpec, tab, sd, u0, lam: float) -> ReportRow:
    t0 = time.perf_counter()
    dt = lam * sd.dx
    if spec.n_steps is not None:
        n = spec.n_steps
    else:
        n = max(1, math.ceil(spec.final_time / dt - 1e-9))
        dt = spec.final_time / n
    mon = TVMonitor()
    tv0 = float(np.abs(np.roll(u0, -1) - u0).sum())
    try:
        evolve(tab, sd, u0, dt, n, monitor=mon)
        step_rise, init_rise = tv_rises([tv0] + [r.tv_value for r in mon.records])
    except BlowUpError:
        step_rise = init_rise = math.inf
    if not math.isfinite(init_rise):
        step_rise = init_rise = math.inf
    return ReportRow(
        method="",
        K=None,
        param=lam,
        tv_step_rise=step_rise,
        tv_init_rise=init_rise,
        runtime_s=time.perf_counter() - t0,
        dt=dt,
    )


def _sweep_method(spec: SweepSpec, method: MethodSpec) -> tuple[list[ReportRow], float | None]:
    with weno.epsilon(spec.weno_eps):
        tab = method.build().tableau
        sd, u0 = _sweep_system(spec)
        rows = [_sweep_cell(spec, tab, sd, u0, lam) for lam in spec.lambdas]
        breakdown = None
        for i, r in enumerate(rows):
            if r.tv_init_rise > spec.threshold:
                breakdown = r.param
                if spec.refine and i > 0:
                    lo, hi = rows[i - 1].param, r.param
                    while hi - lo > spec.refine_tol:
                        mid = 0.5 * (lo + hi)
                        if _sweep_cell(spec, tab, sd, u0, mid).tv_init_rise > spec.threshold:
                            hi = mid
                        else:
                            lo = mid
                    breakdown = hi
                break
    for r in rows:
        r.method, r.K = method.family, method.K
    return rows, breakdown


def _run_sweep(spec: SweepSpec, kind: str, jobs: int) -> ExperimentReport:
    t0 = time.perf_counter()
    results = _map(_sweep_method, [(spec, m) for m in spec.methods], jobs)
    rows, breakdown = [], {}
    for m, (mrows, b) in zip(spec.methods, results):
        rows.extend(mrows)
        breakdown[m.to_text()] = b
    meta = {"dx": spec.dx, "threshold": spec.threshold, "runtime_s": time.perf_counter() - t0}
    return ExperimentReport(kind=kind, rows=rows, breakdown=breakdown, meta=meta)


def tv_sharpness_sweep(spec: SweepSpec, jobs: int = 1) -> ExperimentReport:
    """Breakdown lambda = smallest lambda whose rise over the initial TV exceeds the threshold.

    Blow-ups count as an infinite rise. With ``refine`` the first crossing on
    the grid is bisected to ``refine_tol``.
    """
    return _run_sweep(spec, "tv_sweep", jobs)


def weno_sharpness_sweep(spec: SweepSpec, jobs: int = 1) -> ExperimentReport:
    if not spec.scheme.startswith("weno"):
        raise ValueError("weno_sharpness_sweep needs a WENO scheme")
    return _run_sweep(spec, "weno_sweep", jobs)


# --------------------------------------------------------------------------
# convergence studies


def _conv_cell(spec: ConvergenceSpec, method: MethodSpec, n_grid: int, lam: float) -> ReportRow:
    t0 = time.perf_counter()
    with weno.epsilon(spec.weno_eps):
        tab = method.build().tableau
        m = spec.unique_points(n_grid)
        dx = spec.length / m
        x = spec.x0 + dx * np.arange(m)
        u0 = spec.ic(x)
        sd = make_semidiscretization(spec.flux, spec.scheme, m, spec.x0, spec.length, u0=u0)
        speed = FluxSpec(spec.flux).max_speed(u0) if spec.scale_by_speed else 1.0
        dt = lam * dx / speed
        n = max(1, math.ceil(spec.final_time / dt - 1e-9))
        dt = spec.final_time / n
        try:
            u, _ = evolve(tab, sd, u0, dt, n)
        except BlowUpError:
            u = np.full_like(u0, np.inf)
    T = spec.final_time
    if spec.reference == "translate":
        shift = T if spec.flux == "advection-right" else -T
        ref = spec.ic(spec.x0 + np.mod(x - shift - spec.x0, spec.length))
    elif spec.reference == "exact-burgers":
        ref = exact_burgers(x, T, spec.ic)
    else:
        ref = None
    row = ReportRow(method=method.family, K=method.K, param=float(n_grid if spec.mode == "corefine" else lam), dt=dt)
    if ref is not None:
        err = u - ref
        row.error_linf = float(np.max(np.abs(err)))
        row.error_l1 = float(dx * np.sum(np.abs(err)))
    else:
        row.error_linf = row.error_l1 = None
        row.meta_solution = u  # type: ignore[attr-defined]
    row.runtime_s = time.perf_counter() - t0
    return row


def observed_orders(errors: Sequence[float], steps: Sequence[float]) -> list[float | None]:
    """Order between consecutive refinements, ``log(e1/e0)/log(h1/h0)``; first entry None."""
    out: list[float | None] = [None]
    for (e0, h0), (e1, h1) in zip(zip(errors, steps), zip(errors[1:], steps[1:])):
        if not (e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1)) or h0 == h1:
            out.append(None)
        else:
            out.append(math.log(e1 / e0) / math.log(h1 / h0))
    return out


def _run_convergence(spec: ConvergenceSpec, kind: str, jobs: int) -> ExperimentReport:
    t0 = time.perf_counter()
    if spec.mode == "temporal":
        cells = [(spec, m, spec.n_list[0], lam) for m in spec.methods for lam in spec.lambdas]
    else:
        cells = [(spec, m, n, spec.lambdas[0]) for m in spec.methods for n in spec.n_list]
    rows = _map(_conv_cell, cells, jobs)
    if spec.reference == "self-reference":
        _fill_self_reference(spec, rows)
    flags = {}
    for m in spec.methods:
        mrows = [r for r in rows if r.method == m.family and r.K == m.K]
        mrows.sort(key=lambda r: -r.dt)
        steps = [r.dt for r in mrows]
        for r, o, o1 in zip(
            mrows,
            observed_orders([r.error_linf for r in mrows], steps),
            observed_orders([r.error_l1 for r in mrows], steps),
        ):
            r.order, r.order_l1 = o, o1
        last = mrows[-1].order if mrows else None
        flags[m.to_text()] = bool(last is not None and last < m.design_order - 0.3)
    meta = {"mode": spec.mode, "runtime_s": time.perf_counter() - t0, "weno_eps": spec.weno_eps}
    return ExperimentReport(kind=kind, rows=rows, flags=flags, meta=meta)


def _fill_self_reference(spec: ConvergenceSpec, rows: list[ReportRow]) -> None:
    # finest run of each method is the reference; only valid for the temporal mode
    if spec.mode != "temporal":
        raise ValueError("self-reference is only defined for temporal refinement")
    for m in spec.methods:
        mrows = [r for r in rows if r.method == m.family and r.K == m.K]
        finest = min(mrows, key=lambda r: r.dt)
        ref = finest.meta_solution  # type: ignore[attr-defined]
        dx = spec.length / spec.unique_points(spec.n_list[0])
        for r in mrows:
            if r is finest:
                continue
            err = r.meta_solution - ref  # type: ignore[attr-defined]
            r.error_linf = float(np.max(np.abs(err)))
            r.error_l1 = float(dx * np.sum(np.abs(err)))
        rows.remove(finest)
    for r in rows:
        r.__dict__.pop("meta_solution", None)


def temporal_refinement_study(spec: ConvergenceSpec, jobs: int = 1) -> ExperimentReport:
    """Fixed grid, shrinking lambda; orders use the actual step sizes."""
    if spec.mode != "temporal":
        raise ValueError("temporal_refinement_study needs mode='temporal'")
    return _run_convergence(spec, "temporal", jobs)


def corefinement_study(spec: ConvergenceSpec, jobs: int = 1) -> ExperimentReport:
    """Fixed lambda, shrinking dx (and dt with it)."""
    if spec.mode != "corefine":
        raise ValueError("corefinement_study needs mode='corefine'")
    return _run_convergence(spec, "corefine", jobs)


def run_study(spec: SweepSpec | ConvergenceSpec, jobs: int = 1) -> ExperimentReport:
    if isinstance(spec, SweepSpec):
        if spec.scheme.startswith("weno"):
            return weno_sharpness_sweep(spec, jobs)
        return tv_sharpness_sweep(spec, jobs)
    if spec.mode == "temporal":
        return temporal_refinement_study(spec, jobs)
    return corefinement_study(spec, jobs)


def _star(args):
    fn, a = args
    return fn(*a)


def _map(fn, arglists, jobs: int):
    if jobs is None or jobs <= 1 or len(arglists) <= 1:
        return [fn(*a) for a in arglists]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order, so the merge is deterministic
        return list(pool.map(_star, [(fn, a) for a in arglists]))
