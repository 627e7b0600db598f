"""Periodic grids and the spatial operators F and Fdot used by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .weno import GridTooSmallError, weno_diff

__all__ = [
    "GridFunction",
    "FluxSpec",
    "SemiDiscretization",
    "IncompatibleSchemeError",
    "GridTooSmallError",
    "SCHEMES",
    "periodic_grid",
    "total_variation",
    "upwind_d_plus",
    "centered_second",
    "upwind_twice",
    "weno_diff",
    "spectral_matrix",
    "make_semidiscretization",
    "write_snapshot",
    "read_snapshot",
]

SCHEMES = ("first-order", "weno5", "weno7", "weno9", "spectral")


class IncompatibleSchemeError(ValueError):
    pass


@dataclass
class GridFunction:
    """Point values on a uniform periodic grid, ``x_j = x0 + j*dx``."""

    values: np.ndarray
    x0: float
    dx: float
    periodic: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def total_variation(self) -> float:
        return total_variation(self.values)


def periodic_grid(x0: float, length: float, n: int) -> tuple[np.ndarray, float]:
    """``n`` distinct points covering one period ``[x0, x0 + length)``."""
    if n < 2:
        raise ValueError("need at least two grid points")
    dx = length / n
    return x0 + dx * np.arange(n), dx


def total_variation(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.abs(np.roll(u, -1) - u).sum())


def upwind_d_plus(u: np.ndarray, dx: float) -> np.ndarray:
    """``(u_{j+1} - u_j) / dx`` with periodic wrap."""
    u = np.asarray(u, dtype=float)
    if u.size < 3:
        raise GridTooSmallError("upwind difference needs at least 3 points")
    return (np.roll(u, -1) - u) / dx


def centered_second(u: np.ndarray, dx: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.size < 3:
        raise GridTooSmallError("centered difference needs at least 3 points")
    return (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / dx**2


def upwind_twice(u: np.ndarray, dx: float) -> np.ndarray:
    """D+ applied twice: the exact time derivative of the upwind system.

    Not TVD in the second-derivative sense for any step; only used as a
    counterexample.
    """
    u = np.asarray(u, dtype=float)
    return (np.roll(u, -2) - 2 * np.roll(u, -1) + u) / dx**2


def spectral_matrix(n: int) -> np.ndarray:
    """Fourier differentiation matrix on ``n`` (odd) points of ``[0, 2*pi)``."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"spectral_matrix needs an odd n >= 3, got {n}")
    h = 2 * math.pi / n
    k = np.arange(n)
    diff = k[:, None] - k[None, :]
    D = np.zeros((n, n))
    off = diff != 0
    D[off] = 0.5 * (-1.0) ** diff[off] / np.sin(diff[off] * h / 2)
    return D


@dataclass(frozen=True)
class FluxSpec:
    """Scalar flux and the frame of the PDE.

    ``advection-left`` is ``U_t = U_x`` (the upwind example); the other two
    are written ``U_t + f(U)_x = 0`` with ``f' >= 0``.
    """

    kind: str

    KINDS = ("advection-left", "advection-right", "burgers")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown flux kind {self.kind!r}; expected one of {self.KINDS}")

    def f(self, u):
        if self.kind == "burgers":
            return 0.5 * u * u
        return u

    def fprime(self, u):
        if self.kind == "burgers":
            return u
        return np.ones_like(u)

    def max_speed(self, u0) -> float:
        return float(np.max(np.abs(self.fprime(np.asarray(u0, dtype=float)))))

    def check_sign(self, u0) -> None:
        """Burgers runs need f'(u) = u >= 0 throughout (no flux splitting)."""
        if self.kind == "burgers" and np.min(u0) < 0:
            raise IncompatibleSchemeError(
                "burgers without flux splitting requires u0 >= 0 so that f'(u) >= 0"
            )


@dataclass
class SemiDiscretization:
    f_op: Callable[[np.ndarray], np.ndarray]
    fdot_op: Callable[[np.ndarray], np.ndarray]
    dt_fe: float
    K: float | None
    x: np.ndarray
    dx: float
    scheme: str = ""
    flux: FluxSpec | None = None
    # optional fused evaluation returning (F(u), Fdot(u)) with shared work
    pair_op: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None

    def evaluate(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.pair_op is not None:
            return self.pair_op(u)
        return self.f_op(u), self.fdot_op(u)


def make_semidiscretization(
    flux: FluxSpec | str,
    scheme: str,
    n: int,
    x0: float = 0.0,
    length: float = 1.0,
    u0: np.ndarray | None = None,
) -> SemiDiscretization:
    """Pair F and Fdot on ``n`` periodic points.

    ``u0`` (if given) fixes ``dt_fe = dx / max|f'(u0)|`` for WENO schemes and
    is checked against the flux sign requirement.
    """
    if isinstance(flux, str):
        flux = FluxSpec(flux)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    x, dx = periodic_grid(x0, length, n)
    if u0 is not None:
        flux.check_sign(u0)

    if scheme == "first-order":
        if flux.kind != "advection-left":
            raise IncompatibleSchemeError("first-order pair is defined for U_t = U_x only")
        return SemiDiscretization(
            f_op=lambda u: upwind_d_plus(u, dx),
            fdot_op=lambda u: centered_second(u, dx),
            dt_fe=dx,
            K=math.sqrt(2) / 2,
            x=x,
            dx=dx,
            scheme=scheme,
            flux=flux,
        )

    if scheme == "spectral":
        if flux.kind != "advection-right":
            raise IncompatibleSchemeError("spectral scheme is set up for U_t + U_x = 0 only")
        if not math.isclose(length, 2 * math.pi, rel_tol=1e-12):
            D = spectral_matrix(n) * (2 * math.pi / length)
        else:
            D = spectral_matrix(n)
        D2 = D @ D
        return SemiDiscretization(
            f_op=lambda u: -(D @ u),
            fdot_op=lambda u: D2 @ u,
            dt_fe=dx,
            K=None,
            x=x,
            dx=dx,
            scheme=scheme,
            flux=flux,
        )

    if flux.kind == "advection-left":
        raise IncompatibleSchemeError("WENO pipelines use the U_t + f(U)_x = 0 frame")
    order = int(scheme[4:])
    speed = 1.0 if u0 is None else flux.max_speed(u0)
    if speed == 0:
        # a state at rest imposes no limit; keep the unit-speed scale
        speed = 1.0

    def f_op(u):
        return -weno_diff(flux.f(u), dx, order, "plus")

    def fdot_from(u, ut):
        # u_tt = -(f'(u) u_t)_x with the opposite bias
        return -weno_diff(flux.fprime(u) * ut, dx, order, "minus")

    def fdot_op(u):
        return fdot_from(u, f_op(u))

    def pair_op(u):
        ut = f_op(u)
        return ut, fdot_from(u, ut)

    return SemiDiscretization(
        f_op=f_op,
        fdot_op=fdot_op,
        dt_fe=dx / speed,
        K=math.sqrt(2) / 2,
        x=x,
        dx=dx,
        scheme=scheme,
        flux=flux,
        pair_op=pair_op,
    )


def write_snapshot(path: str | Path, x: np.ndarray, u: np.ndarray, header: str = "") -> None:
    """Two-column ``x u`` text file, 17 significant digits."""
    np.savetxt(path, np.column_stack([x, u]), fmt="%.17g", header=header)


def read_snapshot(path: str | Path) -> GridFunction:
    data = np.loadtxt(path, ndmin=2)
    x, u = data[:, 0], data[:, 1]
    dx = float(x[1] - x[0]) if x.size > 1 else 1.0
    return GridFunction(values=u, x0=float(x[0]), dx=dx)
