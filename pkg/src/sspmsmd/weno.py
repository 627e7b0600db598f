"""Finite-difference WENO derivatives of order 5, 7 and 9 on periodic grids.

Coefficient tables are generated rather than typed in: for stencil size ``k``
each candidate is the polynomial whose cell averages over ``k`` cells match
the point values of the flux, the linear weights reproduce the ``2k - 1``
cell reconstruction, and the smoothness indicators are the usual
``sum_l dx^(2l-1) int (p^(l))^2`` quadratic forms (Jiang-Shu for k = 3,
Balsara-Shu for k = 4, 5).
"""

from __future__ import annotations

from contextlib import contextmanager
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["WenoTables", "weno_tables", "weno_diff", "weno_interface", "weno_weights", "GridTooSmallError", "epsilon"]

EPS = 1e-6
POWER = 2


class GridTooSmallError(ValueError):
    pass


@contextmanager
def epsilon(value: float):
    """Temporarily change the smoothness-indicator regularization ``EPS``."""
    global EPS
    if not value > 0:
        raise ValueError("WENO epsilon must be positive")
    old = EPS
    EPS = float(value)
    try:
        yield
    finally:
        EPS = old


class WenoTables:
    """Linear maps from a (2k-1)-point window to candidates and smoothness terms.

    Window index 0 is the leftmost point ``i-k+1``; the reconstruction is at
    ``x_{i+1/2}``. Stencil ``r`` covers points ``i-r .. i-r+k-1``.
    """

    def __init__(self, k: int):
        self.k = k
        width = 2 * k - 1
        self.width = width
        self.candidates = np.zeros((k, width))
        # smoothness of stencil r is sum over rows of (factors[r] @ w)**2
        self.factors = np.zeros((k, k - 1, width))
        for r in range(k):
            offsets = np.arange(-r, -r + k)
            inv = np.linalg.inv(_average_matrix(offsets, k))
            cols = offsets + (k - 1)
            self.candidates[r, cols] = _point_row(0.5, k) @ inv
            B = inv.T @ _smoothness_gram(k) @ inv
            B = 0.5 * (B + B.T)
            vals, vecs = np.linalg.eigh(B)
            keep = np.argsort(vals)[1:]  # constants are in the null space
            self.factors[r][:, cols] = (vecs[:, keep] * np.sqrt(np.clip(vals[keep], 0, None))).T
        big_offsets = np.arange(-(k - 1), k)
        big = _point_row(0.5, width) @ np.linalg.inv(_average_matrix(big_offsets, width))
        d, *_ = np.linalg.lstsq(self.candidates.T, big, rcond=None)
        self.linear_weights = d
        # one matmul yields every candidate and every smoothness factor
        self.stack = np.vstack([self.candidates, self.factors.reshape(k * (k - 1), width)])
        self.stack_mirror = self.stack[:, ::-1].copy()

    def smoothness_matrix(self, r: int) -> np.ndarray:
        F = self.factors[r]
        return F.T @ F


def _average_matrix(offsets, degree_count):
    # cell averages of xi**q over [m - 1/2, m + 1/2]
    q = np.arange(degree_count)
    hi = (offsets[:, None] + 0.5) ** (q + 1)
    lo = (offsets[:, None] - 0.5) ** (q + 1)
    return (hi - lo) / (q + 1)


def _point_row(xi, n):
    return xi ** np.arange(n)


def _smoothness_gram(k):
    # H[q, q'] = sum_{l=1}^{k-1} int_{-1/2}^{1/2} D^l xi^q * D^l xi^q'
    H = np.zeros((k, k))
    for l in range(1, k):
        for q in range(l, k):
            for qq in range(l, k):
                cq = np.prod(np.arange(q - l + 1, q + 1))
                cqq = np.prod(np.arange(qq - l + 1, qq + 1))
                p = (q - l) + (qq - l)
                integral = (0.5 ** (p + 1) - (-0.5) ** (p + 1)) / (p + 1)
                H[q, qq] += cq * cqq * integral
    return H


@lru_cache(maxsize=None)
def weno_tables(order: int) -> WenoTables:
    if order not in (5, 7, 9):
        raise ValueError(f"WENO order must be 5, 7 or 9, got {order}")
    return WenoTables((order + 1) // 2)


def _windows(f: np.ndarray, k: int) -> np.ndarray:
    pad = np.concatenate([f[-(k - 1):], f, f[: k - 1]])
    return sliding_window_view(pad, 2 * k - 1)


def _combine(tables: WenoTables, proj: np.ndarray, return_weights=False):
    k = tables.k
    q = proj[:, :k]
    g = proj[:, k:].reshape(-1, k, k - 1)
    beta = np.einsum("nrj,nrj->nr", g, g)
    alpha = tables.linear_weights / (EPS + beta) ** POWER
    omega = alpha / alpha.sum(axis=1, keepdims=True)
    h = np.einsum("nr,nr->n", omega, q)
    if return_weights:
        return h, omega
    return h


def weno_interface(f: np.ndarray, order: int, bias: str = "plus") -> np.ndarray:
    """Numerical flux at ``x_{i+1/2}`` for every i (periodic).

    ``bias="plus"`` reconstructs from the left (flux with f' >= 0);
    ``bias="minus"`` is its mirror image, reconstructing from the right.
    """
    f = np.asarray(f, dtype=float)
    tables = weno_tables(order)
    k = tables.k
    if f.size < 2 * k + 1:
        raise GridTooSmallError(f"WENO{order} needs at least {2 * k + 1} points, got {f.size}")
    W = _windows(f, k)
    if bias == "plus":
        return _combine(tables, W @ tables.stack.T)
    if bias == "minus":
        # window centred on i+1, read right to left
        return np.roll(_combine(tables, W @ tables.stack_mirror.T), -1)
    raise ValueError(f"bias must be 'plus' or 'minus', got {bias!r}")


def weno_weights(f: np.ndarray, order: int, bias: str = "plus") -> np.ndarray:
    """Nonlinear weights, shape (N, k), aligned with ``linear_weights``."""
    f = np.asarray(f, dtype=float)
    tables = weno_tables(order)
    W = _windows(f, tables.k)
    stack = tables.stack if bias == "plus" else tables.stack_mirror
    _, omega = _combine(tables, W @ stack.T, return_weights=True)
    return omega if bias == "plus" else np.roll(omega, -1, axis=0)


def weno_diff(f: np.ndarray, dx: float, order: int = 5, bias: str = "plus") -> np.ndarray:
    """Conservative WENO approximation of ``df/dx`` at the grid points."""
    h = weno_interface(f, order, bias)
    return (h - np.roll(h, 1)) / dx
