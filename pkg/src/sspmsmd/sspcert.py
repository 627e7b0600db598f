"""SSP certification of two-derivative methods through a Shu-Osher decomposition.

With ``S = [[A, 0], [b^T, 0]]`` and ``Shat`` built the same way from
``Ahat, bhat``, a method is SSP with coefficient ``r`` when

    Rv = M^{-1} e,  P = r M^{-1} S,  Q = (r/K)**2 M^{-1} Shat,
    M  = I + r S + (r/K)**2 Shat

are all componentwise nonnegative.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .tableau import TwoDerivativeTableau, format_number

__all__ = [
    "ShuOsherForm",
    "CertificateResult",
    "MonotonicityWarning",
    "NONNEG_TOL",
    "forward_substitution",
    "build_shu_osher",
    "check_certificate",
    "find_ssp_coefficient",
    "building_block_bound",
    "extended_matrices",
]

NONNEG_TOL = 1e-12


class MonotonicityWarning(RuntimeWarning):
    """Feasibility of the certificate changed more than once along the r scan."""


def forward_substitution(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``L X = B`` for unit lower triangular ``L`` (diagonal assumed 1)."""
    L = np.asarray(L, dtype=float)
    B = np.asarray(B, dtype=float)
    X = np.array(B, dtype=float, copy=True)
    for i in range(L.shape[0]):
        if i:
            X[i] -= L[i, :i] @ X[:i]
    return X


def extended_matrices(tab: TwoDerivativeTableau) -> tuple[np.ndarray, np.ndarray]:
    s = tab.s
    S = np.zeros((s + 1, s + 1))
    Shat = np.zeros((s + 1, s + 1))
    S[:s, :s] = tab.A
    S[s, :s] = tab.b
    Shat[:s, :s] = tab.Ahat
    Shat[s, :s] = tab.bhat
    return S, Shat


@dataclass(frozen=True)
class ShuOsherForm:
    r: float
    K: float
    Rv: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    @property
    def rhat(self) -> float:
        return self.r**2 / self.K**2

    def consistency_residual(self) -> float:
        """max |Rv + P e + Q e - e|, zero up to round-off for any (r, K)."""
        return float(np.max(np.abs(self.Rv + self.P.sum(axis=1) + self.Q.sum(axis=1) - 1.0)))

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "K": self.K,
            "Rv": self.Rv.tolist(),
            "P": self.P.tolist(),
            "Q": self.Q.tolist(),
        }

    def to_text(self) -> str:
        def vec(v):
            return " ".join(format_number(x) for x in np.ravel(v))

        return (
            f"r = {format_number(self.r)}\n"
            f"K = {format_number(self.K)}\n"
            f"Rv = {vec(self.Rv)}\n"
            f"P = {vec(self.P)}\n"
            f"Q = {vec(self.Q)}\n"
        )


@dataclass(frozen=True)
class CertificateResult:
    feasible: bool
    min_entry: float
    witness: tuple[str, int, int]
    tol: float = NONNEG_TOL

    def witness_label(self) -> str:
        name, i, j = self.witness
        if name == "Rv":
            return f"Rv({i})"
        return f"{name}({i},{j})"

    def to_dict(self) -> dict:
        name, i, j = self.witness
        return {
            "feasible": self.feasible,
            "min_entry": self.min_entry,
            "witness": {"matrix": name, "row": i, "col": j},
            "tol": self.tol,
        }


def build_shu_osher(tab: TwoDerivativeTableau, r: float, K: float) -> ShuOsherForm:
    if not (r > 0 and K > 0):
        raise ValueError(f"r and K must be positive, got r={r!r}, K={K!r}")
    S, Shat = extended_matrices(tab)
    rhat = r * r / (K * K)
    M = np.eye(tab.s + 1) + r * S + rhat * Shat
    n = tab.s + 1
    rhs = np.column_stack([np.ones(n), S, Shat])
    X = forward_substitution(M, rhs)
    Rv = X[:, 0]
    P = r * X[:, 1 : n + 1]
    Q = rhat * X[:, n + 1 :]
    return ShuOsherForm(r=float(r), K=float(K), Rv=Rv, P=P, Q=Q)


def check_certificate(form: ShuOsherForm, tol: float = NONNEG_TOL) -> CertificateResult:
    """Scan Rv, P, Q for the most negative entry.

    Rows and columns in the witness are 1-based, matching the printed
    matrices. The first occurrence wins on ties.
    """
    best = (math.inf, ("Rv", 1, 1))
    for i, v in enumerate(form.Rv):
        if v < best[0]:
            best = (float(v), ("Rv", i + 1, 1))
    for name, mat in (("P", form.P), ("Q", form.Q)):
        i, j = np.unravel_index(np.argmin(mat), mat.shape)
        if mat[i, j] < best[0]:
            best = (float(mat[i, j]), (name, int(i) + 1, int(j) + 1))
    min_entry, witness = best
    return CertificateResult(feasible=min_entry >= -tol, min_entry=min_entry, witness=witness, tol=tol)


def _indicator(tab, r, K):
    return check_certificate(build_shu_osher(tab, r, K)).min_entry


def find_ssp_coefficient(
    tab: TwoDerivativeTableau,
    K: float,
    r_max: float = 10.0,
    tol: float = 1e-10,
    *,
    nonneg_tol: float = NONNEG_TOL,
    max_halvings: int = 200,
) -> float:
    """Largest r in (0, r_max] for which the certificate holds; 0 if none.

    A geometric scan ``r_max * 2**-k`` finds the first feasible point, then
    bisection closes the bracket. A coarse linear scan below the bracket checks
    that feasibility changes sign only once; a second change triggers a
    :class:`MonotonicityWarning`.
    """
    if K <= 0:
        raise ValueError("K must be positive")

    def feasible(r):
        return _indicator(tab, r, K) >= -nonneg_tol

    if feasible(r_max):
        return float(r_max)
    hi = r_max
    lo = None
    r = r_max
    for _ in range(max_halvings):
        r *= 0.5
        if r < tol:
            break
        if feasible(r):
            lo = r
            break
        hi = r
    if lo is None:
        return 0.0
    for _ in range(60):
        if hi - lo <= tol * 1e-3:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    probes = np.linspace(0, lo, 34)[1:]
    if not all(feasible(p) for p in probes):
        warnings.warn(
            "certificate feasibility is not monotone in r; the returned value is "
            "the upper end of the first feasible bracket",
            MonotonicityWarning,
            stacklevel=2,
        )
    return float(lo)


def building_block_bound(alpha: float, beta: float, K: float) -> float:
    """SSP ratio of ``u + alpha dt F(u) + beta dt^2 Fdot(u)``."""
    if alpha < 0 or beta < 0 or K <= 0:
        raise ValueError("need alpha >= 0, beta >= 0 and K > 0")
    if alpha == 0 and beta == 0:
        raise ValueError("degenerate building block: alpha = beta = 0")
    if beta == 0:
        return 1.0 / alpha
    if alpha == 0:
        return K / math.sqrt(beta)
    return K / (2 * beta) * (math.sqrt(alpha**2 * K**2 + 4 * beta) - alpha * K)


def certificate_report(form: ShuOsherForm, cert: CertificateResult) -> str:
    """JSON text with both the decomposition and the verdict."""
    return json.dumps({"shu_osher": form.to_dict(), "certificate": cert.to_dict()}, indent=2)
