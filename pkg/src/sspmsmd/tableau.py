"""Two-derivative Butcher tableaux and their order conditions (p <= 5).

A method advances ``u' = F(u)`` using both ``F`` and its time derivative
``Fdot``::

    y_i     = u + dt * sum_j a_ij F(y_j) + dt**2 * sum_j ahat_ij Fdot(y_j)
    u_{n+1} = u + dt * sum_j b_j  F(y_j) + dt**2 * sum_j bhat_j  Fdot(y_j)

Products of vectors inside the order conditions are elementwise, so
``b^T c A c`` means ``sum_i b_i c_i (A c)_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

__all__ = [
    "TwoDerivativeTableau",
    "OrderResidualReport",
    "InvalidOrderError",
    "order_residuals",
    "design_order",
    "tableau_to_text",
    "tableau_from_text",
    "format_number",
    "parse_key_values",
]


class InvalidOrderError(ValueError):
    pass


def format_number(x: float) -> str:
    """Full-precision decimal used by every machine-readable output."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TwoDerivativeTableau:
    A: np.ndarray
    Ahat: np.ndarray
    b: np.ndarray
    bhat: np.ndarray
    label: str = ""
    c: np.ndarray = field(init=False, repr=False, compare=False)
    chat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        Ahat = np.array(self.Ahat, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float, ndmin=1)
        bhat = np.array(self.bhat, dtype=float, ndmin=1)
        s = b.size
        if A.shape != (s, s) or Ahat.shape != (s, s) or bhat.shape != (s,):
            raise ValueError(
                f"inconsistent tableau shapes: A {A.shape}, Ahat {Ahat.shape}, "
                f"b {b.shape}, bhat {bhat.shape}"
            )
        if np.any(np.triu(A) != 0) or np.any(np.triu(Ahat) != 0):
            raise ValueError("A and Ahat must be strictly lower triangular (explicit method)")
        for name, arr in (("A", A), ("Ahat", Ahat), ("b", b), ("bhat", bhat)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        c = A.sum(axis=1)
        chat = Ahat.sum(axis=1)
        c.setflags(write=False)
        chat.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "chat", chat)

    @property
    def s(self) -> int:
        return self.b.size

    @property
    def uses_second_derivative(self) -> bool:
        return bool(np.any(self.Ahat != 0) or np.any(self.bhat != 0))

    def __eq__(self, other):
        if not isinstance(other, TwoDerivativeTableau):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.Ahat, other.Ahat)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.bhat, other.bhat)
        )

    __hash__ = None


@dataclass(frozen=True)
class OrderResidualReport:
    order: int
    residuals: list[tuple[str, float]]
    max_abs_residual: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.residuals)


# Right-hand sides of each block, top to bottom.
_RHS = {
    1: [Fraction(1)],
    2: [Fraction(1, 2)],
    3: [Fraction(1, 3), Fraction(1, 6)],
    4: [Fraction(1, 4), Fraction(1, 8), Fraction(1, 12), Fraction(1, 24)],
    5: [
        Fraction(1, 5),
        Fraction(1, 10),
        Fraction(1, 15),
        Fraction(1, 30),
        Fraction(1, 20),
        Fraction(1, 20),
        Fraction(1, 40),
        Fraction(1, 60),
        Fraction(1, 120),
    ],
}


def _left_sides(tab: TwoDerivativeTableau, p: int) -> list[float]:
    A, Ah, b, bh = tab.A, tab.Ahat, tab.b, tab.bhat
    c, ch = tab.c, tab.chat
    e = np.ones(tab.s)
    Ac = A @ c
    if p == 1:
        return [b @ e]
    if p == 2:
        return [b @ c + bh @ e]
    if p == 3:
        return [
            b @ c**2 + 2 * bh @ c,
            b @ Ac + b @ ch + bh @ c,
        ]
    if p == 4:
        return [
            b @ c**3 + 3 * bh @ c**2,
            b @ (c * Ac) + b @ (c * ch) + bh @ c**2 + bh @ Ac + bh @ ch,
            b @ (A @ c**2) + 2 * b @ (Ah @ c) + bh @ c**2,
            b @ (A @ Ac) + b @ (A @ ch) + b @ (Ah @ c) + bh @ Ac + bh @ ch,
        ]
    # p == 5
    cAc = c * Ac
    cch = c * ch
    return [
        b @ c**4 + 4 * bh @ c**3,
        b @ (c**2 * Ac) + b @ (c**2 * ch) + bh @ c**3 + 2 * bh @ cAc + 2 * bh @ cch,
        b @ (c * (A @ c**2)) + 2 * b @ (c * (Ah @ c)) + bh @ c**3
        + bh @ (A @ c**2) + 2 * bh @ (Ah @ c),
        b @ (c * (A @ Ac)) + b @ (c * (A @ ch)) + b @ (c * (Ah @ c)) + bh @ cAc
        + bh @ cch + bh @ (A @ Ac) + bh @ (A @ ch) + bh @ (Ah @ c),
        b @ (Ac * Ac) + 2 * b @ (ch * Ac) + b @ ch**2 + 2 * bh @ cAc + 2 * bh @ cch,
        b @ (A @ c**3) + 3 * b @ (Ah @ c**2) + bh @ c**3,
        b @ (A @ cAc) + b @ (A @ cch) + b @ (Ah @ c**2) + b @ (Ah @ Ac) + b @ (Ah @ ch)
        + bh @ cAc + bh @ cch,
        b @ (A @ (A @ c**2)) + 2 * b @ (A @ (Ah @ c)) + b @ (Ah @ c**2)
        + bh @ (A @ c**2) + 2 * bh @ (Ah @ c),
        b @ (A @ (A @ Ac)) + b @ (A @ (A @ ch)) + b @ (A @ (Ah @ c)) + b @ (Ah @ Ac)
        + b @ (Ah @ ch) + bh @ (A @ Ac) + bh @ (A @ ch) + bh @ (Ah @ c),
    ]


def order_residuals(tab: TwoDerivativeTableau, p: int) -> OrderResidualReport:
    """Residuals (left side minus right side) of every order condition up to ``p``.

    Condition ids are ``"p<order>.<row>"`` with rows numbered from 1 within
    each order block.
    """
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= 5:
        raise InvalidOrderError(f"order must be an integer in 1..5, got {p!r}")
    residuals = []
    for q in range(1, int(p) + 1):
        for row, (lhs, rhs) in enumerate(zip(_left_sides(tab, q), _RHS[q]), start=1):
            residuals.append((f"p{q}.{row}", float(lhs - float(rhs))))
    worst = max(abs(r) for _, r in residuals)
    return OrderResidualReport(order=int(p), residuals=residuals, max_abs_residual=worst)


def design_order(tab: TwoDerivativeTableau, tol: float = 1e-10) -> int:
    """Largest p <= 5 whose conditions (and all lower ones) hold to ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    report = order_residuals(tab, 5)
    order = 0
    for q in range(1, 6):
        block = [r for cid, r in report.residuals if cid.startswith(f"p{q}.")]
        if max(abs(r) for r in block) > tol:
            break
        order = q
    return order


# ---------------------------------------------------------------------------
# plain-text key/value format


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _fmt_vec(v) -> str:
    return " ".join(format_number(x) for x in np.ravel(v))


def tableau_to_text(tab: TwoDerivativeTableau) -> str:
    lines = [
        f"label = {tab.label}",
        f"s = {tab.s}",
        f"A = {_fmt_vec(tab.A)}",
        f"Ahat = {_fmt_vec(tab.Ahat)}",
        f"b = {_fmt_vec(tab.b)}",
        f"bhat = {_fmt_vec(tab.bhat)}",
    ]
    return "\n".join(lines) + "\n"


def tableau_from_text(text: str | Path) -> TwoDerivativeTableau:
    """Inverse of :func:`tableau_to_text`. Accepts a string or a path."""
    if isinstance(text, Path):
        text = text.read_text()
    kv = parse_key_values(text)
    missing = [k for k in ("s", "A", "Ahat", "b", "bhat") if k not in kv]
    if missing:
        raise ValueError(f"tableau text is missing keys: {', '.join(missing)}")
    s = int(kv["s"])

    def vec(key, n):
        vals = np.array([float(t) for t in kv[key].split()])
        if vals.size != n:
            raise ValueError(f"{key}: expected {n} numbers, got {vals.size}")
        return vals

    return TwoDerivativeTableau(
        A=vec("A", s * s).reshape(s, s),
        Ahat=vec("Ahat", s * s).reshape(s, s),
        b=vec("b", s),
        bhat=vec("bhat", s),
        label=kv.get("label", ""),
    )
