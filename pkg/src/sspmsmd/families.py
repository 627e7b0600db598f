"""Optimal SSP two-derivative method families and a few reference methods.

Every constructor returns a :class:`FamilyMethod`: the Butcher tableau, the
``K`` it was built for, and its SSP coefficient ``C``. Closed-form families
compute everything from ``K`` at call time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sspcert import building_block_bound
from .tableau import TwoDerivativeTableau

__all__ = [
    "FamilyMethod",
    "FamilyInfeasibleError",
    "UnsupportedParameterError",
    "FAMILIES",
    "FAMILY_IDS",
    "canonical_family_id",
    "make_family",
    "make_ts2",
    "make_2s2p",
    "make_2s3p",
    "make_2s4p",
    "make_3s4p",
    "make_3s5p",
    "make_nonssp_2s3p",
    "make_ssprk33",
    "quartic_2s4p",
    "a21_3s5p",
    "q31_3s5p",
    "b2_2s3p_prose",
]

SQRT_HALF = math.sqrt(0.5)
K_SWITCH_2S2P = math.sqrt(2.0 / 3.0)


class FamilyInfeasibleError(ValueError):
    pass


class UnsupportedParameterError(ValueError):
    pass


@dataclass(frozen=True)
class FamilyMethod:
    tableau: TwoDerivativeTableau
    K: float | None
    C: float
    family_id: str
    order: int
    aux: dict = field(default_factory=dict)

    @property
    def is_ssp(self) -> bool:
        return self.C > 0


def _check_k(K):
    if not (isinstance(K, (int, float, np.floating)) and K > 0 and math.isfinite(K)):
        raise ValueError(f"K must be positive, got {K!r}")
    return float(K)


# ---------------------------------------------------------------------------
# second order


def make_ts2(K: float | None = None) -> FamilyMethod:
    """Second-order Taylor series method ``u + dt F + dt^2/2 Fdot``.

    ``C`` depends on ``K``; without one it is reported as NaN.
    """
    tab = TwoDerivativeTableau(A=[[0.0]], Ahat=[[0.0]], b=[1.0], bhat=[0.5], label="TS2")
    C = math.nan if K is None else building_block_bound(1.0, 0.5, _check_k(K))
    return FamilyMethod(tableau=tab, K=K, C=C, family_id="TS2", order=2)


def make_2s2p(K: float) -> FamilyMethod:
    K = _check_k(K)
    if K <= K_SWITCH_2S2P:
        r = 0.5 * (1 - K**2 + math.sqrt(1 + 6 * K**2 + K**4))
        tab = TwoDerivativeTableau(
            A=[[0, 0], [1 / r, 0]],
            Ahat=[[0, 0], [0, 0]],
            b=[0.5, 0.5],
            bhat=[(r - 1) / (2 * r), 0.0],
            label=f"SSP-2s2p(K={K:.6g})",
        )
        branch = "small-K"
    else:
        r = 2 * K * math.sqrt(K**2 + 2) - 2 * K**2
        tab = TwoDerivativeTableau(
            A=[[0, 0], [0.5, 0]],
            Ahat=[[0, 0], [0.125, 0]],
            b=[0.5, 0.5],
            bhat=[0.125, 0.125],
            label=f"SSP-2s2p(K={K:.6g})",
        )
        branch = "large-K"
    return FamilyMethod(tableau=tab, K=K, C=r, family_id="SSP-2s2p", order=2, aux={"branch": branch})


# ---------------------------------------------------------------------------
# third order


def _cubic_2s3p(K):
    AA = math.sqrt(K**2 + 2) - K
    p0 = 2 * K * (AA - 2 * K) + 4 * K**3 * AA
    p1 = -p0
    p2 = (1 - p0) / (2 * K**2)
    p3 = -(p0 / (2 * K) + K) / (6 * K**3)
    return p3, p2, p1, p0


def b2_2s3p_prose(K: float, r: float) -> float:
    """The alternative b2 expression printed next to the family's coefficient list.

    Kept for the diagnostic comparison only; the constructor does not use it.
    """
    root = K * math.sqrt(K**2 + 2)
    return (2 * K**2 * (1 - 1 / r) + r) / (root + K**2) - r**2 / (3 * K**2)


def make_2s3p(K: float) -> FamilyMethod:
    K = _check_k(K)
    coeffs = _cubic_2s3p(K)
    roots = np.roots(coeffs)
    real = [z.real for z in roots if abs(z.imag) < 1e-13 * max(1.0, abs(z))]
    candidates = [x for x in real if 0 < x <= 2.0]
    if len(candidates) != 1:
        raise FamilyInfeasibleError(
            f"2s3p: expected one real root of the SSP cubic in (0, 2] for K={K}, got {real}"
        )
    r = candidates[0]
    a = (K * math.sqrt(K**2 + 2) - K**2) / r
    b2 = (K**2 * (1 - 1 / r) + r * (0.5 - 1 / (6 * a))) / (K**2 + 0.5 * r * a)
    b1 = 1 - b2
    tab = TwoDerivativeTableau(
        A=[[0, 0], [a, 0]],
        Ahat=[[0, 0], [0.5 * a * a, 0]],
        b=[b1, b2],
        bhat=[0.5 * (1 - b2 * a) - 1 / (6 * a), 1 / (6 * a) - 0.5 * b2 * a],
        label=f"SSP-2s3p(K={K:.6g})",
    )
    return FamilyMethod(
        tableau=tab, K=K, C=r, family_id="SSP-2s3p", order=3,
        aux={"a": a, "cubic": coeffs, "roots": roots},
    )


def make_nonssp_2s3p() -> FamilyMethod:
    tab = TwoDerivativeTableau(
        A=[[0, 0], [-1, 0]],
        Ahat=[[0, 0], [0.5, 0]],
        b=[-1 / 3, 4 / 3],
        bhat=[4 / 3, 0.5],
        label="NONSSP-2s3p",
    )
    return FamilyMethod(tableau=tab, K=None, C=0.0, family_id="NONSSP-2s3p", order=3)


def make_ssprk33() -> FamilyMethod:
    tab = TwoDerivativeTableau(
        A=[[0, 0, 0], [1, 0, 0], [0.25, 0.25, 0]],
        Ahat=np.zeros((3, 3)),
        b=[1 / 6, 1 / 6, 2 / 3],
        bhat=np.zeros(3),
        label="SSPRK33",
    )
    return FamilyMethod(tableau=tab, K=None, C=1.0, family_id="SSPRK33", order=3)


# ---------------------------------------------------------------------------
# fourth order


def quartic_2s4p(K: float) -> np.ndarray:
    """Coefficients (highest power first) of the binding Rv entry of 2s4p."""
    return np.array([1.0, 4 * K**2, -12 * K**2, -24 * K**4, 24 * K**4])


def make_2s4p(K: float | None = None) -> FamilyMethod:
    tab = TwoDerivativeTableau(
        A=[[0, 0], [0.5, 0]],
        Ahat=[[0, 0], [0.125, 0]],
        b=[1.0, 0.0],
        bhat=[1 / 6, 1 / 3],
        label="SSP-2s4p",
    )
    if K is None:
        return FamilyMethod(tableau=tab, K=None, C=math.nan, family_id="SSP-2s4p", order=4)
    K = _check_k(K)
    roots = np.roots(quartic_2s4p(K))
    positive = sorted(z.real for z in roots if abs(z.imag) < 1e-10 and z.real > 0)
    if not positive:
        raise FamilyInfeasibleError(f"2s4p: no positive root for K={K}")
    return FamilyMethod(tableau=tab, K=K, C=positive[0], family_id="SSP-2s4p", order=4)


# Three-stage fourth-order methods are only available as optimized data.
_3S4P_DATA = {
    0.5: dict(
        C=1.1464,
        A=[[0, 0, 0], [0.436148675945340, 0, 0], [0.546571371212865, 0.156647174804152, 0]],
        b=[0.528992280543542, 0.105732787708912, 0.365274931747546],
        Ahat=[[0, 0, 0], [0.095112833764436, 0, 0], [0.071032477596813, 0.107904226252921, 0]],
        bhat=[0.074866026156687, 0.073410341982927, 0.048740310097159],
    ),
    SQRT_HALF: dict(
        C=1.3927,
        A=[[0, 0, 0], [0.443752012194422, 0, 0], [0.543193299768317, 0.149202742858795, 0]],
        b=[0.515040964378407, 0.178821699719783, 0.306137335901811],
        Ahat=[[0, 0, 0], [0.098457924163299, 0, 0], [0.062758211639901, 0.110738910914425, 0]],
        bhat=[0.072864982225864, 0.073840478463180, 0.061973770357455],
    ),
    1.0: dict(
        C=1.6185,
        A=[[0, 0, 0], [0.452297224196082, 0, 0], [0.528050722182308, 0.159236998008155, 0]],
        b=[0.502519798444212, 0.210741084344740, 0.286739117211047],
        Ahat=[[0, 0, 0], [0.102286389507741, 0, 0], [0.055482128781494, 0.108677624192402, 0]],
        bhat=[0.071256397204544, 0.069475972085130, 0.066877749079721],
    ),
}
# CLI users type K with a handful of digits
_3S4P_MATCH_TOL = 1e-4


def make_3s4p(K: float) -> FamilyMethod:
    K = _check_k(K)
    for key, data in _3S4P_DATA.items():
        if abs(K - key) <= _3S4P_MATCH_TOL:
            tab = TwoDerivativeTableau(
                A=data["A"], Ahat=data["Ahat"], b=data["b"], bhat=data["bhat"],
                label=f"SSP-3s4p(K={key:.6g})",
            )
            return FamilyMethod(
                tableau=tab, K=key, C=data["C"], family_id="SSP-3s4p", order=4,
                aux={"tabulated": True},
            )
    raise UnsupportedParameterError(
        f"3s4p is tabulated only for K in {{0.5, 1/sqrt(2), 1.0}}; got K={K}"
    )


# ---------------------------------------------------------------------------
# fifth order


def a21_3s5p(K: float, r: float) -> float:
    """First-stage weight making the last Rv entry vanish at SSP ratio r."""
    return 240 * K**6 * (
        1 - r - r**2 / (2 * K**2) + r**3 / (6 * K**2) + r**4 / (24 * K**4) - r**5 / (120 * K**4)
    ) / r**6


def q31_3s5p(K: float, r: float) -> float:
    a = a21_3s5p(K, r)
    return (
        10 * r**2 * a**4
        - (100 * K**2 + 10 * r**2) * a**3
        + (130 * K**2 + 3 * r**2) * a**2
        - 50 * K**2 * a
        + 6 * K**2
    )


def _bisect(f, lo, hi, flo, xtol=1e-15, maxit=200):
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _roots_3s5p(K, grid_points=4000, r_lo=0.01, r_hi=2.0):
    grid = np.linspace(r_lo, r_hi, grid_points)
    vals = np.array([q31_3s5p(K, r) for r in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(_bisect(lambda r: q31_3s5p(K, r), grid[i], grid[i + 1], vals[i]))
    roots.extend(float(g) for g, v in zip(grid, vals) if v == 0)
    return sorted(roots)


def coefficients_3s5p(a21: float) -> dict[str, float]:
    """The one-parameter fifth-order family as a function of a21."""
    t = 0.6 - a21
    d = 1 - 2 * a21
    a31 = t / d
    ah32 = (t**2 / (a21 * d**3) - t / d**2) / 10
    ah31 = 0.5 * t**2 / d**2 - ah32
    bh2 = (2 * a31 - 1) / (12 * a21 * (a31 - a21))
    bh3 = d / (12 * a31 * (a31 - a21))
    bh1 = 0.5 - bh2 - bh3
    return dict(
        a21=a21, a31=a31, ah21=0.5 * a21**2, ah31=ah31, ah32=ah32, bh1=bh1, bh2=bh2, bh3=bh3,
        ah21_order=(1 / 24 - bh3 * (ah31 + ah32)) / bh2,
    )


def make_3s5p(K: float) -> FamilyMethod:
    K = _check_k(K)
    roots = _roots_3s5p(K)
    if not roots:
        raise FamilyInfeasibleError(f"3s5p: no root of Q31 in (0, 2] for K={K}")
    C = roots[-1]
    co = coefficients_3s5p(a21_3s5p(K, C))
    tab = TwoDerivativeTableau(
        A=[[0, 0, 0], [co["a21"], 0, 0], [co["a31"], 0, 0]],
        Ahat=[[0, 0, 0], [co["ah21"], 0, 0], [co["ah31"], co["ah32"], 0]],
        b=[1.0, 0.0, 0.0],
        bhat=[co["bh1"], co["bh2"], co["bh3"]],
        label=f"SSP-3s5p(K={K:.6g})",
    )
    return FamilyMethod(
        tableau=tab, K=K, C=C, family_id="SSP-3s5p", order=5,
        aux={**co, "q31_roots": roots},
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class FamilyInfo:
    family_id: str
    order: int
    stages: int
    k_range: str
    needs_k: bool
    build: object


FAMILIES: dict[str, FamilyInfo] = {
    "TS2": FamilyInfo("TS2", 2, 1, "any K > 0 (C depends on K)", False, make_ts2),
    "SSP-2s2p": FamilyInfo("SSP-2s2p", 2, 2, "any K > 0", True, make_2s2p),
    "SSP-2s3p": FamilyInfo("SSP-2s3p", 3, 2, "0.1 <= K <= 5", True, make_2s3p),
    "SSP-2s4p": FamilyInfo("SSP-2s4p", 4, 2, "any K > 0 (C depends on K)", False, make_2s4p),
    "SSP-3s4p": FamilyInfo("SSP-3s4p", 4, 3, "K in {0.5, 0.70710678, 1.0}", True, make_3s4p),
    "SSP-3s5p": FamilyInfo("SSP-3s5p", 5, 3, "0.1 <= K <= 2", True, make_3s5p),
    "NONSSP-2s3p": FamilyInfo("NONSSP-2s3p", 3, 2, "no K (not SSP)", False, lambda K=None: make_nonssp_2s3p()),
    "SSPRK33": FamilyInfo("SSPRK33", 3, 3, "no K (C = 1)", False, lambda K=None: make_ssprk33()),
}
FAMILY_IDS = tuple(FAMILIES)

_ALIASES = {
    "ts2": "TS2",
    "2s2p": "SSP-2s2p",
    "2s3p": "SSP-2s3p",
    "2s4p": "SSP-2s4p",
    "3s4p": "SSP-3s4p",
    "3s5p": "SSP-3s5p",
    "nonssp": "NONSSP-2s3p",
    "nonssp-2s3p": "NONSSP-2s3p",
    "ssprk33": "SSPRK33",
}


def canonical_family_id(name: str) -> str:
    if name in FAMILIES:
        return name
    key = name.lower()
    for fid in FAMILIES:
        if fid.lower() == key:
            return fid
    if key in _ALIASES:
        return _ALIASES[key]
    raise KeyError(f"unknown family {name!r}; known: {', '.join(FAMILY_IDS)}")


def make_family(name: str, K: float | None = None) -> FamilyMethod:
    """Build any registered family by id or short alias (``"2s3p"``)."""
    info = FAMILIES[canonical_family_id(name)]
    if info.needs_k and K is None:
        raise ValueError(f"{info.family_id} needs a value of K")
    if K is not None:
        _check_k(K)
    if info.family_id in ("TS2", "SSP-2s4p"):
        return info.build(K)
    if info.family_id in ("NONSSP-2s3p", "SSPRK33"):
        m = info.build()
        return FamilyMethod(m.tableau, K, m.C, m.family_id, m.order, m.aux)
    return info.build(K)
