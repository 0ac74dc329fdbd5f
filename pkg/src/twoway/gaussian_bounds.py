"""Inner and outer bounds for the symmetric two-way Gaussian IC and the Gaussian MAC/BC.

Rates are in bits (log base 2) per user per direction.  Every evaluator
accepts scalars; the sweep helpers run on numpy grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

GAP_TOL = 1e-9

VERY_STRONG = "very_strong"
STRONG = "strong"
WEAK = "weak"


@dataclass(frozen=True)
class GaussianSymParams:
    snr: float
    inr: float

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")
        if not self.inr >= 0:
            raise ValueError(f"inr must be nonnegative, got {self.inr}")

    @classmethod
    def from_db(cls, snr_db: float, inr_db: float) -> "GaussianSymParams":
        return cls(10 ** (snr_db / 10), 10 ** (inr_db / 10))


@dataclass(frozen=True)
class MacBcParams:
    p1: float
    p2: float
    p3: float
    n1: float
    n2: float
    n3: float

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("n1", "n2", "n3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n3 < self.n1:
            raise ValueError(
                f"need n3 >= n1 (got n1={self.n1}, n3={self.n3}); "
                "swap the roles of nodes 1 and 3 so the weaker receiver is node 3")


@dataclass(frozen=True)
class CorrCoeffs:
    lambda24_mag: float
    theta: float = 0.0
    undefined: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lambda24_mag", min(1.0, max(0.0, float(self.lambda24_mag))))


@dataclass(frozen=True)
class Regime:
    name: str
    inr_lt_1: bool


def regime(p: GaussianSymParams) -> Regime:
    s, i = p.snr, p.inr
    if i >= s * (1 + s):
        name = VERY_STRONG
    elif i >= s:
        name = STRONG
    else:
        name = WEAK
    return Regime(name, i < 1)


# -- outer bounds -----------------------------------------------------------

def outer_full_rsym(p: GaussianSymParams) -> float:
    """Symmetric-rate outer bound valid under full adaptation."""
    s, i = p.snr, p.inr
    return (0.5 * math.log2(1 + s + i + 2 * math.sqrt(s * i))
            + 0.5 * math.log2(1 + s / (1 + i)))


def outer_strong_corr(p: GaussianSymParams, lambda13: float, lambda34: float,
                      theta: float = 0.0) -> float:
    """Full-adaptation bound as a function of the input correlations.

    ``lambda13`` and ``lambda34`` are correlation magnitudes in [0, 1] and
    ``theta`` the phase of the cross term.  ``lambda13=1, lambda34=0,
    theta=0`` recovers :func:`outer_full_rsym`.
    """
    s, i = p.snr, p.inr
    c34 = 1 - lambda34 ** 2
    return (0.5 * math.log2(s + i + 2 * lambda13 * math.cos(theta) * math.sqrt(s * i) + 1)
            + 0.5 * math.log2(1 + s * c34 / (i * c34 + 1)))


def outer_partial_strong(p: GaussianSymParams) -> float:
    """Forward-direction bound with the forward transmitters restricted (zero correlation)."""
    s, i = p.snr, p.inr
    return 0.5 * math.log2(1 + s + i) + 0.5 * math.log2(1 + s / (1 + i))


def outer_partial_forward(p: GaussianSymParams) -> float:
    s, i = p.snr, p.inr
    return math.log2(1 + i + s - i * s / (1 + i))


def outer_partial_backward(p: GaussianSymParams) -> float:
    s, i = p.snr, p.inr
    if i > 0 and s <= i ** 3:
        return math.log2(1 + i + s / i)
    return math.log2(1 + (math.sqrt(s) + math.sqrt(i)) ** 2 / (1 + i))


def lambda_objective(p: GaussianSymParams, mag, theta=0.0):
    """Backward-direction bound as a function of the correlation ``lambda24``.

    Works elementwise on numpy arrays.
    """
    s, i = p.snr, p.inr
    mag = np.asarray(mag, dtype=float)
    c = np.cos(theta)
    inner = (1 + i + s + 2 * mag * c * math.sqrt(s * i)
             - (s * i + i ** 2 * mag ** 2 + 2 * math.sqrt(s) * i ** 1.5 * mag * c) / (1 + i))
    out = np.log2(inner)
    return float(out) if out.ndim == 0 else out


def optimize_lambda24(p: GaussianSymParams) -> CorrCoeffs:
    """Maximizer of :func:`lambda_objective`: stationary point clipped to the unit disc."""
    if p.inr == 0:
        return CorrCoeffs(0.0, 0.0, undefined=True)
    return CorrCoeffs(min(1.0, math.sqrt(p.snr * p.inr) / p.inr ** 2), 0.0)


# -- inner bounds -----------------------------------------------------------

@dataclass(frozen=True)
class InnerRates:
    sato: float
    r_inr_lt1: float
    pt2pt: float
    hk1: float | None = None
    hk2: float | None = None

    @property
    def hk(self) -> float:
        if self.hk1 is None:
            raise ValueError("the Han-Kobayashi rate is only defined for INR >= 1")
        return min(self.hk1, self.hk2)


def hk_rates(p: GaussianSymParams) -> tuple[float, float]:
    s, i = p.snr, p.inr
    if i < 1:
        raise ValueError(f"the Han-Kobayashi rate needs INR >= 1, got {i}")
    hk1 = 0.5 * math.log2(1 + i + s) + 0.5 * math.log2(2 + s / i) - 1
    hk2 = math.log2(1 + i + s / i) - 1
    return hk1, hk2


def inner_rates(p: GaussianSymParams) -> InnerRates:
    s, i = p.snr, p.inr
    hk1 = hk2 = None
    if i >= 1:
        hk1, hk2 = hk_rates(p)
    return InnerRates(
        sato=0.5 * math.log2(1 + s + i),
        r_inr_lt1=math.log2(1 + s / (1 + i)),
        pt2pt=math.log2(1 + s),
        hk1=hk1, hk2=hk2)


# -- gap routing ------------------------------------------------------------

@dataclass(frozen=True)
class GapEntry:
    regime: str
    label: str
    direction: str
    outer_name: str
    inner_name: str
    outer: float
    inner: float
    gap: float
    limit: float
    passed: bool
    adaptation: str


def _entry(reg, label, direction, oname, iname, outer, inner, limit, adaptation):
    gap = outer - inner
    return GapEntry(reg, label, direction, oname, iname, outer, inner, gap, limit,
                    gap <= limit + GAP_TOL, adaptation)


def gap_report(p: GaussianSymParams, refined_partial: bool = False) -> tuple[GapEntry, ...]:
    """Outer-minus-inner gaps with the bound pair chosen by interference regime.

    Returns one entry, or two when the second HK term is active (one per
    direction).  With ``refined_partial`` an extra forward-direction entry
    compares the restricted-transmitter bound against the same inner rate
    in the strong and first-HK-term cases.
    """
    reg = regime(p)
    inner = inner_rates(p)
    out: list[GapEntry] = []
    if reg.name == VERY_STRONG:
        cap = math.log2(1 + p.snr)
        out.append(_entry(reg.name, "very_strong", "both", "pt2pt_capacity", "pt2pt",
                          cap, inner.pt2pt, 0.0, "partial"))
    elif reg.name == STRONG:
        out.append(_entry(reg.name, "strong", "both", "outer_full", "sato",
                          outer_full_rsym(p), inner.sato, 1.0, "full"))
        if refined_partial:
            out.append(_entry(reg.name, "strong_refined", "fwd", "outer_partial_strong", "sato",
                              outer_partial_strong(p), inner.sato, 0.5, "partial"))
    elif reg.inr_lt_1:
        out.append(_entry(reg.name, "weak_inr_lt1", "both", "outer_full", "r_inr_lt1",
                          outer_full_rsym(p), inner.r_inr_lt1, 1.0, "full"))
    elif inner.hk1 <= inner.hk2:
        out.append(_entry(reg.name, "weak_hk1", "both", "outer_full", "hk1",
                          outer_full_rsym(p), inner.hk1, 1.5, "full"))
        if refined_partial:
            out.append(_entry(reg.name, "weak_hk1_refined", "fwd", "outer_partial_strong", "hk1",
                              outer_partial_strong(p), inner.hk1, 1.0, "partial"))
    else:
        out.append(_entry(reg.name, "weak_hk2_fwd", "fwd", "outer_partial_forward", "hk2",
                          outer_partial_forward(p), inner.hk2, 1.0, "partial"))
        low = p.snr <= p.inr ** 3
        out.append(_entry(reg.name, "weak_hk2_bwd_low" if low else "weak_hk2_bwd_high", "bwd",
                          "outer_partial_backward", "hk2", outer_partial_backward(p),
                          inner.hk2, 1.0 if low else 2.0, "partial"))
    return tuple(out)


@dataclass
class GapSweep:
    rows: list[tuple]
    summary: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if not r[-1].passed)

    def to_csv(self) -> str:
        lines = ["snr_db,inr_db,regime,outer,inner,gap,limit,pass"]
        for snr_db, inr_db, e in self.rows:
            lines.append(f"{snr_db:.6f},{inr_db:.6f},{e.label},{e.outer:.6f},{e.inner:.6f},"
                         f"{e.gap:.6f},{e.limit:g},{str(e.passed).lower()}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.summary, indent=1, sort_keys=True)


def gap_sweep(snr_db, inr_db, refined_partial: bool = False) -> GapSweep:
    """Evaluate :func:`gap_report` over the product of two dB grids."""
    snr_db = list(snr_db)
    inr_db = list(inr_db)
    if not snr_db or not inr_db:
        raise ValueError("empty grid")
    rows = []
    summary: dict = {}
    for sd in snr_db:
        for idb in inr_db:
            for e in gap_report(GaussianSymParams.from_db(sd, idb), refined_partial):
                rows.append((sd, idb, e))
                s = summary.setdefault(e.label, {"count": 0, "max_gap": -math.inf,
                                                 "limit": e.limit, "failures": 0})
                s["count"] += 1
                s["max_gap"] = max(s["max_gap"], e.gap)
                s["failures"] += 0 if e.passed else 1
    summary = {"regimes": summary, "points": len(snr_db) * len(inr_db), "rows": len(rows),
               "all_pass": all(r[-1].passed for r in rows)}
    return GapSweep(rows, summary)


# -- Gaussian MAC/BC --------------------------------------------------------

@dataclass
class MacBcReport:
    mac_inner: float
    mac_outer: float
    alphas: np.ndarray
    bc_inner_r21: np.ndarray
    bc_outer_r21: np.ndarray
    bc_r23: np.ndarray

    @property
    def mac_gap(self) -> float:
        return self.mac_outer - self.mac_inner

    @property
    def bc_gap(self) -> np.ndarray:
        return self.bc_outer_r21 - self.bc_inner_r21

    @property
    def passed(self) -> bool:
        return bool(self.mac_gap <= 0.5 + GAP_TOL and np.all(self.bc_gap <= 0.5 + GAP_TOL))

    def to_dict(self) -> dict:
        return {
            "mac_inner": self.mac_inner, "mac_outer": self.mac_outer, "mac_gap": self.mac_gap,
            "alphas": self.alphas.tolist(), "bc_inner_r21": self.bc_inner_r21.tolist(),
            "bc_outer_r21": self.bc_outer_r21.tolist(), "bc_r23": self.bc_r23.tolist(),
            "bc_gap": self.bc_gap.tolist(), "max_bc_gap": float(self.bc_gap.max()),
            "pass": self.passed,
        }


def mac_rates(p1, p3, n2):
    """Non-adaptive sum rate and adaptive outer bound of the MAC direction (vectorized)."""
    p1, p3, n2 = (np.asarray(v, dtype=float) for v in (p1, p3, n2))
    inner = 0.5 * np.log2(1 + (p1 + p3) / n2)
    outer = 0.5 * np.log2(1 + (p1 + p3 + 2 * np.sqrt(p1 * p3)) / n2)
    return inner, outer


def bc_rates(p2, n1, n3, alpha):
    """Inner and outer R21 plus the shared R23 for a power split ``alpha`` (vectorized)."""
    p2, n1, n3, alpha = (np.asarray(v, dtype=float) for v in (p2, n1, n3, alpha))
    if np.any(n3 < n1):
        raise ValueError("need n3 >= n1; swap the roles of nodes 1 and 3")
    inner21 = 0.5 * np.log2(1 + alpha * p2 / n1)
    outer21 = 0.5 * np.log2(1 + alpha * p2 / n1 * (n1 + n3) / n3)
    r23 = 0.5 * np.log2(1 + (1 - alpha) * p2 / (n3 + alpha * p2))
    return inner21, outer21, r23


def macbc_bounds(m: MacBcParams, alphas=None) -> MacBcReport:
    alphas = np.linspace(0.0, 1.0, 101) if alphas is None else np.asarray(alphas, dtype=float)
    if alphas.size == 0 or np.any((alphas < 0) | (alphas > 1)):
        raise ValueError("power split grid must be non-empty and inside [0, 1]")
    mi, mo = mac_rates(m.p1, m.p3, m.n2)
    i21, o21, r23 = bc_rates(m.p2, m.n1, m.n3, alphas)
    return MacBcReport(float(mi), float(mo), alphas, i21, o21, r23)


def to_jsonable(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    return obj
