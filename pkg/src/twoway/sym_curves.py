"""Normalized symmetric capacity curves of the LD interference channel.

All curves are functions of ``alpha = q/p`` (cross over direct gain) and
return the per-user rate divided by ``p``.  ``alpha`` is always an exact
rational; floats are converted with ``Fraction(str(x))`` so that ``0.5``
means exactly one half.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .rate_region import region_ld_ic_sym, frac_str

TWO_THIRDS = Fraction(2, 3)


@dataclass(frozen=True)
class Open:
    """Unknown capacity value, carrying the best proved outer bound."""

    outer_bound: Fraction

    def __str__(self) -> str:
        return "OPEN"


@dataclass(frozen=True)
class SymLDParams:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 0:
            raise ValueError(f"need p >= 1 and q >= 0, got p={self.p}, q={self.q}")

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.q, self.p)


@dataclass(frozen=True)
class CurvePoint:
    alpha: Fraction
    w: Fraction
    v: Fraction
    twf: Fraction | Open
    twp: Fraction


def as_alpha(alpha) -> Fraction:
    if isinstance(alpha, float):
        a = Fraction(str(alpha))
    else:
        a = Fraction(alpha)
    if a < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return a


def csym_oneway_ic(alpha) -> Fraction:
    """The W curve."""
    a = as_alpha(alpha)
    if a <= Fraction(1, 2):
        return 1 - a
    if a <= TWO_THIRDS:
        return a
    if a <= 1:
        return 1 - a / 2
    if a <= 2:
        return a / 2
    return Fraction(1)


def csym_ic_feedback(alpha) -> Fraction:
    """The V curve (perfect output feedback), unbounded in alpha."""
    a = as_alpha(alpha)
    return max(1 - a / 2, a / 2)


def twoway_full_outer(alpha) -> Fraction:
    """Outer bound from the sum bounds that survive full adaptation, with the single-rate cap."""
    a = as_alpha(alpha)
    sum_bound = (max(Fraction(1), a) + max(1 - a, Fraction(0))) / 2
    return min(Fraction(1), sum_bound)


def csym_twoway_full(alpha) -> Fraction | Open:
    a = as_alpha(alpha)
    if a >= TWO_THIRDS:
        return min(Fraction(1), csym_ic_feedback(a))
    return Open(twoway_full_outer(a))


def csym_twoway_partial(alpha) -> Fraction:
    return csym_oneway_ic(alpha)


def csym_from_region(p: int, q: int) -> Fraction:
    """Per-user normalized sum capacity read off the region polytope."""
    r = region_ld_ic_sym(p, q)
    return Fraction(r.max_weighted_sum({"R12": 1, "R34": 1})) / (2 * p)


def default_grid() -> list[Fraction]:
    return [Fraction(k, 12) for k in range(37)]


def sweep_fig_curves(alphas: Iterable | None = None) -> list[CurvePoint]:
    grid = default_grid() if alphas is None else [as_alpha(a) for a in alphas]
    if not grid:
        raise ValueError("empty alpha grid")
    return [CurvePoint(a, csym_oneway_ic(a), csym_ic_feedback(a),
                       csym_twoway_full(a), csym_twoway_partial(a))
            for a in sorted(set(grid))]


def _dec(x) -> str:
    return "OPEN" if isinstance(x, Open) else f"{float(x):.6f}"


def curves_csv(rows: Sequence[CurvePoint]) -> str:
    lines = ["alpha,w,v,twf,twp"]
    for r in rows:
        lines.append(",".join(_dec(x) for x in (r.alpha, r.w, r.v, r.twf, r.twp)))
    return "\n".join(lines) + "\n"


def curves_json(rows: Sequence[CurvePoint]) -> str:
    def enc(x):
        if isinstance(x, Open):
            return {"open": True, "outer_bound": frac_str(x.outer_bound)}
        return frac_str(x)

    return json.dumps([{"alpha": enc(r.alpha), "w": enc(r.w), "v": enc(r.v),
                        "twf": enc(r.twf), "twp": enc(r.twp)} for r in rows], indent=1)
