"""H-representation rate regions with exact vertex enumeration.

Regions are bounded polytopes ``{R >= 0 : a_i . R <= b_i}`` over named rate
coordinates.  Integer-gain regions are held in exact rationals, so vertex
sets, membership and equality are decided without rounding; regions whose
right-hand sides involve ``log2(kappa)`` for non-power-of-two alphabets fall
back to binary64 with a ``1e-9`` tolerance.

Vertex enumeration is brute force over bases.  Coordinates are first split
into independent blocks (no inequality couples two blocks), so the two
directions of a two-way network are enumerated separately and the vertex
set is their Cartesian product.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

FLOAT_TOL = 1e-9

FULL = "full"
PARTIAL = "partial"


def pos(x):
    return x if x > 0 else 0


def frac_str(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return repr(float(x))


def parse_frac(s):
    if isinstance(s, (int, float)):
        return s
    if "/" in s:
        n, d = s.split("/")
        return Fraction(int(n), int(d))
    return float(s)


def _exact_number(v):
    # integral values stay ints: Fraction arithmetic is the bottleneck in sweeps
    if isinstance(v, int):
        return v
    f = v if isinstance(v, Fraction) else Fraction(v)
    return f.numerator if f.denominator == 1 else f


@dataclass(frozen=True)
class Inequality:
    a: tuple
    b: object
    label: str = ""


@dataclass(frozen=True)
class RatePoint:
    """A rate tuple tied to a coordinate naming."""

    coords: tuple[str, ...]
    values: tuple

    def __post_init__(self):
        if len(self.coords) != len(self.values):
            raise ValueError("coords and values differ in length")

    def __getitem__(self, name: str):
        return self.values[self.coords.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.coords, self.values))

    @classmethod
    def from_mapping(cls, coords: Sequence[str], values: Mapping[str, object]) -> "RatePoint":
        extra = set(values) - set(coords)
        if extra:
            raise ValueError(f"unknown rate names {sorted(extra)}")
        return cls(tuple(coords), tuple(values.get(c, 0) for c in coords))


def _solve(rows, rhs, exact: bool):
    """Unique solution of a square system, or None when singular."""
    n = len(rows)
    conv = Fraction if exact else float
    m = [[conv(x) for x in r] + [conv(v)] for r, v in zip(rows, rhs)]
    for col in range(n):
        if exact:
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(m[r][col]))
            if abs(m[piv][col]) < 1e-12:
                piv = None
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return tuple(m[r][n] for r in range(n))


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x) if ai)


def enumerate_vertices(rows, rhs, exact: bool = True) -> list[tuple]:
    """Extreme points of ``{x >= 0 : rows . x <= rhs}`` by basis enumeration.

    Nonnegativity rows are appended internally.  No decomposition is done,
    which makes this the slow reference path.
    """
    return list(_enumerate_cached(tuple(map(tuple, rows)), tuple(rhs), exact))


@lru_cache(maxsize=8192)
def _enumerate_cached(rows, rhs, exact):
    d = len(rows[0]) if rows else 0
    all_rows = [tuple(r) for r in rows]
    all_rhs = list(rhs)
    for i in range(d):
        all_rows.append(tuple(-1 if j == i else 0 for j in range(d)))
        all_rhs.append(0)
    found = {}
    for subset in itertools.combinations(range(len(all_rows)), d):
        sol = _solve([all_rows[i] for i in subset], [all_rhs[i] for i in subset], exact)
        if sol is None:
            continue
        tol = 0 if exact else FLOAT_TOL
        if all(_dot(r, sol) <= v + tol for r, v in zip(all_rows, all_rhs)):
            if exact:
                sol = tuple(_exact_number(s) for s in sol)
                key = sol
            else:
                sol = tuple(0.0 if abs(s) < FLOAT_TOL else float(s) for s in sol)
                key = tuple(round(s, 9) for s in sol)
            found.setdefault(key, sol)
    return tuple(sorted(found.values()))


@dataclass(frozen=True)
class RateRegion:
    """Bounded polytope ``{R >= 0 : a . R <= b}`` over named rate coordinates.

    Parameters
    ----------
    coords : sequence of str
        Rate names, e.g. ``("R12", "R32", "R21", "R23")``.
    ineqs : sequence of Inequality
        Constraints as generated by the constructor; redundant ones are
        kept.  See :meth:`irredundant` for the reduced view.
    exact : bool
        True when all data are rationals.
    adaptation : str
        Strategy class the region is proved for: ``"full"`` or ``"partial"``.
    full_labels : frozenset of str
        For partial-adaptation regions, labels of the inequalities that are
        also proved to hold under full adaptation.
    """

    coords: tuple[str, ...]
    ineqs: tuple[Inequality, ...]
    exact: bool = True
    adaptation: str = FULL
    full_labels: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate coordinate names")
        d = len(coords)
        conv = _exact_number if self.exact else float
        ineqs = []
        for q in self.ineqs:
            if len(q.a) != d:
                raise ValueError(f"inequality {q.label!r} has {len(q.a)} coefficients, expected {d}")
            ineqs.append(Inequality(tuple(conv(v) for v in q.a), conv(q.b), q.label))
        object.__setattr__(self, "ineqs", tuple(ineqs))
        object.__setattr__(self, "full_labels", frozenset(self.full_labels))
        if self.adaptation not in (FULL, PARTIAL):
            raise ValueError(f"unknown adaptation tag {self.adaptation!r}")
        for i, c in enumerate(coords):
            if not any(q.a[i] > 0 and all(v >= 0 for v in q.a) for q in ineqs):
                raise ValueError(f"region is unbounded along {c}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    # -- blocks -----------------------------------------------------------
    def _blocks(self) -> list[list[int]]:
        parent = list(range(self.dim))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for q in self.ineqs:
            support = [i for i, v in enumerate(q.a) if v != 0]
            for i in support[1:]:
                parent[find(i)] = find(support[0])
        groups: dict[int, list[int]] = {}
        for i in range(self.dim):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def _block_vertices(self) -> list[tuple[list[int], list[tuple]]]:
        cache = self.__dict__.get("_bv")
        if cache is not None:
            return cache
        out = []
        for block in self._blocks():
            rows, rhs = [], []
            for q in self.ineqs:
                if any(q.a[i] != 0 for i in block):
                    rows.append(tuple(q.a[i] for i in block))
                    rhs.append(q.b)
            out.append((block, enumerate_vertices(rows, rhs, self.exact)))
        object.__setattr__(self, "_bv", out)
        return out

    def vertices(self) -> list[RatePoint]:
        """All extreme points, deduplicated and sorted."""
        blocks = self._block_vertices()
        pts = []
        for combo in itertools.product(*(v for _, v in blocks)):
            vals = [0] * self.dim
            for (block, _), vb in zip(blocks, combo):
                for i, v in zip(block, vb):
                    vals[i] = v
            pts.append(RatePoint(self.coords, tuple(vals)))
        return sorted(pts, key=lambda p: p.values)

    # -- decisions --------------------------------------------------------
    def _values(self, point) -> tuple:
        if isinstance(point, RatePoint):
            if point.coords != self.coords:
                raise ValueError(f"coordinate mismatch: {point.coords} vs {self.coords}")
            return point.values
        if isinstance(point, Mapping):
            return RatePoint.from_mapping(self.coords, point).values
        vals = tuple(point)
        if len(vals) != self.dim:
            raise ValueError(f"point has {len(vals)} entries, expected {self.dim}")
        return vals

    def contains(self, point, tol: float | None = None) -> bool:
        x = tuple(_exact_number(v) if isinstance(v, Fraction) else v for v in self._values(point))
        exact = self.exact and all(isinstance(v, (int, Fraction)) for v in x)
        if tol is None:
            tol = 0 if exact else FLOAT_TOL
        if any(v < -tol for v in x):
            return False
        return all(_dot(q.a, x) <= q.b + tol for q in self.ineqs)

    def violated(self, point) -> list[str]:
        x = self._values(point)
        tol = 0 if self.exact else FLOAT_TOL
        return [q.label for q in self.ineqs if _dot(q.a, x) > q.b + tol]

    def equals(self, other: "RateRegion") -> bool:
        if other.coords != self.coords:
            raise ValueError(f"coordinate mismatch: {other.coords} vs {self.coords}")
        return (all(other.contains(v.values) for v in self.vertices())
                and all(self.contains(v.values) for v in other.vertices()))

    def max_weighted_sum(self, weights):
        """Maximum of ``w . R`` over the region."""
        if isinstance(weights, Mapping):
            w = RatePoint.from_mapping(self.coords, weights).values
        else:
            w = tuple(weights)
            if len(w) != self.dim:
                raise ValueError(f"weights have {len(w)} entries, expected {self.dim}")
        total = 0
        for block, verts in self._block_vertices():
            total += max(sum(w[i] * v for i, v in zip(block, vert)) for vert in verts)
        return total

    def tight_counts(self) -> dict[str, int]:
        verts = self.vertices()
        tol = 0 if self.exact else FLOAT_TOL
        return {q.label: sum(1 for v in verts if abs(_dot(q.a, v.values) - q.b) <= tol)
                for q in self.ineqs}

    def redundant_inequalities(self) -> list[str]:
        """Labels of inequalities implied by the others (tested one at a time)."""
        out = []
        for k, q in enumerate(self.ineqs):
            rest = self.ineqs[:k] + self.ineqs[k + 1:]
            try:
                sub = RateRegion(self.coords, rest, self.exact)
            except ValueError:
                continue
            if sub.max_weighted_sum(q.a) <= q.b + (0 if self.exact else FLOAT_TOL):
                out.append(q.label)
        return out

    def irredundant(self) -> "RateRegion":
        ineqs = list(self.ineqs)
        changed = True
        while changed:
            changed = False
            for k, q in enumerate(ineqs):
                rest = ineqs[:k] + ineqs[k + 1:]
                try:
                    sub = RateRegion(self.coords, rest, self.exact)
                except ValueError:
                    continue
                if sub.max_weighted_sum(q.a) <= q.b + (0 if self.exact else FLOAT_TOL):
                    ineqs = rest
                    changed = True
                    break
        return RateRegion(self.coords, ineqs, self.exact, self.adaptation, self.full_labels)

    def full_adaptation_bounds(self) -> "RateRegion":
        """Outer region built only from inequalities proved under full adaptation."""
        if self.adaptation == FULL:
            return self
        kept = [q for q in self.ineqs if q.label in self.full_labels]
        return RateRegion(self.coords, kept, self.exact, FULL)

    def restrict(self, coords: Sequence[str]) -> "RateRegion":
        """Sub-region on ``coords``; every inequality must live on one side."""
        idx = [self.coords.index(c) for c in coords]
        kept = []
        for q in self.ineqs:
            inside = any(q.a[i] != 0 for i in idx)
            outside = any(v != 0 for j, v in enumerate(q.a) if j not in idx)
            if inside and outside:
                raise ValueError(f"inequality {q.label!r} couples the two coordinate sets")
            if inside:
                kept.append(Inequality(tuple(q.a[i] for i in idx), q.b, q.label))
        return RateRegion(tuple(coords), kept, self.exact, self.adaptation,
                          self.full_labels & {q.label for q in kept})

    # -- export -----------------------------------------------------------
    def to_json(self) -> dict:
        def coef(v):
            if isinstance(v, Fraction) and v.denominator == 1:
                return int(v)
            return frac_str(v) if isinstance(v, Fraction) else float(v)

        return {
            "coords": list(self.coords),
            "ineqs": [{"a": [coef(v) for v in q.a], "b": frac_str(q.b), "label": q.label}
                      for q in self.ineqs],
            "exact": self.exact,
            "adaptation": self.adaptation,
            "full_labels": sorted(self.full_labels),
        }

    @classmethod
    def from_json(cls, obj) -> "RateRegion":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        ineqs = [Inequality(tuple(parse_frac(v) for v in q["a"]), parse_frac(q["b"]),
                            q.get("label", "")) for q in obj["ineqs"]]
        return cls(tuple(obj["coords"]), ineqs, obj.get("exact", True),
                   obj.get("adaptation", FULL), frozenset(obj.get("full_labels", ())))

    def vertices_csv(self) -> str:
        lines = [",".join(self.coords)]
        for v in self.vertices():
            lines.append(",".join(f"{float(x):.6f}" for x in v.values))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# constructors

MACBC_COORDS = ("R12", "R32", "R21", "R23")
Z_COORDS = ("R12", "R32", "R34", "R21", "R23", "R43")
IC_COORDS = ("R12", "R34", "R21", "R43")


def _ineq(coords, terms: Mapping[str, int], b, label) -> Inequality:
    return Inequality(tuple(terms.get(c, 0) for c in coords), b, label)


def log2_exact(kappa: int):
    """``log2(kappa)`` as an int when kappa is a power of two, else a float."""
    if kappa < 2:
        raise ValueError("kappa must be at least 2")
    if kappa & (kappa - 1) == 0:
        return kappa.bit_length() - 1
    return math.log2(kappa)


def region_mod2_macbc() -> RateRegion:
    return region_modk("macbc", 2)


@lru_cache(maxsize=4096)
def region_modk(model: str, kappa: int) -> RateRegion:
    """Capacity region of the modulo-kappa two-way MAC/BC, Z or IC."""
    c = log2_exact(kappa)
    exact = isinstance(c, int)
    if model == "macbc":
        coords = MACBC_COORDS
        ineqs = [_ineq(coords, {"R12": 1, "R32": 1}, c, "fwd.sum"),
                 _ineq(coords, {"R21": 1, "R23": 1}, c, "bwd.sum")]
    elif model == "z":
        coords = Z_COORDS
        ineqs = [_ineq(coords, {"R12": 1, "R32": 1, "R34": 1}, c, "fwd.sum"),
                 _ineq(coords, {"R21": 1, "R23": 1, "R43": 1}, c, "bwd.sum")]
    elif model == "ic":
        coords = IC_COORDS
        ineqs = [_ineq(coords, {"R12": 1, "R34": 1}, c, "fwd.sum"),
                 _ineq(coords, {"R21": 1, "R43": 1}, c, "bwd.sum")]
    else:
        raise ValueError(f"unknown model {model!r}")
    return RateRegion(coords, ineqs, exact, FULL)


def _check_gains(**gains):
    for name, v in gains.items():
        if int(v) != v or v < 0:
            raise ValueError(f"gain {name} must be a nonnegative integer, got {v}")


@lru_cache(maxsize=4096)
def region_ld_macbc(n12: int, n32: int, n21: int, n23: int) -> RateRegion:
    """Capacity region of the linear deterministic two-way MAC/BC."""
    _check_gains(n12=n12, n32=n32, n21=n21, n23=n23)
    c = MACBC_COORDS
    ineqs = [
        _ineq(c, {"R12": 1}, n12, "fwd.single12"),
        _ineq(c, {"R32": 1}, n32, "fwd.single32"),
        _ineq(c, {"R12": 1, "R32": 1}, max(n12, n32), "fwd.sum"),
        _ineq(c, {"R21": 1}, n21, "bwd.single21"),
        _ineq(c, {"R23": 1}, n23, "bwd.single23"),
        _ineq(c, {"R21": 1, "R23": 1}, max(n21, n23), "bwd.sum"),
    ]
    return RateRegion(c, ineqs, True, FULL)


@lru_cache(maxsize=4096)
def region_ld_z(n12: int, n32: int, n34: int, n43: int, n23: int, n21: int) -> RateRegion:
    """Capacity region of the linear deterministic two-way Z channel."""
    _check_gains(n12=n12, n32=n32, n34=n34, n43=n43, n23=n23, n21=n21)
    c = Z_COORDS
    ineqs = [
        _ineq(c, {"R12": 1}, n12, "fwd.single12"),
        _ineq(c, {"R32": 1}, n32, "fwd.single32"),
        _ineq(c, {"R34": 1}, n34, "fwd.single34"),
        _ineq(c, {"R12": 1, "R32": 1}, max(n12, n32), "fwd.pair12_32"),
        _ineq(c, {"R32": 1, "R34": 1}, max(n32, n34), "fwd.pair32_34"),
        _ineq(c, {"R12": 1, "R32": 1, "R34": 1}, max(n12, n32) + pos(n34 - n32), "fwd.triple"),
        _ineq(c, {"R43": 1}, n43, "bwd.single43"),
        _ineq(c, {"R23": 1}, n23, "bwd.single23"),
        _ineq(c, {"R21": 1}, n21, "bwd.single21"),
        _ineq(c, {"R43": 1, "R23": 1}, max(n43, n23), "bwd.pair43_23"),
        _ineq(c, {"R23": 1, "R21": 1}, max(n23, n21), "bwd.pair23_21"),
        _ineq(c, {"R43": 1, "R23": 1, "R21": 1}, max(n43, n23) + pos(n21 - n23), "bwd.triple"),
    ]
    return RateRegion(c, ineqs, True, FULL)


def _ic_direction(c, ra, rb, na, nb, ncb, nca, tag):
    # ra: rate of the pair whose receiver sees cross gain ncb from rb's
    # transmitter; nca is the cross gain from ra's transmitter into rb's receiver
    return [
        _ineq(c, {ra: 1}, na, f"{tag}.a1"),
        _ineq(c, {rb: 1}, nb, f"{tag}.a2"),
        _ineq(c, {ra: 1, rb: 1}, max(na, ncb) + pos(nb - ncb), f"{tag}.b"),
        _ineq(c, {ra: 1, rb: 1}, max(nb, nca) + pos(na - nca), f"{tag}.c"),
        _ineq(c, {ra: 1, rb: 1}, max(pos(na - nca), ncb) + max(pos(nb - ncb), nca), f"{tag}.d"),
        _ineq(c, {ra: 2, rb: 1},
              max(na, ncb) + pos(na - nca) + max(pos(nb - ncb), nca), f"{tag}.e"),
        _ineq(c, {ra: 1, rb: 2},
              max(nb, nca) + pos(nb - ncb) + max(pos(na - nca), ncb), f"{tag}.f"),
    ]


@lru_cache(maxsize=4096)
def region_ld_ic(n12: int, n34: int, n32: int, n14: int,
                 n21: int, n43: int, n23: int, n41: int) -> RateRegion:
    """Outer bound (and capacity under partial adaptation) of the LD two-way IC.

    The forward direction has direct gains ``n12, n34`` and cross gains
    ``n32`` (node 3 into receiver 2) and ``n14`` (node 1 into receiver 4);
    the backward direction mirrors it with ``n21, n43, n41, n23``.  The
    region carries ``adaptation="partial"``.  The ``b``/``c`` sum bounds of
    each direction are tagged as also holding under full adaptation; the
    single-rate bounds get that tag only when all four direct gains agree.
    """
    _check_gains(n12=n12, n34=n34, n32=n32, n14=n14, n21=n21, n43=n43, n23=n23, n41=n41)
    c = IC_COORDS
    ineqs = (_ic_direction(c, "R12", "R34", n12, n34, n32, n14, "fwd")
             + _ic_direction(c, "R21", "R43", n21, n43, n41, n23, "bwd"))
    proved = ("b", "c", "a1", "a2") if n12 == n34 == n21 == n43 else ("b", "c")
    full = {q.label for q in ineqs if q.label.split(".")[1] in proved}
    return RateRegion(c, ineqs, True, PARTIAL, frozenset(full))


def region_ld_ic_sym(p: int, q: int) -> RateRegion:
    return region_ld_ic(p, p, q, q, p, p, q, q)
