"""Zero-error coding schemes on linear deterministic two-way networks.

Every scheme here is linear over GF(2): each transmitted level is either
idle or a single payload bit (possibly repeated).  Simulation therefore
runs twice in lock-step, once on concrete bits and once on masks that say
which payload bits each received level is the XOR of.  A receiver decodes
a desired bit iff that bit's unit vector lies in the row space of its
observations, after cancelling its own transmission and removing the bits
of its own messages; the concrete decode is then checked against the
payload.

Schedules
---------
* MAC/BC and Z: time-sharing between one-shot corner allocations.
* Symmetric IC: a fixed level table per supported ``alpha = q/p``.
* Routing: three-hop relay that only works with adaptive encoders.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .ld_core import GF2Vector, LDNetwork, cancel_self_interference, channel_output
from .rate_region import (RateRegion, region_ld_macbc, region_ld_z, IC_COORDS,
                          MACBC_COORDS, Z_COORDS, pos)
from .sym_curves import SymLDParams, csym_oneway_ic

IC_GRID = tuple(Fraction(x) for x in ("0", "1/4", "1/2", "2/3", "1", "3/2", "2", "3"))


def msg_ends(mid: str) -> tuple[int, int]:
    """``"M12" -> (1, 2)``."""
    if len(mid) != 3 or mid[0] != "M":
        raise ValueError(f"bad message id {mid!r}")
    return int(mid[1]), int(mid[2])


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass
class SchemeRun:
    network: LDNetwork
    blocklength: int
    payloads: dict[str, tuple[int, ...]]
    transcript: list[dict]
    decoded: dict[str, tuple | None]
    achieved_rates: dict[str, Fraction]
    passed: bool
    non_adaptive: bool
    label: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "PASSED" if self.passed else "FAILED"

    def transcript_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.transcript)


# ---------------------------------------------------------------------------
# engine

Encoder = Callable[[int, int, Sequence[tuple[int, ...]]], Sequence[int]]


class TableEncoder:
    """Non-adaptive encoder reading a fixed level table.

    ``table[node][t]`` is a list of N entries, each ``None`` (idle) or a
    ``(message id, bit index)`` pair.
    """

    def __init__(self, table: Mapping[int, Sequence[Sequence]], var_index: Mapping):
        self.table = table
        self.var_index = var_index

    def __call__(self, node, t, history):
        levels = self.table.get(node)
        if levels is None:
            return None
        return [0 if e is None else 1 << self.var_index[tuple(e)] for e in levels[t]]


def _rref_decode(rows: list[tuple[int, int]], wanted: list[int]) -> dict[int, int | None]:
    """Solve for the wanted variables from GF(2) rows ``(mask, value)``."""
    pivots: dict[int, tuple[int, int]] = {}
    for mask, val in rows:
        for pbit, (pm, pv) in pivots.items():
            if mask >> pbit & 1:
                mask ^= pm
                val ^= pv
        if mask == 0:
            continue
        pbit = mask.bit_length() - 1
        for other, (om, ov) in list(pivots.items()):
            if om >> pbit & 1:
                pivots[other] = (om ^ mask, ov ^ val)
        pivots[pbit] = (mask, val)
    out = {}
    for v in wanted:
        row = pivots.get(v)
        out[v] = row[1] if row is not None and row[0] == 1 << v else None
    return out


def simulate(net: LDNetwork, encoder: Encoder, messages: Mapping[str, int], blocklength: int,
             payloads: Mapping[str, Sequence[int]] | None = None, seed: int = 0,
             label: str = "", counterfactual_trials: int = 2) -> SchemeRun:
    """Run a linear scheme for ``blocklength`` channel uses and decode every message."""
    N = net.N
    rng = random.Random(seed)
    messages = {m: int(n) for m, n in messages.items()}
    if payloads is None:
        payloads = {m: tuple(rng.randint(0, 1) for _ in range(n)) for m, n in messages.items()}
    payloads = {m: tuple(int(b) for b in payloads[m]) for m in messages}
    for m, n in messages.items():
        if len(payloads[m]) != n:
            raise ValueError(f"payload for {m} has {len(payloads[m])} bits, expected {n}")
    var_index, variables = {}, []
    for m in sorted(messages):
        for b in range(messages[m]):
            var_index[(m, b)] = len(variables)
            variables.append((m, b))
    if hasattr(encoder, "var_index"):
        encoder.var_index = var_index
    value = 0
    for i, (m, b) in enumerate(variables):
        value |= payloads[m][b] << i

    nodes = net.nodes
    hist: dict[int, list[tuple[int, ...]]] = {k: [] for k in nodes}
    inputs: dict[int, list[tuple[int, ...]]] = {k: [] for k in nodes}
    in_bits: dict[int, list[GF2Vector]] = {k: [] for k in nodes}
    out_bits: dict[int, list[GF2Vector]] = {k: [] for k in nodes}
    transcript = []
    for t in range(blocklength):
        cur = {}
        for j in nodes:
            masks = encoder(j, t, tuple(hist[j]))
            masks = tuple(masks) if masks is not None else (0,) * N
            if len(masks) != N:
                raise ValueError(f"encoder for node {j} returned {len(masks)} levels, expected {N}")
            cur[j] = masks
        vec = {j: GF2Vector._trusted(tuple(_parity(mk & value) for mk in cur[j])) for j in nodes}
        for k in nodes:
            y = channel_output(net, vec, k)
            ymask = [0] * N
            for j in net.transmitters_into(k):
                s = N - net.gains[(j, k)]
                for i in range(N - s):
                    ymask[i + s] ^= cur[j][i]
            hist[k].append(tuple(ymask))
            inputs[k].append(cur[k])
            in_bits[k].append(vec[k])
            out_bits[k].append(y)
            transcript.append({"t": t, "node": k, "input": str(vec[k]), "output": str(y)})

    src_of = {m: msg_ends(m)[0] for m in messages}
    decoded, ok = {}, True
    for k in nodes:
        wanted_msgs = [m for m in messages if msg_ends(m)[1] == k]
        if not wanted_msgs:
            continue
        known = 0
        for i, (m, _) in enumerate(variables):
            if src_of[m] == k:
                known |= 1 << i
        rows = []
        for t in range(blocklength):
            y = cancel_self_interference(net, k, out_bits[k][t], in_bits[k][t])
            n_kk = net.gain(k, k)
            for i in range(N):
                mask = hist[k][t][i]
                if n_kk is not None:
                    s = N - n_kk
                    if i >= s:
                        mask ^= inputs[k][t][i - s]
                val = y[i] ^ _parity(mask & known & value)
                rows.append((mask & ~known, val))
        wanted = [var_index[(m, b)] for m in wanted_msgs for b in range(messages[m])]
        sol = _rref_decode(rows, wanted)
        for m in wanted_msgs:
            bits = tuple(sol[var_index[(m, b)]] for b in range(messages[m]))
            if any(b is None for b in bits):
                decoded[m] = None
                ok = False
            else:
                decoded[m] = bits
                ok = ok and bits == payloads[m]

    non_adaptive = True
    for _ in range(counterfactual_trials):
        for j in nodes:
            for t in range(blocklength):
                fake = tuple(tuple(rng.getrandbits(max(1, len(variables))) for _ in range(N))
                             for _ in range(t))
                masks = encoder(j, t, fake)
                masks = tuple(masks) if masks is not None else (0,) * N
                if masks != inputs[j][t]:
                    non_adaptive = False
    rates = {m: Fraction(n, blocklength) for m, n in messages.items()}
    return SchemeRun(net, blocklength, dict(payloads), transcript, decoded, rates, ok,
                     non_adaptive, label)


def _fill(slots: list[dict[int, list]], messages: Mapping[str, int], N: int):
    """Turn per-slot message labels into ``(message, bit)`` entries, in order."""
    counters = {m: 0 for m in messages}
    table: dict[int, list[list]] = {}
    for t, slot in enumerate(slots):
        for node, labels in slot.items():
            row = []
            for lab in labels:
                if lab is None or counters.get(lab, messages.get(lab, 0)) >= messages.get(lab, 0):
                    row.append(None)
                else:
                    row.append((lab, counters[lab]))
                    counters[lab] += 1
            table.setdefault(node, [[None] * N for _ in slots])[t] = row
    short = {m: (counters[m], n) for m, n in messages.items() if counters[m] < n}
    if short:
        raise ValueError(f"schedule carries fewer bits than requested: {short}")
    return table


def _lcm(*ds: int) -> int:
    out = 1
    for d in ds:
        out = out * d // math.gcd(out, d)
    return out


def _rates_point(coords, payload_sizes, L):
    return {c: Fraction(payload_sizes.get("M" + c[1:], 0), L) for c in coords}


# ---------------------------------------------------------------------------
# MAC/BC


@dataclass(frozen=True)
class TimeShareConfig:
    """Fractions of channel uses given to the priority corners.

    ``a`` is the share of uses in which M12 is served first in the MAC
    direction (M32 first otherwise); ``b`` is the share in which M21 is
    served first in the BC direction.
    """

    a: Fraction
    b: Fraction

    def __post_init__(self):
        for name in ("a", "b"):
            v = Fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)

    @property
    def blocklength(self) -> int:
        return _lcm(self.a.denominator, self.b.denominator)


def _mac_levels(N, n_first, n_second, first, second):
    """Receiver-side stacking: ``first`` gets the top of its own signal."""
    lev_first = [first] * n_first + [None] * (N - n_first)
    k = pos(n_second - n_first)
    lev_second = [second] * k + [None] * (N - k)
    return lev_first, lev_second


def _bc_levels(N, n_first, n_second, first, second):
    """Transmitter-side layering: ``first`` on the top levels, ``second`` just below."""
    lev = [None] * N
    for i in range(n_first):
        lev[i] = first
    for i in range(n_first, max(n_first, n_second)):
        lev[i] = second
    return lev


def _g(net, j, k):
    return net.gain(j, k) or 0


def macbc_network(n12, n32, n21, n23, self_gains=(0, 0, 0)) -> LDNetwork:
    gains = {(1, 2): n12, (3, 2): n32, (2, 1): n21, (2, 3): n23}
    for node, g in zip((1, 2, 3), self_gains):
        if g:
            gains[(node, node)] = g
    return LDNetwork(gains, nodes=(1, 2, 3))


def macbc_region_of(net: LDNetwork) -> RateRegion:
    return region_ld_macbc(_g(net, 1, 2), _g(net, 3, 2), _g(net, 2, 1), _g(net, 2, 3))


def macbc_capacity(net: LDNetwork, cfg: TimeShareConfig) -> dict[str, Fraction]:
    n12, n32, n21, n23 = _g(net, 1, 2), _g(net, 3, 2), _g(net, 2, 1), _g(net, 2, 3)
    a, b = cfg.a, cfg.b
    return {
        "M12": a * n12 + (1 - a) * pos(n12 - n32),
        "M32": a * pos(n32 - n12) + (1 - a) * n32,
        "M21": b * n21 + (1 - b) * pos(n21 - n23),
        "M23": b * pos(n23 - n21) + (1 - b) * n23,
    }


def plan_macbc(net: LDNetwork, target: Mapping[str, Fraction]) -> TimeShareConfig:
    """Smallest priority shares whose time-share dominates ``target`` (rates per use)."""
    region = macbc_region_of(net)
    if not region.contains({c: Fraction(target.get(c, 0)) for c in MACBC_COORDS}):
        raise ValueError(f"target {dict(target)} lies outside the capacity region")

    def share(hi_first, lo_first, r_first, hi_second, lo_second, r_second):
        # time share s with s*hi_first + (1-s)*lo_first >= r_first and
        # s*lo_second + (1-s)*hi_second >= r_second
        s = Fraction(0)
        if hi_first > lo_first:
            s = max(s, (Fraction(r_first) - lo_first) / (hi_first - lo_first))
        return min(Fraction(1), s)

    n12, n32, n21, n23 = _g(net, 1, 2), _g(net, 3, 2), _g(net, 2, 1), _g(net, 2, 3)
    a = share(n12, pos(n12 - n32), target.get("R12", 0), n32, pos(n32 - n12), target.get("R32", 0))
    b = share(n21, pos(n21 - n23), target.get("R21", 0), n23, pos(n23 - n21), target.get("R23", 0))
    return TimeShareConfig(a, b)


def run_macbc_timeshare(net: LDNetwork, cfg: TimeShareConfig, payload_sizes: Mapping[str, int],
                        blocklength: int | None = None, seed: int = 0) -> SchemeRun:
    """Non-adaptive time-sharing on the LD two-way MAC/BC.

    ``payload_sizes`` gives total bits per message over the block.  The
    block length defaults to the least common multiple of the share
    denominators and must be a multiple of it.
    """
    L = blocklength or cfg.blocklength
    if L % cfg.blocklength:
        raise ValueError(f"blocklength {L} is not a multiple of {cfg.blocklength}")
    messages = {m: int(payload_sizes.get(m, 0)) for m in ("M12", "M32", "M21", "M23")}
    extra = set(payload_sizes) - set(messages)
    if extra:
        raise ValueError(f"unknown messages {sorted(extra)}")
    point = _rates_point(MACBC_COORDS, messages, L)
    if not macbc_region_of(net).contains(point):
        raise ValueError(f"rates {point} lie outside the capacity region")
    cap = macbc_capacity(net, cfg)
    over = {m: (messages[m], cap[m] * L) for m in messages if messages[m] > cap[m] * L}
    if over:
        raise ValueError(f"payload exceeds the schedule's capacity: {over}")

    N = net.N
    n12, n32, n21, n23 = _g(net, 1, 2), _g(net, 3, 2), _g(net, 2, 1), _g(net, 2, 3)
    slots = []
    for t in range(L):
        if t < cfg.a * L:
            l1, l3 = _mac_levels(N, n12, n32, "M12", "M32")
        else:
            l3, l1 = _mac_levels(N, n32, n12, "M32", "M12")
        if t < cfg.b * L:
            l2 = _bc_levels(N, n21, n23, "M21", "M23")
        else:
            l2 = _bc_levels(N, n23, n21, "M23", "M21")
        slots.append({1: l1, 2: l2, 3: l3})
    table = _fill(slots, messages, N)
    return simulate(net, TableEncoder(table, {}), messages, L, seed=seed, label="macbc_timeshare")


# ---------------------------------------------------------------------------
# Z channel

# per direction: (single transmitter, its message, dual transmitter, message to
# the shared receiver, message to the private receiver, shared rx, private rx)
Z_DIRECTIONS = {
    "fwd": (1, "M12", 3, "M32", "M34", 2, 4),
    "bwd": (4, "M43", 2, "M23", "M21", 3, 1),
}


def z_network(n12, n32, n34, n43, n23, n21, self_gains=(0, 0, 0, 0)) -> LDNetwork:
    gains = {(1, 2): n12, (3, 2): n32, (3, 4): n34, (4, 3): n43, (2, 3): n23, (2, 1): n21}
    for node, g in zip((1, 2, 3, 4), self_gains):
        if g:
            gains[(node, node)] = g
    return LDNetwork(gains, nodes=(1, 2, 3, 4))


def z_region_of(net: LDNetwork) -> RateRegion:
    return region_ld_z(_g(net, 1, 2), _g(net, 3, 2), _g(net, 3, 4),
                       _g(net, 4, 3), _g(net, 2, 3), _g(net, 2, 1))


def _one_shot_decodable(gains: Mapping, N: int, levels: Mapping[int, Sequence], wanted) -> bool:
    """Mask-only decodability of one uncoded channel use.

    ``levels[node]`` labels each level with a message id or ``None``;
    ``wanted`` maps receiver -> messages it must recover.  Receivers'
    own transmissions are assumed cancelled, so only the listed
    transmitters contribute.
    """
    var, masks = {}, {}
    for node, labs in levels.items():
        masks[node] = []
        for lab in labs:
            if lab is None:
                masks[node].append(0)
            else:
                var[(lab, len(var))] = len(var)
                masks[node].append(1 << (len(var) - 1))
    owner = {i: lab for (lab, _), i in var.items()}
    for k, msgs in wanted.items():
        rows = [0] * N
        for node in levels:
            g = gains.get((node, k))
            if not g:
                continue
            s = N - g
            for i in range(N - s):
                rows[i + s] ^= masks[node][i]
        need = [i for i, lab in owner.items() if lab in msgs]
        sol = _rref_decode([(r, 0) for r in rows], need)
        if any(v is None for v in sol.values()):
            return False
    return True


@lru_cache(maxsize=None)
def _z_corners_cached(gain_items: tuple, N: int, direction: str):
    gains = dict(gain_items)
    s, ms, d, m_shared, m_priv, rx_shared, rx_priv = Z_DIRECTIONS[direction]
    wanted = {rx_shared: (ms, m_shared), rx_priv: (m_priv,)}
    best: dict[tuple, tuple] = {}
    for l_s in itertools.product((None, ms), repeat=N):
        for l_d in itertools.product((None, m_shared, m_priv), repeat=N):
            counts = (l_s.count(ms), l_d.count(m_shared), l_d.count(m_priv))
            if counts in best:
                continue
            if _one_shot_decodable(gains, N, {s: l_s, d: l_d}, wanted):
                best[counts] = (l_s, l_d)
    pareto = {c: v for c, v in best.items()
              if not any(o != c and all(x >= y for x, y in zip(o, c)) for o in best)}
    return best, pareto


def z_one_shot(net: LDNetwork, direction: str):
    """Decodable one-shot uncoded allocations of one direction.

    Returns ``(all, pareto)``: dicts mapping the bit-count triple
    ``(single msg, shared-receiver msg, private-receiver msg)`` to level
    labels for the two transmitters.  The search is exhaustive over level
    labelings; the chosen allocations are re-verified by full simulation
    when a scheme runs.
    """
    s, _, d, _, _, rx_shared, rx_priv = Z_DIRECTIONS[direction]
    key = tuple(sorted((jk, g) for jk, g in net.gains.items()
                       if jk[0] in (s, d) and jk[1] in (rx_shared, rx_priv)))
    return _z_corners_cached(key, net.N, direction)


@dataclass(frozen=True)
class ZTimeShareConfig:
    """Weights over one-shot allocations, per direction.

    Each entry is ``(weight, counts)`` where ``counts`` is the bit triple of
    a decodable one-shot allocation (see :func:`z_one_shot`).
    """

    fwd: tuple
    bwd: tuple

    def __post_init__(self):
        for name in ("fwd", "bwd"):
            entries = tuple((Fraction(w), tuple(c)) for w, c in getattr(self, name))
            if any(w < 0 for w, _ in entries) or sum(w for w, _ in entries) != 1:
                raise ValueError(f"{name} weights must be nonnegative and sum to 1")
            object.__setattr__(self, name, entries)

    @property
    def blocklength(self) -> int:
        return _lcm(*(w.denominator for w, _ in self.fwd + self.bwd))


def plan_z_point(net: LDNetwork, target: Mapping[str, Fraction]) -> ZTimeShareConfig:
    """Single-allocation plan for an integral target (e.g. a region vertex)."""
    if not z_region_of(net).contains({c: Fraction(target.get(c, 0)) for c in Z_COORDS}):
        raise ValueError(f"target {dict(target)} lies outside the capacity region")
    plan = {}
    for direction, (_, ms, _, m_shared, m_priv, _, _) in Z_DIRECTIONS.items():
        want = tuple(Fraction(target.get("R" + m[1:], 0)) for m in (ms, m_shared, m_priv))
        if any(w.denominator != 1 for w in want):
            raise ValueError(f"single-allocation plans need integral rates, got {want}")
        want = tuple(int(w) for w in want)
        best, _ = z_one_shot(net, direction)
        cands = [c for c in best if all(x >= y for x, y in zip(c, want))]
        if not cands:
            raise ValueError(f"no one-shot allocation reaches {want} in direction {direction}")
        plan[direction] = ((1, min(cands, key=lambda c: (sum(c), c))),)
    return ZTimeShareConfig(plan["fwd"], plan["bwd"])


def run_z_timeshare(net: LDNetwork, cfg: ZTimeShareConfig, payload_sizes: Mapping[str, int],
                    blocklength: int | None = None, seed: int = 0) -> SchemeRun:
    L = blocklength or cfg.blocklength
    if L % cfg.blocklength:
        raise ValueError(f"blocklength {L} is not a multiple of {cfg.blocklength}")
    names = ("M12", "M32", "M34", "M21", "M23", "M43")
    extra = set(payload_sizes) - set(names)
    if extra:
        raise ValueError(f"unknown messages {sorted(extra)}")
    messages = {m: int(payload_sizes.get(m, 0)) for m in names}
    point = _rates_point(Z_COORDS, messages, L)
    if not z_region_of(net).contains(point):
        raise ValueError(f"rates {point} lie outside the capacity region")

    N = net.N
    slots = [dict() for _ in range(L)]
    for direction in ("fwd", "bwd"):
        s, ms, d, m_shared, m_priv, _, _ = Z_DIRECTIONS[direction]
        best, _ = z_one_shot(net, direction)
        t = 0
        for w, counts in getattr(cfg, direction):
            if counts not in best:
                raise ValueError(f"{counts} is not a decodable one-shot allocation ({direction})")
            l_s, l_d = best[counts]
            for _ in range(int(w * L)):
                slots[t][s] = list(l_s)
                slots[t][d] = list(l_d)
                t += 1
    table = _fill(slots, messages, N)
    return simulate(net, TableEncoder(table, {}), messages, L, seed=seed, label="z_timeshare")


# ---------------------------------------------------------------------------
# symmetric IC


def ic_network(p: int, q: int, self_gain: int | None = None) -> LDNetwork:
    gains = {(1, 2): p, (3, 4): p, (2, 1): p, (4, 3): p,
             (3, 2): q, (1, 4): q, (4, 1): q, (2, 3): q}
    if self_gain:
        for j in (1, 2, 3, 4):
            gains[(j, j)] = self_gain
    return LDNetwork(gains, nodes=(1, 2, 3, 4))


# forward users (1 -> 2, 3 -> 4) and backward users (2 -> 1, 4 -> 3); the
# first node of each pair plays "user A" in the two-slot patterns
IC_PAIRS = (((1, "M12"), (3, "M34")), ((2, "M21"), (4, "M43")))


def ic_level_table(p: int, q: int):
    """Per-slot level labels for one user pair: ``(L, rows_A, rows_B)``.

    Each row lists, per level, ``"fresh"``, ``"rep<k>"`` (repeat of the
    k-th fresh bit of this slot), or ``None``.
    """
    a = Fraction(q, p)
    N = max(p, q)
    if a not in IC_GRID:
        raise ValueError(f"alpha={a} has no level table; supported: {[str(x) for x in IC_GRID]}")
    idle = [None] * N
    if a <= Fraction(1, 2):
        row = ["fresh"] * (p - q) + [None] * q
        return 1, [row], [row]
    if a == Fraction(2, 3):
        m = p // 3
        row = ["fresh"] * m + [None] * m + ["fresh"] * m
        return 1, [row], [row]
    if a == 1:
        full = ["fresh"] * p
        return 2, [full, idle], [idle, full]
    if a == Fraction(3, 2):
        m = p // 2
        two = ["fresh"] * (2 * m) + [None] * m
        rep = ["fresh"] * m + [f"rep{i}" for i in range(m)] + [None] * m
        return 2, [two, rep], [rep, two]
    row = ["fresh"] * p + [None] * (N - p)
    return 1, [row], [row]


def run_ic_symmetric(params: SymLDParams, target: Fraction | None = None,
                     self_gain: int | None = None, seed: int = 0) -> SchemeRun:
    """Static level allocation on the symmetric LD two-way IC, both directions at once.

    ``target`` is the per-user rate per channel use; it defaults to the
    symmetric capacity and must not exceed it.
    """
    p, q = params.p, params.q
    L, rows_a, rows_b = ic_level_table(p, q)
    cap = csym_oneway_ic(params.alpha) * p
    if target is not None and Fraction(target) > cap:
        raise ValueError(f"target {target} exceeds the symmetric capacity {cap}")
    net = ic_network(p, q, self_gain)
    N = net.N
    table: dict[int, list[list]] = {}
    messages: dict[str, int] = {}
    for pair in IC_PAIRS:
        for (node, mid), rows in zip(pair, (rows_a, rows_b)):
            counter = 0
            table[node] = []
            for row in rows:
                fresh_here: list[int] = []
                levels = []
                for lab in row:
                    if lab == "fresh":
                        fresh_here.append(counter)
                        levels.append((mid, counter))
                        counter += 1
                    elif lab is None:
                        levels.append(None)
                    else:
                        levels.append((mid, fresh_here[int(lab[3:])]))
                table[node].append(levels)
            messages[mid] = counter
    run = simulate(net, TableEncoder(table, {}), messages, L, seed=seed, label="ic_symmetric")
    run.notes["per_user_rate"] = Fraction(messages["M12"], L)
    run.notes["capacity"] = cap
    if target is not None and run.notes["per_user_rate"] < Fraction(target):
        run.passed = False
    return run


# ---------------------------------------------------------------------------
# routing demo


def routing_network(k: int = 1) -> LDNetwork:
    """Forward cross links and backward direct links only; the rest are explicit zeros."""
    return LDNetwork({(1, 4): k, (3, 2): k, (1, 2): 0, (3, 4): 0,
                      (4, 3): k, (2, 1): k, (2, 3): 0, (4, 1): 0}, nodes=(1, 2, 3, 4))


class RelayEncoder:
    """Source feeds fresh bits; two relays forward what they heard one use earlier."""

    def __init__(self, net, source, msg, relays, bits_per_use, n_bits):
        self.N = net.N
        self.source, self.msg, self.relays = source, msg, relays
        self.k, self.n_bits = bits_per_use, n_bits
        self.var_index: dict = {}

    def __call__(self, node, t, history):
        N, k = self.N, self.k
        if node == self.source:
            out = [0] * N
            for i in range(k):
                b = t * k + i
                if b < self.n_bits:
                    out[i] = 1 << self.var_index[(self.msg, b)]
            return out
        if node in self.relays and t >= 1:
            # heard on the bottom k levels; resend on the top k
            heard = history[t - 1]
            return list(heard[N - k:]) + [0] * (N - k)
        return [0] * N


def nonadaptive_paths(net: LDNetwork, source: int, dest: int) -> bool:
    """True iff a positive-gain link carries the source's signal straight to the destination.

    Without adaptation every input is a function of the node's own
    messages, so only the direct link can convey information about them.
    """
    return (net.gain(source, dest) or 0) > 0


def run_routing_demo(k: int = 1, blocklength: int = 3, mirrored: bool = False,
                     seed: int = 0) -> SchemeRun:
    """Adaptive three-hop relay delivering M12 (or M34 when ``mirrored``)."""
    if blocklength < 3:
        raise ValueError("the relay path needs at least 3 channel uses")
    net = routing_network(k)
    if mirrored:
        source, dest, msg, relays = 3, 4, "M34", (2, 1)
    else:
        source, dest, msg, relays = 1, 2, "M12", (4, 3)
    n_bits = k * (blocklength - 2)
    enc = RelayEncoder(net, source, msg, relays, k, n_bits)
    run = simulate(net, enc, {msg: n_bits}, blocklength, seed=seed, label="routing_demo")
    direct = nonadaptive_paths(net, source, dest)
    run.notes["nonadaptive_positive_rate_possible"] = direct
    run.notes["nonadaptive_rate_bound"] = None if direct else Fraction(0)
    return run

