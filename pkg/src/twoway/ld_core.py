"""Bit-level arithmetic for linear deterministic (ADT) two-way networks.

A signal is a binary column vector of ``N`` levels, index 0 being the most
significant level.  A link of gain ``n`` from ``j`` to ``k`` delivers
``S^(N-n) X_j`` to receiver ``k``, where ``S`` is the ``N x N`` lower shift
matrix, and all contributions are added modulo 2.

The module also carries small truth-table channel laws (modulo-kappa adders,
the binary multiplier, LD networks with few levels) and the checker for the
alphabet-restricted / invertible / uniformity class conditions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_CLASS_KAPPA = 8

# receiver -> transmitters whose inputs reach it, per topology (self included)
TOPOLOGY_LINKS: dict[str, dict[int, tuple[int, ...]]] = {
    "macbc": {1: (1, 2), 2: (1, 2, 3), 3: (2, 3)},
    "z": {1: (1, 2), 2: (1, 2, 3), 3: (2, 3, 4), 4: (3, 4)},
    # the IC class has no self-interference and common outputs per direction
    "ic": {1: (2, 4), 2: (1, 3), 3: (2, 4), 4: (1, 3)},
}

TOPOLOGY_NODES = {"macbc": (1, 2, 3), "z": (1, 2, 3, 4), "ic": (1, 2, 3, 4)}


@dataclass(frozen=True)
class GF2Vector:
    """Fixed-length binary vector, most significant level first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not set(bits) <= {0, 1}:
            raise ValueError(f"bits must be 0/1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def zeros(cls, n: int) -> "GF2Vector":
        return cls._trusted((0,) * n)

    @classmethod
    def _trusted(cls, bits: tuple) -> "GF2Vector":
        # skips validation; only for tuples already known to be 0/1 ints
        v = object.__new__(cls)
        object.__setattr__(v, "bits", bits)
        return v

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __add__(self, other: "GF2Vector") -> "GF2Vector":
        if len(self) != len(other):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")
        return GF2Vector._trusted(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    __xor__ = __add__

    def is_zero(self) -> bool:
        return not any(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def _as_vector(x) -> GF2Vector:
    return x if isinstance(x, GF2Vector) else GF2Vector(tuple(x))


@dataclass(frozen=True)
class LDNetwork:
    """Linear deterministic network given by its link gains.

    Parameters
    ----------
    gains : mapping (j, k) -> n_jk
        Bit levels from transmitter ``j`` to receiver ``k``.  Absent pairs
        mean no link; a present pair with gain 0 is an explicit dead link.
        Self-links ``(j, j)`` model self-interference.
    nodes : optional iterable of node ids
        Defaults to every node mentioned in ``gains``.
    """

    gains: Mapping[tuple[int, int], int]
    nodes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        gains = {}
        for (j, k), n in dict(self.gains).items():
            n = int(n)
            if n < 0:
                raise ValueError(f"gain n_{j}{k} must be nonnegative, got {n}")
            gains[(int(j), int(k))] = n
        object.__setattr__(self, "gains", gains)
        mentioned = {j for j, _ in gains} | {k for _, k in gains}
        nodes = tuple(sorted(set(self.nodes) | mentioned))
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return max(self.gains.values(), default=0)

    def gain(self, j: int, k: int) -> int | None:
        return self.gains.get((j, k))

    def transmitters_into(self, k: int) -> list[int]:
        return sorted(j for (j, kk) in self.gains if kk == k)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "gains": {f"{j},{k}": n for (j, k), n in sorted(self.gains.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "LDNetwork":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        gains = {}
        for key, n in obj["gains"].items():
            j, k = (int(s) for s in key.split(","))
            gains[(j, k)] = int(n)
        net = cls(gains)
        if "N" in obj and int(obj["N"]) != net.N:
            raise ValueError(f"N={obj['N']} disagrees with max gain {net.N}")
        return net


def shift_apply(x, n: int, N: int) -> GF2Vector:
    """Return ``S^(N-n) x``: the top ``n`` bits of x moved to the bottom."""
    x = _as_vector(x)
    if len(x) != N:
        raise ValueError(f"input has length {len(x)}, expected N={N}")
    if not 0 <= n <= N:
        raise ValueError(f"gain n={n} outside [0, N={N}]")
    s = N - n
    return GF2Vector._trusted((0,) * s + x.bits[: N - s])


def channel_output(net: LDNetwork, inputs: Mapping[int, Sequence[int]], k: int) -> GF2Vector:
    """Received signal at node ``k``: XOR of the shifted inputs on every link into k."""
    N = net.N
    y = GF2Vector.zeros(N)
    for j in net.transmitters_into(k):
        if j not in inputs:
            raise KeyError(f"missing input for transmitter {j} linked into {k}")
        y = y + shift_apply(inputs[j], net.gains[(j, k)], N)
    return y


def cancel_self_interference(net: LDNetwork, k: int, y, own_input) -> GF2Vector:
    """Strip the receiver's own contribution ``S^(N-n_kk) X_k`` from ``y``."""
    y = _as_vector(y)
    N = net.N
    if len(y) != N:
        raise ValueError(f"output has length {len(y)}, expected N={N}")
    n_kk = net.gain(k, k)
    if n_kk is None:
        return y
    return y + shift_apply(own_input, n_kk, N)


# ---------------------------------------------------------------------------
# Symbol-level laws


@dataclass(frozen=True)
class ModKChannel:
    """Modulo-kappa adder channel on one of the three two-way topologies."""

    kappa: int
    topology: str

    def __post_init__(self):
        if self.kappa < 2:
            raise ValueError("kappa must be at least 2")
        if self.topology not in TOPOLOGY_LINKS:
            raise ValueError(f"unknown topology {self.topology!r}")

    @property
    def links(self) -> dict[int, tuple[int, ...]]:
        return TOPOLOGY_LINKS[self.topology]


def modk_output(ch: ModKChannel, inputs: Mapping[int, int], k: int) -> int:
    total = 0
    for j in ch.links[k]:
        x = inputs[j]
        if not 0 <= x < ch.kappa:
            raise ValueError(f"symbol {x} at node {j} outside 0..{ch.kappa - 1}")
        total += x
    return total % ch.kappa


@dataclass
class TableLaw:
    """Deterministic channel law given as dense truth tables.

    Attributes
    ----------
    in_sizes : dict node -> input alphabet size
    outputs : dict node -> (deps, table)
        ``table[x_deps...]`` is the symbol received at the node, where
        ``deps`` lists the transmitters whose inputs index the table.
    out_sizes : dict node -> declared output alphabet size
    """

    in_sizes: dict[int, int]
    outputs: dict[int, tuple[tuple[int, ...], np.ndarray]]
    out_sizes: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for k, (deps, table) in self.outputs.items():
            table = np.asarray(table, dtype=np.int64)
            shape = tuple(self.in_sizes[j] for j in deps)
            if table.shape != shape:
                raise ValueError(
                    f"incomplete table for Y{k}: shape {table.shape}, expected {shape}")
            self.outputs[k] = (tuple(deps), table)
            self.out_sizes.setdefault(k, int(table.max()) + 1)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.in_sizes))

    def output(self, k: int, x: Mapping[int, int]) -> int:
        deps, table = self.outputs[k]
        return int(table[tuple(x[j] for j in deps)])

    def to_json(self) -> dict:
        return {
            "in_sizes": {str(j): s for j, s in sorted(self.in_sizes.items())},
            "outputs": {
                str(k): {"deps": list(deps), "table": table.tolist(),
                         "size": self.out_sizes[k]}
                for k, (deps, table) in sorted(self.outputs.items())
            },
        }

    @classmethod
    def from_json(cls, obj) -> "TableLaw":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        in_sizes = {int(j): int(s) for j, s in obj["in_sizes"].items()}
        outputs, out_sizes = {}, {}
        for k, spec in obj["outputs"].items():
            outputs[int(k)] = (tuple(spec["deps"]), np.asarray(spec["table"]))
            if "size" in spec:
                out_sizes[int(k)] = int(spec["size"])
        return cls(in_sizes, outputs, out_sizes)


def _law_from_function(in_sizes, deps_map, fn, out_sizes=None) -> TableLaw:
    outputs = {}
    for k, deps in deps_map.items():
        shape = tuple(in_sizes[j] for j in deps)
        table = np.zeros(shape, dtype=np.int64)
        for idx in itertools.product(*(range(s) for s in shape)):
            table[idx] = fn(k, dict(zip(deps, idx)))
        outputs[k] = (tuple(deps), table)
    return TableLaw(dict(in_sizes), outputs, dict(out_sizes or {}))


def modk_law(kappa: int, topology: str) -> TableLaw:
    ch = ModKChannel(kappa, topology)
    nodes = TOPOLOGY_NODES[topology]
    return _law_from_function(
        {j: kappa for j in nodes}, ch.links,
        lambda k, x: modk_output(ch, x, k), {k: kappa for k in nodes})


def multiplier_ic_law() -> TableLaw:
    """Binary multiplier two-way IC: Y1 = Y3 = X2 X4, Y2 = Y4 = X1 X3."""
    links = TOPOLOGY_LINKS["ic"]
    return _law_from_function(
        {j: 2 for j in (1, 2, 3, 4)}, links,
        lambda k, x: int(np.prod([x[j] for j in links[k]])), {k: 2 for k in (1, 2, 3, 4)})


def ld_law(net: LDNetwork) -> TableLaw:
    """Truth-table view of an LD network; symbols are level vectors read as integers."""
    N = net.N
    size = 2 ** N

    def to_vec(v):
        return GF2Vector(tuple((v >> (N - 1 - i)) & 1 for i in range(N)))

    def to_int(vec):
        out = 0
        for b in vec:
            out = (out << 1) | b
        return out

    deps = {k: tuple(net.transmitters_into(k)) for k in net.nodes}
    return _law_from_function(
        {j: size for j in net.nodes}, deps,
        lambda k, x: to_int(channel_output(net, {j: to_vec(v) for j, v in x.items()}, k)),
        {k: size for k in net.nodes})


# ---------------------------------------------------------------------------
# Class conditions


@dataclass
class ClassReport:
    model: str
    conditions: dict[str, bool]
    witnesses: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(self.conditions.values())


def _inverse_table(law: TableLaw, k: int, target: int, given: Sequence[int]):
    """Table recovering ``X_target`` from (given inputs, Y_k), or None.

    Inputs that do not enter ``Y_k`` but are listed in ``given`` simply index
    the table; ``target`` must be the only free input of ``Y_k``.
    """
    deps, table = law.outputs[k]
    free = [j for j in deps if j != target and j not in given]
    if free:
        return None
    inv = {}
    for combo in itertools.product(*(range(law.in_sizes[j]) for j in given)):
        fixed = dict(zip(given, combo))
        seen = {}
        for xt in range(law.in_sizes[target]):
            x = dict(fixed)
            x[target] = xt
            y = law.output(k, x)
            if y in seen:
                return None
            seen[y] = xt
        for y, xt in seen.items():
            inv[combo + (y,)] = xt
    return inv


def _is_uniform(law: TableLaw, k: int, pinned: Mapping[int, int], free: Sequence[int]) -> bool:
    counts: dict[int, int] = {}
    for combo in itertools.product(*(range(law.in_sizes[j]) for j in free)):
        x = dict(pinned)
        x.update(zip(free, combo))
        y = law.output(k, x)
        counts[y] = counts.get(y, 0) + 1
    size = law.out_sizes[k]
    return len(counts) == size and len(set(counts.values())) == 1


def _is_bijective(law: TableLaw, k: int, pinned: Mapping[int, int], free: int) -> bool:
    ys = set()
    for v in range(law.in_sizes[free]):
        x = dict(pinned)
        x[free] = v
        ys.add(law.output(k, x))
    return len(ys) == law.in_sizes[free] == law.out_sizes[k]


def check_class_conditions(law: TableLaw, model: str) -> ClassReport:
    """Check the sufficient conditions under which time-sharing is optimal.

    For ``model="macbc"`` the law must define Y1(X1, X2), Y2(X1, X2, X3)
    and Y3(X2, X3); the report carries P1, P2, P3.  For ``model="ic"`` it
    must define Y1 = Y3 = F(X2, X4) and Y2 = Y4 = F(X1, X3); the report
    carries P1IC, P2IC, P3IC plus a ``common_output`` structural flag.
    The conditions are sufficient only, so a False entry is not a claim
    that adaptation helps.
    """
    sizes = set(law.in_sizes.values()) | set(law.out_sizes.values())
    if max(sizes) > MAX_CLASS_KAPPA:
        raise ValueError(f"alphabets above {MAX_CLASS_KAPPA} are not supported")
    p1 = len(sizes) == 1
    kappa = next(iter(sizes)) if p1 else None
    witnesses: dict = {}

    if model == "macbc":
        needed = {1: (1, 2), 2: (1, 2, 3), 3: (2, 3)}
        for k in needed:
            if k not in law.outputs:
                raise ValueError(f"macbc law needs an output table for Y{k}")
        inverses = {
            "G1": _inverse_table(law, 1, 2, [1]),
            "G21": _inverse_table(law, 2, 1, [2, 3]),
            "G23": _inverse_table(law, 2, 3, [1, 2]),
            "G3": _inverse_table(law, 3, 2, [3]),
        }
        p2 = all(v is not None for v in inverses.values())
        if p2:
            witnesses["inverses"] = inverses
        x3_star = next((v for v in range(law.in_sizes[3])
                        if _is_uniform(law, 1, {3: v}, [1, 2])
                        and _is_uniform(law, 2, {3: v}, [1, 2])), None)
        x1_star = next((v for v in range(law.in_sizes[1])
                        if _is_uniform(law, 2, {1: v}, [2, 3])
                        and _is_uniform(law, 3, {1: v}, [2, 3])), None)
        p3 = x1_star is not None and x3_star is not None
        if p3:
            witnesses.update(x1_star=x1_star, x3_star=x3_star)
        conds = {"P1": p1, "P2": p2, "P3": p3}
    elif model == "ic":
        for k in (1, 2, 3, 4):
            if k not in law.outputs:
                raise ValueError(f"ic law needs an output table for Y{k}")
        common = (law.outputs[2][0] == law.outputs[4][0] == (1, 3)
                  and law.outputs[1][0] == law.outputs[3][0] == (2, 4)
                  and np.array_equal(law.outputs[2][1], law.outputs[4][1])
                  and np.array_equal(law.outputs[1][1], law.outputs[3][1]))
        inverses = {
            "G2": _inverse_table(law, 2, 3, [1]),
            "G1": _inverse_table(law, 1, 4, [2]),
            "G3": _inverse_table(law, 3, 2, [4]),
            "G4": _inverse_table(law, 4, 1, [3]),
        }
        p2 = all(v is not None for v in inverses.values())
        if p2:
            witnesses["inverses"] = inverses

        def pin(k, pinned_node, free_node):
            return next((v for v in range(law.in_sizes[pinned_node])
                         if _is_bijective(law, k, {pinned_node: v}, free_node)), None)

        stars = {"x3_star": pin(2, 3, 1), "x1_star": pin(2, 1, 3),
                 "x4_star": pin(1, 4, 2), "x2_star": pin(1, 2, 4)}
        p3 = all(v is not None for v in stars.values())
        if p3:
            witnesses.update(stars)
        conds = {"P1IC": p1, "P2IC": p2, "P3IC": p3, "common_output": common}
    else:
        raise ValueError(f"class conditions are defined for macbc and ic, not {model!r}")
    if kappa is not None:
        witnesses["kappa"] = kappa
    return ClassReport(model, conds, witnesses)


def adder_mac_law() -> TableLaw:
    """Binary (non-modulo) adder MAC/BC: Y2 = X1 + X3 is ternary."""
    in_sizes = {1: 2, 2: 2, 3: 2}
    deps = {1: (1, 2), 2: (1, 2, 3), 3: (2, 3)}

    def fn(k, x):
        if k == 2:
            return x[1] + x[3]
        return x[2] ^ (x[1] if k == 1 else x[3])

    return _law_from_function(in_sizes, deps, fn, {1: 2, 2: 3, 3: 2})


def multiplier_macbc_law() -> TableLaw:
    """Binary multiplier MAC/BC: every output is the product of its inputs."""
    deps = TOPOLOGY_LINKS["macbc"]
    return _law_from_function(
        {1: 2, 2: 2, 3: 2}, deps,
        lambda k, x: int(np.prod([x[j] for j in deps[k]])), {1: 2, 2: 2, 3: 2})


def iter_vectors(N: int) -> Iterable[GF2Vector]:
    for bits in itertools.product((0, 1), repeat=N):
        yield GF2Vector(bits)
