"""Exhaustive zero-error code search for tiny deterministic two-way channels.

For a blocklength ``n`` and a tuple of message-set sizes, the search decides
whether some strategy in a given class (``full``, ``partial`` or
``nonadaptive``) lets every receiver recover its messages with zero error.
A strategy assigns each node, at each time, an input symbol as a function of
its own messages and (unless the node is restricted) its past outputs.

The search is a depth-first walk over (time, node, context) decisions, where a
context is a realized value of the node's local knowledge.  Two prunings keep
it small:

* message relabeling: the time-1 inputs of a node, viewed as rows indexed by
  the values of its first non-trivial message, must be lexicographically
  non-decreasing;
* counting: after time ``t`` a receiver's class of indistinguishable
  situations may hold at most ``|Y|^(n - t)`` distinct desired-message
  values, since only that many output continuations remain.  At ``t = n``
  this is exactly the zero-error condition.

Feasibility is anti-monotone in the sizes, so the lattice of size tuples is
walked in order of increasing product and tuples decided by dominance are
never searched.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gaussian_bounds import CorrCoeffs, GaussianSymParams, lambda_objective
from .ld_core import TableLaw

MODEL_MESSAGES = {
    "macbc": ("M12", "M32", "M21", "M23"),
    "z": ("M12", "M32", "M34", "M21", "M23", "M43"),
    "ic": ("M12", "M34", "M21", "M43"),
}

# nodes whose encoders ignore their outputs under partial adaptation
PARTIAL_RESTRICTED = {"macbc": (1, 3), "z": (1, 3), "ic": (1, 3)}

CLASSES = ("nonadaptive", "partial", "full")

DEFAULT_BUDGET = 10 ** 9


class BudgetExceeded(RuntimeError):
    """Raised when the candidate-evaluation budget runs out; carries what was decided."""

    def __init__(self, message, partial: "ZeroErrorRegion | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass
class ZeroErrorRegion:
    cls: str
    model: str
    n: int
    messages: tuple[str, ...]
    max_sizes: tuple[int, ...]
    feasible: frozenset
    infeasible: frozenset = frozenset()
    evaluations: int = 0
    complete: bool = True

    def contains(self, sizes: Sequence[int]) -> bool:
        return tuple(sizes) in self.feasible

    def maximal(self) -> list[tuple[int, ...]]:
        return sorted(s for s in self.feasible
                      if not any(o != s and all(a >= b for a, b in zip(o, s)) for o in self.feasible))

    def rates(self) -> list[tuple[float, ...]]:
        return [tuple(math.log2(v) / self.n for v in s) for s in sorted(self.feasible)]

    def rate_names(self) -> tuple[str, ...]:
        return tuple("R" + m[1:] for m in self.messages)

    def to_json(self) -> dict:
        return {"class": self.cls, "n": self.n, "model": self.model,
                "messages": list(self.messages), "max_sizes": list(self.max_sizes),
                "feasible": [list(s) for s in sorted(self.feasible)],
                "complete": self.complete}

    @classmethod
    def from_json(cls, obj) -> "ZeroErrorRegion":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        return cls(obj["class"], obj["model"], obj["n"], tuple(obj["messages"]),
                   tuple(obj["max_sizes"]), frozenset(tuple(s) for s in obj["feasible"]),
                   complete=obj.get("complete", True))


class _Counter:
    def __init__(self, budget):
        self.used = 0
        self.budget = budget

    def tick(self):
        self.used += 1
        if self.used > self.budget:
            raise BudgetExceeded(f"search budget of {self.budget} evaluations exhausted")


class _Search:
    """Feasibility of one size tuple for one strategy class."""

    def __init__(self, law: TableLaw, model: str, n: int, sizes: Sequence[int],
                 restricted: Iterable[int], counter: _Counter):
        self.law, self.n, self.counter = law, n, counter
        msgs = MODEL_MESSAGES[model]
        self.nodes = law.nodes
        self.restricted = set(restricted)
        tuples = list(itertools.product(*(range(s) for s in sizes)))
        self.T = len(tuples)
        src = {m: int(m[1]) for m in msgs}
        dst = {m: int(m[2]) for m in msgs}

        def code(tup, idx):
            out = 0
            for i in idx:
                out = out * sizes[i] + tup[i]
            return out

        self.own = {j: [code(tp, [i for i, m in enumerate(msgs) if src[m] == j]) for tp in tuples]
                    for j in self.nodes}
        self.receivers = [k for k in self.nodes if any(dst[m] == k for m in msgs)]
        self.desired = {k: [code(tp, [i for i, m in enumerate(msgs) if dst[m] == k]) for tp in tuples]
                        for k in self.receivers}
        # relabeling symmetry: first non-trivial message of each node
        self.first_msg = {}
        for j in self.nodes:
            own_idx = [i for i, m in enumerate(msgs) if src[m] == j]
            nontriv = [i for i in own_idx if sizes[i] > 1]
            if nontriv:
                i0 = nontriv[0]
                rest = 1
                for i in own_idx:
                    if own_idx.index(i) > own_idx.index(i0):
                        rest *= sizes[i]
                pre = 1
                for i in own_idx:
                    if own_idx.index(i) < own_idx.index(i0):
                        pre *= sizes[i]
                self.first_msg[j] = (sizes[i0], rest, pre)
        self.xsize = {j: law.in_sizes[j] for j in self.nodes}
        self.ysize = {k: law.out_sizes[k] for k in self.receivers}
        self.tables = {}
        for k in self.receivers:
            deps, table = law.outputs[k]
            strides = []
            acc = 1
            for d in reversed(deps):
                strides.append(acc)
                acc *= law.in_sizes[d]
            self.tables[k] = (deps, list(reversed(strides)), table.ravel().tolist())
        order = {j: i for i, j in enumerate(self.nodes)}
        self.last_dep = {k: max(self.tables[k][0], key=lambda d: order[d]) for k in self.receivers}

    def initial_ok(self) -> bool:
        for k in self.receivers:
            bound = self.ysize[k] ** self.n
            classes: dict = {}
            for tau in range(self.T):
                classes.setdefault(self.own[k][tau], set()).add(self.desired[k][tau])
            if any(len(v) > bound for v in classes.values()):
                return False
        return True

    def run(self) -> bool:
        if not self.initial_ok():
            return False
        hist = {j: [0] * self.T for j in self.nodes}
        return self._time(0, hist)

    def _time(self, t, hist) -> bool:
        if t == self.n:
            return True
        slots, members = [], {}
        ctx_of = {}
        for j in self.nodes:
            if j in self.restricted:
                keys = [self.own[j][tau] for tau in range(self.T)]
            else:
                keys = [(self.own[j][tau], hist[j][tau]) for tau in range(self.T)]
            mem: dict = {}
            for tau, key in enumerate(keys):
                mem.setdefault(key, []).append(tau)
            ctxs = sorted(mem)
            ctx_of[j] = ctxs
            for c in ctxs:
                slots.append((j, c))
                members[(j, c)] = mem[c]
        x = {j: [None] * self.T for j in self.nodes}
        y = {k: [None] * self.T for k in self.receivers}
        bound = {k: self.ysize[k] ** (self.n - t - 1) for k in self.receivers}
        classes = {k: {} for k in self.receivers}
        watchers: dict[int, list[int]] = {}
        for k in self.receivers:
            watchers.setdefault(self.last_dep[k], []).append(k)
        node_slot_index: dict = {}
        for i, (j, c) in enumerate(slots):
            node_slot_index.setdefault(j, []).append(i)

        def row_ok(j, c, t0):
            # lexicographic rows over the first non-trivial message, at time 0
            if t0 != 0 or j not in self.first_msg:
                return True
            size0, rest, pre = self.first_msg[j]
            own_val = c if j in self.restricted else c[0]
            # own code = ((pre_part * size0) + v) * rest + r
            r = own_val % rest
            v = (own_val // rest) % size0
            p = own_val // (rest * size0)
            if r != rest - 1 or v == 0:
                return True
            def key(vv, rr):
                oc = (p * size0 + vv) * rest + rr
                return oc if j in self.restricted else (oc, 0)
            row_now = [x[j][members[(j, key(v, rr))][0]] for rr in range(rest)]
            row_prev = [x[j][members[(j, key(v - 1, rr))][0]] for rr in range(rest)]
            return row_prev <= row_now

        def assign(i) -> bool:
            if i == len(slots):
                new_hist = {}
                for j in self.nodes:
                    if j in self.ysize:
                        ys = self.ysize[j]
                        new_hist[j] = [hist[j][tau] * ys + y[j][tau] for tau in range(self.T)]
                    else:
                        new_hist[j] = hist[j]
                return self._time(t + 1, new_hist)
            j, c = slots[i]
            mem = members[(j, c)]
            for sym in range(self.xsize[j]):
                self.counter.tick()
                for tau in mem:
                    x[j][tau] = sym
                if not row_ok(j, c, t):
                    continue
                touched = []
                ok = True
                for k in watchers.get(j, ()):
                    deps, strides, flat = self.tables[k]
                    cls_k = classes[k]
                    own_k, des_k, hist_k, yk = self.own[k], self.desired[k], hist[k], y[k]
                    ys = self.ysize[k]
                    for tau in mem:
                        idx = 0
                        for d, s in zip(deps, strides):
                            idx += x[d][tau] * s
                        out = flat[idx]
                        yk[tau] = out
                        ck = (own_k[tau], hist_k[tau] * ys + out)
                        bucket = cls_k.get(ck)
                        if bucket is None:
                            bucket = cls_k[ck] = {}
                        dv = des_k[tau]
                        bucket[dv] = bucket.get(dv, 0) + 1
                        touched.append((k, ck, dv))
                        if len(bucket) > bound[k]:
                            ok = False
                    if not ok:
                        break
                if ok and assign(i + 1):
                    return True
                for k, ck, dv in touched:
                    bucket = classes[k][ck]
                    bucket[dv] -= 1
                    if bucket[dv] == 0:
                        del bucket[dv]
            for tau in mem:
                x[j][tau] = None
            return False

        return assign(0)


def restricted_nodes(model: str, cls: str, nodes: Sequence[int]) -> tuple[int, ...]:
    if cls == "full":
        return ()
    if cls == "partial":
        return PARTIAL_RESTRICTED[model]
    if cls == "nonadaptive":
        return tuple(nodes)
    raise ValueError(f"unknown strategy class {cls!r}")


def size_feasible(law: TableLaw, model: str, n: int, sizes: Sequence[int], cls: str,
                  budget: int = DEFAULT_BUDGET) -> tuple[bool, int]:
    """Decide a single size tuple; returns ``(feasible, evaluations used)``."""
    counter = _Counter(budget)
    s = _Search(law, model, n, tuple(sizes), restricted_nodes(model, cls, law.nodes), counter)
    return s.run(), counter.used


def _check_inputs(law: TableLaw, model: str, n: int, max_sizes):
    if model not in MODEL_MESSAGES:
        raise ValueError(f"unknown model {model!r}")
    msgs = MODEL_MESSAGES[model]
    if isinstance(max_sizes, int):
        max_sizes = (max_sizes,) * len(msgs)
    max_sizes = tuple(int(s) for s in max_sizes)
    if len(max_sizes) != len(msgs):
        raise ValueError(f"{model} has {len(msgs)} messages, got {len(max_sizes)} sizes")
    if any(s < 1 or s > 4 for s in max_sizes):
        raise ValueError("message sizes must lie in 1..4")
    if n < 1:
        raise ValueError("blocklength must be positive")
    if max(law.in_sizes.values()) > 3 or max(law.out_sizes.values()) > 3:
        raise ValueError("only binary or ternary alphabets are supported")
    needed = {int(m[1]) for m in msgs} | {int(m[2]) for m in msgs}
    if not needed <= set(law.nodes) or not needed <= set(law.outputs):
        raise ValueError(f"law must define inputs and outputs for nodes {sorted(needed)}")
    return msgs, max_sizes


def _decide(args):
    law_json, model, n, sizes, cls, budget = args
    law = TableLaw.from_json(law_json)
    return size_feasible(law, model, n, sizes, cls, budget)


def enumerate_zero_error(law: TableLaw, model: str, n: int, max_sizes, cls: str = "full",
                         budget: int = DEFAULT_BUDGET, known_feasible: Iterable = (),
                         known_infeasible: Iterable = (), jobs: int = 1) -> ZeroErrorRegion:
    """Exact set of zero-error-feasible message-size tuples up to ``max_sizes``.

    ``known_feasible`` / ``known_infeasible`` seed the lattice with tuples
    decided elsewhere (e.g. feasibility in a smaller strategy class).  With
    ``jobs > 1`` the tuples of equal size product, which are pairwise
    incomparable, are decided in parallel; the result does not depend on it.
    """
    msgs, max_sizes = _check_inputs(law, model, n, max_sizes)
    restricted_nodes(model, cls, law.nodes)
    feas = set(map(tuple, known_feasible))
    infeas = set(map(tuple, known_infeasible))
    feas = {s for s in feas if all(a <= b for a, b in zip(s, max_sizes))}
    feas.add((1,) * len(msgs))
    used = 0
    levels: dict[int, list] = {}
    for s in itertools.product(*(range(1, m + 1) for m in max_sizes)):
        levels.setdefault(math.prod(s), []).append(s)

    def dominated(s):
        return any(all(a <= b for a, b in zip(s, f)) for f in feas)

    def dominates(s):
        return any(all(a >= b for a, b in zip(s, f)) for f in infeas)

    law_json = law.to_json()
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for prod in sorted(levels):
            todo = [s for s in levels[prod] if not dominated(s) and not dominates(s)]
            if not todo:
                for s in levels[prod]:
                    if dominated(s):
                        feas.add(s)
                continue
            remaining = budget - used
            if pool is not None:
                results = list(pool.map(_decide, [(law_json, model, n, s, cls, remaining)
                                                  for s in todo]))
            else:
                results = []
                for s in todo:
                    try:
                        results.append(size_feasible(law, model, n, s, cls, remaining))
                    except BudgetExceeded:
                        partial = ZeroErrorRegion(cls, model, n, msgs, max_sizes,
                                                  frozenset(feas), frozenset(infeas), budget, False)
                        raise BudgetExceeded(f"search budget of {budget} evaluations exhausted "
                                             f"while deciding sizes {s}", partial) from None
                    remaining -= results[-1][1]
            for s, (ok, cost) in zip(todo, results):
                used += cost
                (feas if ok else infeas).add(s)
            for s in levels[prod]:
                if dominated(s):
                    feas.add(s)
            if used > budget:
                partial = ZeroErrorRegion(cls, model, n, msgs, max_sizes,
                                          frozenset(feas), frozenset(infeas), used, False)
                raise BudgetExceeded(f"search budget of {budget} evaluations exhausted", partial)
    except BudgetExceeded as e:
        if e.partial is None:
            e.partial = ZeroErrorRegion(cls, model, n, msgs, max_sizes,
                                        frozenset(feas), frozenset(infeas), used, False)
        raise
    finally:
        if pool is not None:
            pool.shutdown()
    all_feas = frozenset(s for s in itertools.product(*(range(1, m + 1) for m in max_sizes))
                         if dominated(s))
    return ZeroErrorRegion(cls, model, n, msgs, max_sizes, all_feas, frozenset(infeas), used)


@dataclass
class ClassComparison:
    nonadaptive: ZeroErrorRegion
    partial: ZeroErrorRegion
    full: ZeroErrorRegion

    @property
    def equal(self) -> tuple[bool, bool, bool]:
        """(nonadaptive == partial, partial == full, nonadaptive == full)."""
        na, pa, fu = self.nonadaptive.feasible, self.partial.feasible, self.full.feasible
        return na == pa, pa == fu, na == fu

    @property
    def counterexamples(self) -> dict[str, list]:
        return {"full_not_nonadaptive": sorted(self.full.feasible - self.nonadaptive.feasible),
                "partial_not_nonadaptive": sorted(self.partial.feasible - self.nonadaptive.feasible),
                "full_not_partial": sorted(self.full.feasible - self.partial.feasible)}

    @property
    def nested(self) -> bool:
        return (self.nonadaptive.feasible <= self.partial.feasible <= self.full.feasible)

    def to_json(self) -> dict:
        return {"nonadaptive": self.nonadaptive.to_json(), "partial": self.partial.to_json(),
                "full": self.full.to_json(), "equal": list(self.equal),
                "counterexamples": {k: [list(s) for s in v] for k, v in self.counterexamples.items()}}


def compare_classes(law: TableLaw, model: str, n: int, max_sizes,
                    budget: int = DEFAULT_BUDGET, jobs: int = 1) -> ClassComparison:
    """Run all three classes; smaller classes seed the larger ones (they nest by construction)."""
    na = enumerate_zero_error(law, model, n, max_sizes, "nonadaptive", budget, jobs=jobs)
    pa = enumerate_zero_error(law, model, n, max_sizes, "partial", budget,
                              known_feasible=na.feasible, jobs=jobs)
    fu = enumerate_zero_error(law, model, n, max_sizes, "full", budget,
                              known_feasible=pa.feasible, jobs=jobs)
    return ClassComparison(na, pa, fu)


def law_hash(law: TableLaw, *extra) -> str:
    blob = json.dumps([law.to_json(), *extra], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def grid_search_lambda(p: GaussianSymParams, resolution: float = 1e-3,
                       n_theta: int = 720) -> CorrCoeffs:
    """Brute-force maximizer of the backward-direction correlation objective.

    ``|lambda|`` runs over ``[0, 1]`` in steps of ``resolution`` and ``theta``
    over ``n_theta`` equispaced angles in ``[0, 2 pi)`` (0 included).
    """
    if p.inr == 0:
        return CorrCoeffs(0.0, 0.0, undefined=True)
    mags = np.linspace(0.0, 1.0, int(round(1 / resolution)) + 1)
    thetas = np.arange(n_theta) * (2 * np.pi / n_theta)
    vals = lambda_objective(p, mags[:, None], thetas[None, :])
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return CorrCoeffs(float(mags[i]), float(thetas[j]))
