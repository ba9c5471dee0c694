"""Site weights, coloring cycles, and the cocycle invariants they induce.

Every crossing and vertex of a colored diagram contributes a signed
degree-2 generator read off the pinned weight region and the two
operation arguments at the site; the sum over all sites is a cycle of
the prismatic complex.  Evaluating a degree-2 cochain on that cycle,
coloring by coloring, gives a multiset of values that only depends on
the underlying handlebody-link.

Two evaluation engines share the contract.  The streaming engine walks
``enumerate_colorings`` and scores one chain at a time; it works for
any carrier.  The linear engine rides the same group-layer batches as
the fast coloring count: per group coloring the module solutions are
the kernel of a small linear system, enumerated prime by prime and
combined by CRT, and the cochain is applied through its dense tables.
"""

import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .algebra import BudgetExceeded, StructuralError
from .chain import Chain, cycle_class_map, evaluate_cochain, make_gen
from .coloring import (DEFAULT_NODE_BUDGET, _CANDIDATE_CAP,
                       _module_candidates, _squarefree_primes,
                       alexander_coloring_batches, alexander_fast_applicable,
                       enumerate_colorings, plan_search)
from .diagram import Crossing, Vertex, mirror

__all__ = [
    "InvariantResult",
    "local_weight",
    "cycle_of_coloring",
    "phi_invariant",
    "negate_values",
    "mirror_check",
    "homology_class_multiset",
]

# Per-prime candidate tables grow as p**(roots * dim); past this point
# the masks would dominate memory and the streaming engine is the
# honest answer.
_PRIME_TABLE_CAP = 2_000_000


def _region_color(coloring, region):
    rc = coloring.region_colors
    if rc is None:
        return 0
    return rc[region]


def _weight_args(site, arc_colors):
    """(sign, a, b) of the generator contributed by a crossing or vertex."""
    if isinstance(site, Crossing):
        if site.sign == 1:
            return 1, arc_colors[site.under_in], arc_colors[site.over_out]
        return -1, arc_colors[site.under_out], arc_colors[site.over_in]
    if isinstance(site, Vertex):
        sign = 1 if site.kind == "two_in_one_out" else -1
        return sign, arc_colors[site.a_leg], arc_colors[site.b_leg]
    raise StructuralError(f"not a crossing or vertex: {site!r}")


def local_weight(site, coloring):
    """Weight of one site as a chain: ±<y><a><b> or ±<y><a,b>.

    Crossings contribute a two-block generator on the two operation
    arguments of the crossing relation; vertices a one-block generator
    on the a/b legs.  ``y`` is the color of the pinned weight region
    (0 when the coloring carries no region colors).
    """
    y = _region_color(coloring, site.weight_region)
    sign, a, b = _weight_args(site, coloring.arc_colors)
    if isinstance(site, Crossing):
        gen = make_gen(y, ((a,), (b,)))
    else:
        gen = make_gen(y, ((a, b),))
    return Chain.of(gen, sign)


def cycle_of_coloring(diagram, coloring):
    """Sum of the local weights over all sites of the diagram."""
    total = Chain()
    for c in diagram.crossings:
        total += local_weight(c, coloring)
    for v in diagram.vertices:
        total += local_weight(v, coloring)
    return total


@dataclass
class InvariantResult:
    """Multiset of cochain values over all colorings, with bookkeeping."""

    values: dict
    count: int
    runtime: float
    algebra: str
    modulus: int
    engine: str

    def sorted_items(self):
        return sorted(self.values.items())

    def to_dict(self):
        return {
            "algebra": self.algebra,
            "modulus": self.modulus,
            "colorings": self.count,
            "runtime_seconds": round(self.runtime, 3),
            "engine": self.engine,
            "values": [{"value": v, "count": c}
                       for v, c in self.sorted_items()],
        }


def _check_compatible(mcb, xset, theta):
    if theta.degree != 2:
        raise StructuralError("the invariant needs a degree-2 cochain")
    tm = theta.mcb
    if tm is not mcb and not (
            tm.n == mcb.n
            and np.array_equal(tm.under, mcb.under)
            and np.array_equal(tm.over, mcb.over)
            and np.array_equal(tm.block_of, mcb.block_of)):
        raise StructuralError("cochain lives on a different carrier")
    tx = theta.xset
    if xset is None:
        if tx.m != 1:
            raise StructuralError("cochain expects a nontrivial X-set")
    elif tx is not xset and not (tx.m == xset.m
                                 and np.array_equal(tx.act, xset.act)):
        raise StructuralError("cochain lives over a different X-set")


def negate_values(values, modulus):
    """The multiset of negated values; negation is injective, no merging."""
    if modulus:
        return {(-v) % modulus: c for v, c in values.items()}
    return {-v: c for v, c in values.items()}


def _tally(values, arr, modulus):
    if not len(arr):
        return
    if modulus:
        arr = arr % modulus
    uq, cnt = np.unique(arr, return_counts=True)
    for v, c in zip(uq.tolist(), cnt.tolist()):
        values[int(v)] += int(c)


def _stream_values(diagram, mcb, xset, theta, budget):
    values = Counter()
    for coloring in enumerate_colorings(diagram, mcb, xset=xset,
                                        budget=budget):
        val = evaluate_cochain(theta, cycle_of_coloring(diagram, coloring))
        if theta.modulus:
            val %= theta.modulus
        values[int(val)] += 1
    return values


def _crt_combine(sets, primes, m):
    """All vectors mod m matching one vector from each per-prime set."""
    out = sets[0] % primes[0]
    mod = primes[0]
    for vecs, p in zip(sets[1:], primes[1:]):
        e_old = p * pow(p, -1, mod)
        e_new = mod * pow(mod, -1, p)
        mod *= p
        out = (e_old * out[:, None, :] + e_new * vecs[None, :, :]) % mod
        out = out.reshape(-1, out.shape[2])
    return out % m


def _site_slots(diagram, plan, theta):
    """Crossing and vertex (sign, a, b) arc-index triples, table-pruned."""
    crossings = []
    if theta.tables.get((1, 1)) is not None:
        for c in diagram.crossings:
            if c.sign == 1:
                slots = (1, plan.index[c.under_in], plan.index[c.over_out])
            else:
                slots = (-1, plan.index[c.under_out], plan.index[c.over_in])
            crossings.append(slots)
    vertices = []
    if theta.tables.get((2,)) is not None:
        for v in diagram.vertices:
            sign = 1 if v.kind == "two_in_one_out" else -1
            vertices.append((sign, plan.index[v.a_leg], plan.index[v.b_leg]))
    return crossings, vertices


def _linear_values(diagram, mcb, theta, budget, plan):
    """Histogram of cochain values through the group-layer batches."""
    alex = mcb.family.alexander
    module, G = alex.module, alex.group
    m = module.m
    rd = len(plan.roots) * module.dim
    modulus = theta.modulus
    tab11 = theta.tables.get((1, 1))
    tab2 = theta.tables.get((2,))
    crossings, vertices = _site_slots(diagram, plan, theta)
    arcs = sorted({i for _, a, b in crossings + vertices for i in (a, b)})
    ai = {arc: j for j, arc in enumerate(arcs)}

    primes = _squarefree_primes(m)
    if primes is None:
        primes, tables = [m], [_module_candidates(m, rd)]
    else:
        for p in primes:
            if p ** rd > _PRIME_TABLE_CAP:
                raise BudgetExceeded(
                    f"{p ** rd} candidate root vectors mod {p} exceed the "
                    f"linear engine cap {_PRIME_TABLE_CAP}")
        tables = [_module_candidates(p, rd) for p in primes]

    values = Counter()
    for gcols, xm, K in alexander_coloring_batches(diagram, mcb,
                                                   budget=budget, plan=plan):
        B = len(gcols)
        if not arcs:
            # every site scores zero; only the kernel sizes matter
            total = 0
            masks = _kernel_masks(K, primes, tables)
            sizes = np.ones(B, dtype=np.int64)
            for mask in masks:
                sizes *= mask.sum(axis=1)
            values[0] += int(sizes.sum())
            continue
        masks = _kernel_masks(K, primes, tables)
        xm_need = xm[:, arcs]
        gcodes = gcols[:, arcs].astype(np.int64)
        batch_vals = []
        for b in range(B):
            sets = [tab[mask[b]] for tab, mask in zip(tables, masks)]
            if any(not len(s) for s in sets):
                continue
            U = sets[0] if len(sets) == 1 else _crt_combine(sets, primes, m)
            X = np.einsum("uk,akd->uad", U, xm_need[b]) % m
            codes = module.encode(X) * G.n + gcodes[b][None, :]
            vals = np.zeros(len(U), dtype=np.int64)
            for sign, a, bb in crossings:
                vals += sign * tab11[0, codes[:, ai[a]], codes[:, ai[bb]]]
            for sign, a, bb in vertices:
                vals += sign * tab2[0, codes[:, ai[a]], codes[:, ai[bb]]]
            batch_vals.append(vals)
        if batch_vals:
            _tally(values, np.concatenate(batch_vals), modulus)
    return values


def _kernel_masks(K, primes, tables):
    """Per-prime boolean masks of candidate vectors killing each K row."""
    masks = []
    for p, cand in zip(primes, tables):
        B, rd, C = K.shape
        if C == 0:
            masks.append(np.ones((B, len(cand)), dtype=bool))
            continue
        mask = np.empty((B, len(cand)), dtype=bool)
        step = max(1, 4_000_000 // (len(cand) * C))
        Kp = K % p
        for lo in range(0, B, step):
            z = np.einsum("uk,bkc->buc", cand, Kp[lo:lo + step]) % p
            mask[lo:lo + step] = (z == 0).all(axis=2)
        masks.append(mask)
    return masks


def _linear_applicable(diagram, mcb, xset, theta):
    if not alexander_fast_applicable(mcb, xset):
        return None
    if theta.xset.m != 1:
        return None
    plan = plan_search(diagram)
    alex = mcb.family.alexander
    m = alex.module.m
    rd = len(plan.roots) * alex.module.dim
    if _squarefree_primes(m) is None and m ** rd > _CANDIDATE_CAP:
        return None
    return plan


def phi_invariant(diagram, mcb, xset, theta, budget=DEFAULT_NODE_BUDGET,
                  engine="auto", algebra_id=None):
    """Multiset of cochain values over all colorings of the diagram.

    ``engine`` selects the evaluation path: "stream" walks colorings one
    by one, "fast" requires the Alexander linear path, "auto" picks the
    linear path whenever it applies.  Either way the multiset and its
    ordering metadata are identical.
    """
    _check_compatible(mcb, xset, theta)
    if engine not in ("auto", "fast", "stream"):
        raise StructuralError(f"unknown engine {engine!r}")
    t0 = time.perf_counter()
    plan = None
    if engine in ("auto", "fast"):
        plan = _linear_applicable(diagram, mcb, xset, theta)
        if plan is None and engine == "fast":
            raise StructuralError(
                "the linear engine needs an Alexander-type carrier, a "
                "trivial X-set, and a workable module")
    if plan is not None:
        values = _linear_values(diagram, mcb, theta, budget, plan)
        used = "fast"
    else:
        values = _stream_values(diagram, mcb, xset, theta, budget)
        used = "stream"
    count = sum(values.values())
    name = algebra_id or getattr(mcb, "name", None) or f"mcb-n{mcb.n}"
    return InvariantResult(values=dict(values), count=count,
                           runtime=time.perf_counter() - t0, algebra=name,
                           modulus=theta.modulus, engine=used)


def mirror_check(diagram, mcb, xset, theta, budget=DEFAULT_NODE_BUDGET,
                 engine="auto"):
    """Does the mirrored, reversed diagram score the negated multiset?"""
    base = phi_invariant(diagram, mcb, xset, theta, budget=budget,
                         engine=engine)
    flipped = phi_invariant(mirror(diagram), mcb, xset, theta, budget=budget,
                            engine=engine)
    return flipped.values == negate_values(base.values, theta.modulus)


def homology_class_multiset(diagram, mcb, xset, budget=DEFAULT_NODE_BUDGET,
                            cap=None, degree_cap=None):
    """Multiset of homology classes of the coloring cycles.

    Classes are canonical coordinate tuples in the Smith form of the
    degree-2 quotient; the zero class is the empty-support tuple.  Only
    feasible for small carriers; the generator caps guard the rest.
    """
    index, quotient = cycle_class_map(mcb, xset, 2, cap=cap,
                                      degree_cap=degree_cap)
    classes = Counter()
    for coloring in enumerate_colorings(diagram, mcb, xset=xset,
                                        budget=budget):
        w = cycle_of_coloring(diagram, coloring)
        vec = np.zeros(len(index), dtype=object)
        for gen, coeff in w.items():
            vec[index[gen]] += coeff
        classes[quotient.class_of(vec)] += 1
    return dict(classes)
