"""The prismatic chain complex of an MCB with an X-set.

Degree-n generators are tuples ``(y, blocks)`` where ``blocks`` is a
tuple of nonempty tuples of carrier elements, each inner tuple lying in
a single group block, with total length n.  A ``Chain`` is a finite
integer combination of generators.

The degenerate subcomplex is spanned by the differences between a
two-block generator and its shuffle expansion; homology is taken in the
quotient complex.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import intlinalg as il
from .algebra import BudgetExceeded, StructuralError, env_cap

__all__ = [
    "Chain",
    "make_gen",
    "gen_degree",
    "gen_str",
    "compositions",
    "count_prism_generators",
    "prism_generators",
    "boundary_at_block",
    "boundary_gen",
    "boundary",
    "shuffle_chain",
    "degenerate_generators",
    "verify_dd_zero",
    "verify_subcomplex",
    "HomologyResult",
    "homology",
    "cycle_class_map",
    "evaluate_cochain",
    "chain_to_dict",
    "chain_from_dict",
]

DEFAULT_GEN_CAP = 200_000
DEFAULT_DEGREE_CAP = 3


def make_gen(y, blocks):
    """Canonical generator tuple; blocks become nested tuples of ints."""
    return (None if y is None else int(y),
            tuple(tuple(int(e) for e in blk) for blk in blocks))


def gen_degree(gen):
    return sum(len(blk) for blk in gen[1])


def gen_str(gen, names=None):
    y, blocks = gen
    label = (lambda e: names[e]) if names is not None else str
    inner = "".join("<" + ",".join(label(e) for e in blk) + ">" for blk in blocks)
    return f"<{'.' if y is None else y}>" + inner


def _sort_key(gen):
    y, blocks = gen
    return (-1 if y is None else y, blocks)


class Chain:
    """Finite integer combination of prismatic generators."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for gen, coeff in terms.items():
                if coeff:
                    self.terms[gen] = int(coeff)

    @classmethod
    def of(cls, gen, coeff=1):
        return cls({gen: coeff})

    def is_zero(self):
        return not self.terms

    def add_term(self, gen, coeff):
        if not coeff:
            return
        new = self.terms.get(gen, 0) + coeff
        if new:
            self.terms[gen] = new
        else:
            del self.terms[gen]

    def __add__(self, other):
        out = Chain(self.terms)
        for gen, coeff in other.terms.items():
            out.add_term(gen, coeff)
        return out

    def __sub__(self, other):
        out = Chain(self.terms)
        for gen, coeff in other.terms.items():
            out.add_term(gen, -coeff)
        return out

    def __neg__(self):
        return Chain({g: -c for g, c in self.terms.items()})

    def scale(self, k):
        return Chain({g: k * c for g, c in self.terms.items()}) if k else Chain()

    def __eq__(self, other):
        return isinstance(other, Chain) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("chains are mutable accumulators, not hashable")

    def items(self):
        return self.terms.items()

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0]))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for gen, coeff in self.sorted_terms():
            mag = "" if abs(coeff) == 1 else f"{abs(coeff)}*"
            parts.append(("-" if coeff < 0 else "+") + mag + gen_str(gen))
        s = " ".join(parts)
        return s[1:] if s.startswith("+") else s


def compositions(n):
    """Ordered compositions of n into positive parts, deterministic order."""
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            out.append((first,) + rest)
    return out


def count_prism_generators(mcb, xset, n):
    sizes = [g.n for g in mcb.groups]
    total = 0
    for comp in compositions(n):
        prod = 1
        for part in comp:
            prod *= sum(s ** part for s in sizes)
        total += prod
    return xset.m * total


def prism_generators(mcb, xset, n, cap=None):
    """All degree-n generators in deterministic order."""
    if cap is None:
        cap = env_cap("MCBHOM_MAX_GENERATORS", DEFAULT_GEN_CAP)
    count = count_prism_generators(mcb, xset, n)
    if count > cap:
        raise BudgetExceeded(
            f"{count} generators at degree {n} exceed the cap {cap}")
    gens = []
    block_choices = {}
    for part in set(c for comp in compositions(n) for c in comp):
        choices = []
        for lam in range(mcb.nblocks):
            members = [int(v) for v in mcb.carrier_of[lam]]
            choices.extend(itertools.product(members, repeat=part))
        block_choices[part] = choices
    for y in range(xset.m):
        for comp in compositions(n):
            for blocks in itertools.product(*(block_choices[p] for p in comp)):
                gens.append((y, blocks))
    return gens


def boundary_at_block(mcb, xset, gen, i, drop_empty=True):
    """The unsigned local boundary at block ``i`` (tilde + hat parts).

    With ``drop_empty=False`` empty brackets are kept in place, which is
    the bookkeeping under which local boundaries at different blocks
    commute.
    """
    y, blocks = gen
    blk = blocks[i]
    out = Chain()

    x1 = blk[0]
    ny = None if y is None else int(xset.act[y, x1])
    newblocks = []
    for j, other in enumerate(blocks):
        if j < i:
            newblocks.append(tuple(int(mcb.under[e, x1]) for e in other))
        elif j > i:
            newblocks.append(tuple(int(mcb.over[e, x1]) for e in other))
        else:
            inv = mcb.inv(x1) if len(blk) > 1 else None
            rep = tuple(int(mcb.over[mcb.mul(inv, e), x1]) for e in blk[1:])
            if rep or not drop_empty:
                newblocks.append(rep)
    out.add_term((ny, tuple(newblocks)), 1)

    for j in range(len(blk)):
        nb = blk[:j] + blk[j + 1:]
        keep = (nb,) if (nb or not drop_empty) else ()
        nbl = blocks[:i] + keep + blocks[i + 1:]
        out.add_term((y, nbl), -1 if (j + 1) % 2 else 1)
    return out


def boundary_gen(mcb, xset, gen):
    """Boundary of a single generator, as a Chain of degree n-1."""
    y, blocks = gen
    out = Chain()
    prefix = 0
    for i, blk in enumerate(blocks):
        sign = -1 if prefix % 2 else 1
        local = boundary_at_block(mcb, xset, gen, i)
        for g, c in local.items():
            out.add_term(g, sign * c)
        prefix += len(blk)
    return out


def boundary(mcb, xset, chain):
    """Linear extension of the boundary; accepts a Chain or one generator."""
    if not isinstance(chain, Chain):
        chain = Chain.of(make_gen(*chain))
    out = Chain()
    for gen, coeff in chain.items():
        for g, c in boundary_gen(mcb, xset, gen).items():
            out.add_term(g, coeff * c)
    return out


def shuffle_chain(mcb, a_block, b_block):
    """The shuffle product of two same-group blocks, as y-less generators.

    Entry j of a term is a_{f(j)} * b_{j-f(j)} where f counts how many of
    the chosen a-positions lie at or before j, with a_0 = b_0 = e.
    """
    a_block = tuple(int(e) for e in a_block)
    b_block = tuple(int(e) for e in b_block)
    lams = {int(mcb.block_of[e]) for e in a_block + b_block}
    if len(lams) != 1:
        raise StructuralError("shuffle blocks must lie in a single group")
    lam = lams.pop()
    e_lam = int(mcb.e_of_block[lam])
    s, t = len(a_block), len(b_block)
    out = Chain()
    for mu in itertools.combinations(range(1, s + t + 1), s):
        sign = -1 if (sum(mu) - s * (s + 1) // 2) % 2 else 1
        word = []
        for j in range(1, s + t + 1):
            fj = sum(1 for k in mu if k <= j)
            ai = a_block[fj - 1] if fj >= 1 else e_lam
            bi = b_block[j - fj - 1] if j - fj >= 1 else e_lam
            word.append(mcb.mul(ai, bi))
        out.add_term((None, (tuple(word),)), sign)
    return out


def degenerate_generators(mcb, xset, n, cap=None):
    """Stream of the degenerate-subcomplex generators in degree n.

    Each is (generator with an adjacent same-group block pair) minus the
    same generator with that pair replaced by its shuffle expansion.
    Degrees 0 and 1 yield nothing.
    """
    if cap is None:
        cap = env_cap("MCBHOM_MAX_GENERATORS", DEFAULT_GEN_CAP)
    if n <= 1:
        return
    produced = 0
    for gen in prism_generators(mcb, xset, n, cap=cap):
        y, blocks = gen
        for i in range(len(blocks) - 1):
            a_blk, b_blk = blocks[i], blocks[i + 1]
            if mcb.block_of[a_blk[0]] != mcb.block_of[b_blk[0]]:
                continue
            rel = Chain.of(gen)
            for (merged_gen, coeff) in shuffle_chain(mcb, a_blk, b_blk).items():
                merged = blocks[:i] + merged_gen[1] + blocks[i + 2:]
                rel.add_term((y, merged), -coeff)
            produced += 1
            if produced > cap:
                raise BudgetExceeded(
                    f"degenerate generators at degree {n} exceed the cap {cap}")
            yield rel


def verify_dd_zero(mcb, xset, n, cap=None):
    """Does the boundary square to zero on every degree-n generator?"""
    for gen in prism_generators(mcb, xset, n, cap=cap):
        if not boundary(mcb, xset, boundary_gen(mcb, xset, gen)).is_zero():
            return False
    return True


def _chain_vector(chain, index, ambient):
    v = [0] * ambient
    for gen, coeff in chain.items():
        try:
            v[index[gen]] = coeff
        except KeyError:
            raise StructuralError(f"chain leaves the generator basis at {gen_str(gen)}")
    return v


def verify_subcomplex(mcb, xset, n, cap=None):
    """Does the boundary map degree-n degenerate chains into the span below?"""
    lower = list(degenerate_generators(mcb, xset, n - 1, cap=cap))
    gens_below = prism_generators(mcb, xset, n - 1, cap=cap)
    index = {g: i for i, g in enumerate(gens_below)}
    rows = il.as_int_matrix(
        [_chain_vector(ch, index, len(gens_below)) for ch in lower],
        cols=len(gens_below))
    lattice = il.RowLattice(rows, len(gens_below))
    for rel in degenerate_generators(mcb, xset, n, cap=cap):
        img = boundary(mcb, xset, rel)
        vec = _chain_vector(img, index, len(gens_below))
        if not lattice.member(vec):
            return False
    return True


@dataclass
class HomologyResult:
    degree: int
    coefficients: int  # 0 for integers, m for integers mod m
    free_rank: int
    torsion: list
    gen_counts: dict = field(default_factory=dict)
    method: str = "quotient"

    def describe(self):
        mod = "Z" if self.coefficients == 0 else f"Z_{self.coefficients}"
        parts = [mod] * self.free_rank + [f"Z_{d}" for d in self.torsion]
        group = " + ".join(parts) if parts else "0"
        return f"H_{self.degree} (coefficients {mod}) = {group}"


def _boundary_matrix(mcb, xset, gens_hi, index_lo):
    rows = []
    for gen in gens_hi:
        rows.append(_chain_vector(boundary_gen(mcb, xset, gen), index_lo,
                                  len(index_lo)))
    return il.as_int_matrix(rows, cols=len(index_lo))


def _degenerate_matrix(mcb, xset, n, index, cap):
    rows = [_chain_vector(ch, index, len(index))
            for ch in degenerate_generators(mcb, xset, n, cap=cap)]
    return il.as_int_matrix(rows, cols=len(index))


def _check_caps(mcb, xset, n, cap, degree_cap):
    if n < 0:
        raise StructuralError("homology degree must be nonnegative")
    if n > degree_cap:
        raise BudgetExceeded(f"degree {n} exceeds the degree cap {degree_cap}")
    counts = {}
    for k in (n - 1, n, n + 1):
        if k < 0:
            continue
        counts[k] = count_prism_generators(mcb, xset, k)
        if counts[k] > cap:
            raise BudgetExceeded(
                f"{counts[k]} generators at degree {k} exceed the cap {cap}; "
                f"generator counts: {counts}")
    return counts


def homology(mcb, xset, n, coefficients=0, method="quotient", cap=None,
             degree_cap=None):
    """Homology of the quotient complex in degree n.

    ``coefficients`` is 0 for integer coefficients or a modulus m > 1.
    ``method`` selects the presentation: "quotient" works directly with
    the quotient by the degenerate span; "cone" runs the mapping cone of
    the inclusion of the degenerate subcomplex (integer coefficients
    only) and exists as an independent cross-check.
    """
    if cap is None:
        cap = env_cap("MCBHOM_MAX_GENERATORS", DEFAULT_GEN_CAP)
    if degree_cap is None:
        degree_cap = env_cap("MCBHOM_MAX_DEGREE", DEFAULT_DEGREE_CAP)
    if coefficients < 0 or coefficients == 1:
        raise StructuralError("coefficients must be 0 (integers) or a modulus > 1")
    counts = _check_caps(mcb, xset, n, cap, degree_cap)
    if method == "quotient":
        return _homology_quotient(mcb, xset, n, coefficients, cap, counts)
    if method == "cone":
        if coefficients != 0:
            raise StructuralError("the cone method is integer-coefficient only")
        return _homology_cone(mcb, xset, n, cap, counts)
    raise StructuralError(f"unknown homology method {method!r}")


def cycle_class_map(mcb, xset, n, cap=None, degree_cap=None):
    """Generator index plus a canonical class map for degree-n cycles.

    Returns ``(index, quotient)`` where ``index`` maps degree-n generators
    to coordinates and ``quotient.class_of`` sends an integer coordinate
    vector of a cycle to a hashable representative of its homology class
    (boundaries and the degenerate span quotiented out).
    """
    if cap is None:
        cap = env_cap("MCBHOM_MAX_GENERATORS", DEFAULT_GEN_CAP)
    if degree_cap is None:
        degree_cap = env_cap("MCBHOM_MAX_DEGREE", DEFAULT_DEGREE_CAP)
    _check_caps(mcb, xset, n, cap, degree_cap)
    gens_n = prism_generators(mcb, xset, n, cap=cap)
    idx_n = {g: i for i, g in enumerate(gens_n)}
    p_n = len(gens_n)
    if n >= 1:
        gens_lo = prism_generators(mcb, xset, n - 1, cap=cap)
        idx_lo = {g: i for i, g in enumerate(gens_lo)}
        B = _boundary_matrix(mcb, xset, gens_n, idx_lo)
        Dlo = _degenerate_matrix(mcb, xset, n - 1, idx_lo, cap)
        stack = [B, -Dlo] if Dlo.shape[0] else [B]
        K = il.left_kernel(np.vstack(stack))[:, :p_n]
    else:
        K = il.eye_int(p_n)
    gens_hi = prism_generators(mcb, xset, n + 1, cap=cap)
    Bhi = _boundary_matrix(mcb, xset, gens_hi, idx_n)
    Dn = _degenerate_matrix(mcb, xset, n, idx_n, cap)
    rel = [Bhi, Dn] if Dn.shape[0] else [Bhi]
    L = np.vstack(rel)
    return idx_n, il.LatticeQuotient(K, L, ambient_dim=p_n)


def _homology_quotient(mcb, xset, n, m, cap, counts):
    gens_n = prism_generators(mcb, xset, n, cap=cap)
    idx_n = {g: i for i, g in enumerate(gens_n)}
    p_n = len(gens_n)
    if n >= 1:
        gens_lo = prism_generators(mcb, xset, n - 1, cap=cap)
        idx_lo = {g: i for i, g in enumerate(gens_lo)}
        B = _boundary_matrix(mcb, xset, gens_n, idx_lo)
        Dlo = _degenerate_matrix(mcb, xset, n - 1, idx_lo, cap)
        stack = [B, -Dlo] if Dlo.shape[0] else [B]
        if m:
            stack.append(m * il.eye_int(len(gens_lo)))
        K = il.left_kernel(np.vstack(stack))[:, :p_n]
    else:
        K = il.eye_int(p_n)
    gens_hi = prism_generators(mcb, xset, n + 1, cap=cap)
    Bhi = _boundary_matrix(mcb, xset, gens_hi, idx_n)
    Dn = _degenerate_matrix(mcb, xset, n, idx_n, cap)
    rel = [Bhi, Dn] if Dn.shape[0] else [Bhi]
    if m:
        rel.append(m * il.eye_int(p_n))
    L = np.vstack(rel)
    free_rank, torsion = il.lattice_quotient(K, L, ambient_dim=p_n)
    return HomologyResult(degree=n, coefficients=m, free_rank=free_rank,
                          torsion=torsion, gen_counts=counts, method="quotient")


def _cone_data(mcb, xset, k, cap):
    """Generators, index, degenerate-span HNF basis at degree k (k<0 -> empty)."""
    if k < 0:
        return [], {}, il.zeros_int(0, 0)
    gens = prism_generators(mcb, xset, k, cap=cap)
    index = {g: i for i, g in enumerate(gens)}
    D = _degenerate_matrix(mcb, xset, k, index, cap)
    basis = il.hnf(D) if D.shape[0] else il.zeros_int(0, len(gens))
    return gens, index, basis


def _homology_cone(mcb, xset, n, cap, counts):
    # Cone_k = D_{k-1} (+) P_k with d(a, b) = (-da, db - a).
    data = {k: _cone_data(mcb, xset, k, cap) for k in range(n - 2, n + 2)}

    def cone_boundary(k):
        """Matrix of Cone_k -> Cone_{k-1} in the (D-basis, P-gens) splitting."""
        gens_k = data[k][0]
        gens_k1, idx_k1, dbasis_k2 = data[k - 1][0], data[k - 1][1], data[k - 2][2]
        dbasis_k1 = data[k - 1][2]
        rows_d = dbasis_k1.shape[0]
        rows_p = len(gens_k)
        cols_d = dbasis_k2.shape[0]
        cols_p = len(gens_k1)
        M = il.zeros_int(rows_d + rows_p, cols_d + cols_p)
        for i in range(rows_d):
            row_chain = Chain()
            for g, c in zip(gens_k1, dbasis_k1[i]):
                if c:
                    row_chain.add_term(g, int(c))
            img = boundary(mcb, xset, row_chain)
            if cols_d:
                vec = _chain_vector(img, data[k - 2][1], len(data[k - 2][0]))
                sol = il.solve_left(dbasis_k2, vec)
                if sol is None:
                    raise StructuralError(
                        "degenerate span is not closed under the boundary")
                for j in range(cols_d):
                    M[i, j] = -int(sol[j])
            elif not img.is_zero():
                raise StructuralError(
                    "degenerate span is not closed under the boundary")
            # minus the inclusion of the basis row into P_{k-1}
            for j, c in enumerate(dbasis_k1[i]):
                if c:
                    M[i, cols_d + j] = -int(c)
        for i, gen in enumerate(gens_k):
            img = boundary_gen(mcb, xset, gen)
            vec = _chain_vector(img, idx_k1, cols_p)
            for j, c in enumerate(vec):
                if c:
                    M[rows_d + i, cols_d + j] = int(c)
        return M

    Bn = cone_boundary(n)
    Bhi = cone_boundary(n + 1)
    K = il.left_kernel(Bn) if Bn.shape[1] else il.eye_int(Bn.shape[0])
    free_rank, torsion = il.lattice_quotient(K, Bhi, ambient_dim=Bn.shape[0])
    return HomologyResult(degree=n, coefficients=0, free_rank=free_rank,
                          torsion=torsion, gen_counts=counts, method="cone")


def evaluate_cochain(f, chain):
    """Linear extension of a generator-valued function to a chain.

    ``f`` may be a mapping from generators, a callable, or any object with
    a ``value_of_gen`` method.
    """
    if hasattr(f, "value_of_gen"):
        lookup = f.value_of_gen
    elif isinstance(f, dict):
        def lookup(gen):
            try:
                return f[gen]
            except KeyError:
                raise StructuralError(f"cochain has no value at {gen_str(gen)}")
    elif callable(f):
        lookup = f
    else:
        raise StructuralError("cochain must be a mapping, callable, or table object")
    total = 0
    for gen, coeff in chain.items():
        total += coeff * lookup(gen)
    return total


def chain_to_dict(chain):
    return {"kind": "chain",
            "terms": [{"y": gen[0], "blocks": [list(b) for b in gen[1]],
                       "coeff": coeff}
                      for gen, coeff in chain.sorted_terms()]}


def chain_from_dict(d):
    if d.get("kind") != "chain":
        raise StructuralError("not a chain payload")
    out = Chain()
    for term in d["terms"]:
        out.add_term(make_gen(term["y"], term["blocks"]), int(term["coeff"]))
    return out
