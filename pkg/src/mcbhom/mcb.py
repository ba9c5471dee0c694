"""Multiple conjugation biquandles and X-sets over them.

An MCB is a disjoint union of finite groups carrying two biquandle-style
operations; products ``a·b`` only exist inside one block, and asking for
a cross-block product is a structural error rather than an axiom failure.

Verification is adaptive: each axiom schema is enumerated exhaustively
when its loop count fits the budget, and otherwise checked on a seeded
random sample (at least a million instances); the report labels every
check with the mode actually used.
"""

from __future__ import annotations

import numpy as np

from .algebra import (
    AxiomCheck,
    AxiomReport,
    BudgetExceeded,
    FinGroup,
    GFamilyBiquandle,
    StructuralError,
    DEFAULT_VERIFY_BUDGET,
    SAMPLE_SIZE,
    env_cap,
    make_zn_family,
    parallel_tables,
)

__all__ = [
    "MCB",
    "XSetAction",
    "sample_block_tuples",
    "assoc_mcb_from_gfamily",
    "verify_mcb",
    "verify_xset",
    "verify_biquandle_xset",
    "trivial_xset",
    "carrier_xset",
    "block_xset",
    "xset_from_parallel",
    "mcb_to_dict",
    "mcb_from_dict",
    "xset_to_dict",
    "xset_from_dict",
]


class MCB:
    """Disjoint union of groups with under/over operation tables.

    ``block_of[i]`` is the block index of carrier element ``i`` and
    ``index_in_block[i]`` its position inside ``groups[block_of[i]]``.
    """

    def __init__(self, groups, block_of, index_in_block, under, over, names=None):
        block_of = np.asarray(block_of, dtype=np.int32)
        index_in_block = np.asarray(index_in_block, dtype=np.int32)
        under = np.asarray(under, dtype=np.int32)
        over = np.asarray(over, dtype=np.int32)
        n = len(block_of)
        cap = env_cap("MCBHOM_MAX_CARRIER", 10_000)
        if n > cap:
            raise StructuralError(f"carrier size {n} exceeds cap {cap}")
        if under.shape != (n, n) or over.shape != (n, n):
            raise StructuralError("operation tables must be |X| x |X|")
        if under.size and (min(under.min(), over.min()) < 0
                           or max(under.max(), over.max()) >= n):
            raise StructuralError("operation table entries out of range")
        if index_in_block.shape != (n,):
            raise StructuralError("index_in_block must have carrier length")
        nblocks = len(groups)
        if block_of.size and (block_of.min() < 0 or block_of.max() >= nblocks):
            raise StructuralError("block_of entries out of range")

        self.groups = list(groups)
        self.block_of = block_of
        self.index_in_block = index_in_block
        self.under = under
        self.over = over
        self.n = n
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        self.family = None  # G-family this MCB was derived from, if any

        # carrier_of[lam][k] = carrier index of the k-th element of block lam
        carrier_of = []
        for lam, G in enumerate(self.groups):
            members = np.nonzero(block_of == lam)[0]
            if len(members) != G.n:
                raise StructuralError(f"block {lam} has {len(members)} members, "
                                      f"group has {G.n}")
            arr = np.full(G.n, -1, dtype=np.int32)
            for i in members:
                k = index_in_block[i]
                if k < 0 or k >= G.n or arr[k] != -1:
                    raise StructuralError(f"bad in-block index for element {i}")
                arr[k] = i
            carrier_of.append(arr)
        self.carrier_of = carrier_of
        self.e_of_block = np.array([carrier_of[lam][G.e]
                                    for lam, G in enumerate(self.groups)],
                                   dtype=np.int32)
        inv = np.empty(n, dtype=np.int32)
        for i in range(n):
            lam = block_of[i]
            inv[i] = carrier_of[lam][self.groups[lam].inv[index_in_block[i]]]
        self.inv_table = inv

    @property
    def nblocks(self):
        return len(self.groups)

    def mul(self, a, b):
        la, lb = self.block_of[a], self.block_of[b]
        if la != lb:
            raise StructuralError(f"product of elements from blocks {la} and {lb}")
        G = self.groups[la]
        return int(self.carrier_of[la][G.table[self.index_in_block[a],
                                               self.index_in_block[b]]])

    def inv(self, a):
        return int(self.inv_table[a])

    def identity_of(self, a):
        return int(self.e_of_block[self.block_of[a]])

    def mul_pairs(self, A, B):
        """Vectorized block product; -1 where the blocks differ."""
        A = np.asarray(A)
        B = np.asarray(B)
        out = np.full(np.broadcast(A, B).shape, -1, dtype=np.int32)
        A, B = np.broadcast_arrays(A, B)
        la = self.block_of[A]
        same = la == self.block_of[B]
        for lam, G in enumerate(self.groups):
            sel = same & (la == lam)
            if not sel.any():
                continue
            out[sel] = self.carrier_of[lam][G.table[self.index_in_block[A[sel]],
                                                    self.index_in_block[B[sel]]]]
        return out


def assoc_mcb_from_gfamily(gf):
    """The MCB on X x G associated with a G-family.

    Element ``(x, g)`` gets carrier index ``x * |G| + g``; blocks are the
    fibers ``{x} x G``.  Operations:
    ``(x,g) <u (y,h) = (x <u^h y, h^-1 g h)`` and
    ``(x,g) <o (y,h) = (x <o^h y, g)``.
    """
    G = gf.group
    nx, ng = gf.n, G.n
    n = nx * ng
    cap = env_cap("MCBHOM_MAX_CARRIER", 10_000)
    if n > cap:
        raise StructuralError(f"carrier size {n} exceeds cap {cap}")
    xs = np.arange(n, dtype=np.int32) // ng
    gs = np.arange(n, dtype=np.int32) % ng
    conj = G.conj_table()
    # under[(x,g),(y,h)] = (x <u^h y)*ng + conj[g,h]
    ux = gf.under[gs[None, :], xs[:, None], xs[None, :]].astype(np.int32)
    under = ux * ng + conj[gs[:, None], gs[None, :]]
    ox = gf.over[gs[None, :], xs[:, None], xs[None, :]].astype(np.int32)
    over = ox * ng + gs[:, None]
    names = [f"({gf.names[x]},{G.names[g]})" for x in range(nx) for g in range(ng)]
    mcb = MCB([G] * nx, xs, gs, under, over, names=names)
    mcb.family = gf
    return mcb


def sample_block_tuples(mcb, rng, size, k=2):
    """Random k-tuples of elements sharing a block, uniform over such tuples."""
    sizes = np.array([g.n for g in mcb.groups], dtype=np.int64)
    weights = sizes.astype(np.float64) ** k
    lam = rng.choice(len(sizes), size=size, p=weights / weights.sum())
    concat = np.concatenate([mcb.carrier_of[i] for i in range(mcb.nblocks)])
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return tuple(concat[starts[lam] + rng.integers(0, sizes[lam])].astype(np.int64)
                 for _ in range(k))


def _sample_block_pairs(mcb, rng, size):
    return sample_block_tuples(mcb, rng, size, 2)


def _pick_witness(mask, coords):
    """First failing coordinate tuple of a broadcast comparison, or None."""
    mask = np.asarray(mask)
    bad = np.argwhere(~mask)
    if bad.size == 0:
        return None
    first = tuple(bad[0])
    if coords is None:
        return tuple(int(v) for v in first)
    coords = np.broadcast_arrays(*[np.broadcast_to(c, mask.shape) for c in coords])
    return tuple(int(c[first]) for c in coords)


def verify_mcb(mcb, budget=DEFAULT_VERIFY_BUDGET, samples=SAMPLE_SIZE, seed=0):
    """Check every axiom schema; adaptive exhaustive/sampled per schema."""
    U, O, n = mcb.under, mcb.over, mcb.n
    rng = np.random.default_rng(seed)
    checks = []
    pair_count = sum(g.n ** 2 for g in mcb.groups)

    def record(axiom, mask, coords, mode, count):
        wit = _pick_witness(mask, coords)
        checks.append(AxiomCheck(axiom, wit is None, count, mode, wit))

    def record_blockwise(axiom, per_block, count):
        """Run ``per_block(lam) -> (mask, coords)`` over all blocks, one check."""
        wit = None
        for lam in range(mcb.nblocks):
            mask, coords = per_block(lam)
            wit = _pick_witness(mask, coords)
            if wit is not None:
                break
        checks.append(AxiomCheck(axiom, wit is None, count, "exhaustive", wit))

    def block_grid(lam):
        mem = mcb.carrier_of[lam]
        g = mcb.groups[lam]
        a = np.repeat(mem, g.n)
        b = np.tile(mem, g.n)
        ab = mem[g.table.ravel()]
        return a, b, ab

    # --- exchange identities -------------------------------------------------
    if n ** 3 <= budget:
        uxy, oxy = U[:, :, None], O[:, :, None]
        uzy, ozy = U.T[None, :, :], O.T[None, :, :]
        uxz, oxz = U[:, None, :], O[:, None, :]
        uyz, oyz = U[None, :, :], O[None, :, :]
        record("mcb.exchange-uu", U[uxy, uzy] == U[uxz, oyz], None, "exhaustive", n ** 3)
        record("mcb.exchange-mixed", O[uxy, uzy] == U[oxz, oyz], None, "exhaustive", n ** 3)
        record("mcb.exchange-oo", O[oxy, ozy] == O[oxz, uyz], None, "exhaustive", n ** 3)
    else:
        x = rng.integers(0, n, samples)
        y = rng.integers(0, n, samples)
        z = rng.integers(0, n, samples)
        record("mcb.exchange-uu", U[U[x, y], U[z, y]] == U[U[x, z], O[y, z]],
               (x, y, z), "sampled", samples)
        record("mcb.exchange-mixed", O[U[x, y], U[z, y]] == U[O[x, z], O[y, z]],
               (x, y, z), "sampled", samples)
        record("mcb.exchange-oo", O[O[x, y], O[z, y]] == O[O[x, z], U[y, z]],
               (x, y, z), "sampled", samples)

    # --- <u x and <o x are homomorphisms on each block ------------------------
    hom_count = pair_count * n
    allx = np.arange(n)
    if hom_count <= budget:
        def hom_block(T):
            def run(lam):
                a, b, ab = block_grid(lam)
                lhs = T[ab[:, None], allx[None, :]]
                rhs = mcb.mul_pairs(T[a[:, None], allx[None, :]],
                                    T[b[:, None], allx[None, :]])
                return lhs == rhs, (a[:, None], b[:, None], allx[None, :])
            return run
        record_blockwise("mcb.under-hom", hom_block(U), hom_count)
        record_blockwise("mcb.over-hom", hom_block(O), hom_count)
    else:
        a, b = _sample_block_pairs(mcb, rng, samples)
        x = rng.integers(0, n, samples)
        ab = mcb.mul_pairs(a, b)
        record("mcb.under-hom", U[ab, x] == mcb.mul_pairs(U[a, x], U[b, x]),
               (a, b, x), "sampled", samples)
        record("mcb.over-hom", O[ab, x] == mcb.mul_pairs(O[a, x], O[b, x]),
               (a, b, x), "sampled", samples)

    # --- product rules x <u (ab) = (x <u a) <u (b <o a) ------------------------
    if hom_count <= budget:
        def prod_block(T):
            def run(lam):
                a, b, ab = block_grid(lam)
                boa = O[b, a]
                xs = allx[:, None]
                mask = T[xs, ab[None, :]] == T[T[xs, a[None, :]], boa[None, :]]
                return mask, (xs, a[None, :], b[None, :])
            return run
        record_blockwise("mcb.under-product", prod_block(U), hom_count)
        record_blockwise("mcb.over-product", prod_block(O), hom_count)
    else:
        a, b = _sample_block_pairs(mcb, rng, samples)
        x = rng.integers(0, n, samples)
        ab = mcb.mul_pairs(a, b)
        boa = O[b, a]
        record("mcb.under-product", U[x, ab] == U[U[x, a], boa],
               (x, a, b), "sampled", samples)
        record("mcb.over-product", O[x, ab] == O[O[x, a], boa],
               (x, a, b), "sampled", samples)

    # --- identity rules -------------------------------------------------------
    xs = np.arange(n)[:, None]
    record("mcb.under-identity", U[xs, mcb.e_of_block[None, :]] == xs,
           (xs, mcb.e_of_block[None, :]), "exhaustive", n * mcb.nblocks)
    record("mcb.over-identity", O[xs, mcb.e_of_block[None, :]] == xs,
           (xs, mcb.e_of_block[None, :]), "exhaustive", n * mcb.nblocks)

    # --- mixed rule a^-1 b <o a = b a^-1 <u a ---------------------------------
    if pair_count <= budget:
        def mixed_block(lam):
            a, b, _ = block_grid(lam)
            ia = mcb.inv_table[a]
            mask = O[mcb.mul_pairs(ia, b), a] == U[mcb.mul_pairs(b, ia), a]
            return mask, (a, b)
        record_blockwise("mcb.mixed", mixed_block, pair_count)
    else:
        a, b = _sample_block_pairs(mcb, rng, samples)
        ia = mcb.inv_table[a]
        record("mcb.mixed", O[mcb.mul_pairs(ia, b), a] == U[mcb.mul_pairs(b, ia), a],
               (a, b), "sampled", samples)

    # --- columns are bijections (isomorphism part of the hom axiom) -----------
    expect = np.arange(n, dtype=np.int32)[:, None]
    cols_ok = bool((np.sort(U, axis=0) == expect).all()
                   and (np.sort(O, axis=0) == expect).all())
    checks.append(AxiomCheck("mcb.columns-bijective", cols_ok, 2 * n * n,
                             "exhaustive", None))
    return AxiomReport.from_checks(checks)


class XSetAction:
    """Right action table of an MCB on a point set: ``act[y, x] = y * x``."""

    def __init__(self, mcb, act, names=None):
        act = np.asarray(act, dtype=np.int32)
        if act.ndim != 2 or act.shape[1] != mcb.n:
            raise StructuralError("action table must be |Y| x |X|")
        m = act.shape[0]
        if act.size and (act.min() < 0 or act.max() >= m):
            raise StructuralError("action table entries out of range")
        self.mcb = mcb
        self.act = act
        self.m = m
        self.names = list(names) if names is not None else [str(i) for i in range(m)]


def trivial_xset(mcb):
    return XSetAction(mcb, np.zeros((1, mcb.n), dtype=np.int32), names=["pt"])


def carrier_xset(mcb, side="under"):
    """The carrier acting on itself, y * x = y <u x (or <o x)."""
    if side == "under":
        return XSetAction(mcb, mcb.under.copy(), names=list(mcb.names))
    if side == "over":
        return XSetAction(mcb, mcb.over.copy(), names=list(mcb.names))
    raise StructuralError(f"unknown side {side!r}")


def block_xset(mcb):
    """The block index set with lam * x = block of (e_lam <u x)."""
    act = mcb.block_of[mcb.under[mcb.e_of_block, :]]
    return XSetAction(mcb, act, names=[f"block{lam}" for lam in range(mcb.nblocks)])


def verify_xset(xset, budget=DEFAULT_VERIFY_BUDGET, samples=SAMPLE_SIZE, seed=0):
    """Check the X-set axiom schemata for an action over a verified MCB."""
    mcb = xset.mcb
    act = xset.act
    n, m = mcb.n, xset.m
    U, O = mcb.under, mcb.over
    rng = np.random.default_rng(seed)
    checks = []

    ys = np.arange(m)[:, None]
    mask = act[ys, mcb.e_of_block[None, :]] == ys
    bad = np.argwhere(~mask)
    checks.append(AxiomCheck("xset.identity", not bad.size, m * mcb.nblocks,
                             "exhaustive",
                             None if not bad.size else (int(bad[0][0]),
                                                        int(mcb.e_of_block[bad[0][1]]))))

    pair_count = sum(g.n ** 2 for g in mcb.groups)
    if pair_count * m <= budget:
        ok = True
        wit = None
        for lam, G in enumerate(mcb.groups):
            mem = mcb.carrier_of[lam]
            a = np.repeat(mem, G.n)
            b = np.tile(mem, G.n)
            ab = mem[G.table.ravel()]
            lhs = act[ys, ab[None, :]]
            rhs = act[act[ys, a[None, :]], O[b, a][None, :]]
            mask = lhs == rhs
            if ok and not mask.all():
                ok = False
                i, j = np.argwhere(~mask)[0]
                wit = (int(i), int(a[j]), int(b[j]))
        checks.append(AxiomCheck("xset.product", ok, pair_count * m, "exhaustive", wit))
    else:
        a, b = _sample_block_pairs(mcb, rng, samples)
        y = rng.integers(0, m, samples)
        ab = mcb.mul_pairs(a, b)
        mask = act[y, ab] == act[act[y, a], O[b, a]]
        bad = np.argwhere(~mask)
        wit = None if not bad.size else (int(y[bad[0][0]]), int(a[bad[0][0]]),
                                         int(b[bad[0][0]]))
        checks.append(AxiomCheck("xset.product", not bad.size, samples, "sampled", wit))

    if m * n * n <= budget:
        lhs = act[act[ys[:, :, None], np.arange(n)[None, :, None]],
                  O.T[None, :, :]]
        rhs = act[act[ys[:, :, None], np.arange(n)[None, None, :]],
                  U[None, :, :]]
        mask = lhs == rhs
        bad = np.argwhere(~mask)
        wit = None if not bad.size else tuple(int(v) for v in bad[0])
        checks.append(AxiomCheck("xset.exchange", not bad.size, m * n * n,
                                 "exhaustive", wit))
    else:
        y = rng.integers(0, m, samples)
        a = rng.integers(0, n, samples)
        b = rng.integers(0, n, samples)
        mask = act[act[y, a], O[b, a]] == act[act[y, b], U[a, b]]
        bad = np.argwhere(~mask)
        wit = None if not bad.size else (int(y[bad[0][0]]), int(a[bad[0][0]]),
                                         int(b[bad[0][0]]))
        checks.append(AxiomCheck("xset.exchange", not bad.size, samples,
                                 "sampled", wit))
    return AxiomReport.from_checks(checks)


def verify_biquandle_xset(bq, act):
    """Axiom scan for an X-set over a plain biquandle.

    Requires (y*a)*(b <o a) = (y*b)*(a <u b) for all y, a, b and that every
    y -> y*x is a bijection.
    """
    act = np.asarray(act, dtype=np.int32)
    n = bq.n
    if act.ndim != 2 or act.shape[1] != n:
        raise StructuralError("action table must be |Y| x |X|")
    m = act.shape[0]
    checks = []
    ys = np.arange(m)[:, None, None]
    lhs = act[act[ys, np.arange(n)[None, :, None]], bq.over.T[None, :, :]]
    rhs = act[act[ys, np.arange(n)[None, None, :]], bq.under[None, :, :]]
    mask = lhs == rhs
    bad = np.argwhere(~mask)
    wit = None if not bad.size else tuple(int(v) for v in bad[0])
    checks.append(AxiomCheck("bqxset.exchange", not bad.size, m * n * n,
                             "exhaustive", wit))
    perm_ok = all(len(set(act[:, x].tolist())) == m for x in range(n))
    checks.append(AxiomCheck("bqxset.columns-bijective", perm_ok, m * n,
                             "exhaustive", None))
    return AxiomReport.from_checks(checks)


def xset_from_parallel(bq, act, cap=4096):
    """Fold a biquandle X-set into an action over the associated MCB.

    Returns ``(mcb, xset)`` where the family is the Z_t-family of parallel
    operations, t the combined type, and ``y * (x, k) = y *^[k] x``.
    """
    rep = verify_biquandle_xset(bq, act)
    if not rep.ok:
        raise StructuralError(f"not an X-set: {rep.failures()[0].axiom}")
    act = np.asarray(act, dtype=np.int32)
    gf = make_zn_family(bq, act=act, cap=cap)
    t = gf.group.n
    mcb = assoc_mcb_from_gfamily(gf)
    P, _ = parallel_tables(bq, t)
    m = act.shape[0]
    n = bq.n
    V = np.tile(np.arange(m, dtype=np.int32)[:, None], (1, n))
    table = np.empty((m, n * t), dtype=np.int32)
    dgidx = np.arange(n)
    for k in range(t):
        table[:, np.arange(n) * t + k] = V
        dg = P[k][dgidx, dgidx]
        V = act[V, dg[None, :]]
    return mcb, XSetAction(mcb, table, names=[str(i) for i in range(m)])


def mcb_to_dict(mcb):
    mul = np.full((mcb.n, mcb.n), -1, dtype=np.int64)
    idx = np.arange(mcb.n)
    mul[:, :] = mcb.mul_pairs(idx[:, None], idx[None, :])
    return {
        "kind": "mcb",
        "elements": mcb.n,
        "block_of": mcb.block_of.tolist(),
        "mul": mul.tolist(),
        "under": mcb.under.tolist(),
        "over": mcb.over.tolist(),
        "names": list(mcb.names),
    }


def mcb_from_dict(d):
    if d.get("kind") != "mcb":
        raise StructuralError("not an mcb payload")
    block_of = np.asarray(d["block_of"], dtype=np.int32)
    mul = np.asarray(d["mul"], dtype=np.int64)
    n = len(block_of)
    nblocks = int(block_of.max()) + 1 if n else 0
    groups = []
    index_in_block = np.empty(n, dtype=np.int32)
    for lam in range(nblocks):
        members = np.nonzero(block_of == lam)[0]
        index_in_block[members] = np.arange(len(members))
        local = {int(g): k for k, g in enumerate(members)}
        table = np.empty((len(members), len(members)), dtype=np.int64)
        for i, a in enumerate(members):
            for j, b in enumerate(members):
                prod = int(mul[a, b])
                if prod not in local:
                    raise StructuralError(
                        f"product of {a} and {b} leaves the block")
                table[i, j] = local[prod]
        groups.append(FinGroup(table))
    return MCB(groups, block_of, index_in_block, d["under"], d["over"],
               names=d.get("names"))


def xset_to_dict(xset):
    return {"kind": "xset", "points": xset.m, "act": xset.act.tolist(),
            "names": list(xset.names)}


def xset_from_dict(d, mcb):
    if d.get("kind") != "xset":
        raise StructuralError("not an xset payload")
    return XSetAction(mcb, d["act"], names=d.get("names"))
