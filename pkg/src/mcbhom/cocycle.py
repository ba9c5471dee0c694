"""Cocycles on the prismatic complex.

Two constructions are implemented besides direct table input: lifting a
biquandle 2- or 3-cocycle along the Z_t-family of parallel operations,
and the Alexander-type cocycles on X x G (kinds 1, 2 and 2').  Each
construction checks the hypotheses it needs and rejects bad candidates
with a witness instead of returning a non-cocycle.  Verification of a
finished cochain (vanishing on degenerate generators, composite with the
boundary zero) is exhaustive while the state space fits the budget and
falls back to a labeled random sample otherwise.

Coefficients live in Z_m for m > 0, or in Z for m = 0.
"""

import numpy as np

from .algebra import (AxiomCheck, AxiomReport, BudgetExceeded,
                      DEFAULT_VERIFY_BUDGET, SAMPLE_SIZE, StructuralError,
                      biquandle_from_dict, biquandle_to_dict, parallel_tables)
from .chain import boundary_gen, compositions, count_prism_generators, \
    degenerate_generators, evaluate_cochain, prism_generators, shuffle_chain
from .mcb import (XSetAction, assoc_mcb_from_gfamily, carrier_xset,
                  mcb_from_dict, mcb_to_dict, sample_block_tuples,
                  trivial_xset, xset_from_dict, xset_from_parallel,
                  xset_to_dict)

__all__ = [
    "BQCocycle",
    "MCBCochain",
    "CocycleRejection",
    "verify_bq_cocycle",
    "lift_2cocycle",
    "lift_3cocycle",
    "alexander_phi",
    "verify_mcb_cocycle",
    "bq_cocycle_to_dict",
    "bq_cocycle_from_dict",
    "cochain_to_dict",
    "cochain_from_dict",
]

# Degree-3 cochains are verified through the symbolic boundary, which is
# slow per generator; cap the exhaustive pass well below the vectorized
# budget so it cannot take minutes.
SYMBOLIC_BUDGET = 500_000


def _reduce(values, modulus):
    return values % modulus if modulus else values


class CocycleRejection(StructuralError):
    """A candidate failed one of its construction hypotheses."""

    def __init__(self, message, witness=None):
        super().__init__(message if witness is None
                         else f"{message} at {witness}")
        self.witness = witness


class BQCocycle:
    """Biquandle n-cochain table over an X-set, n in {2, 3}.

    ``values[y, x1, .., xn]`` holds the coefficient in Z_modulus (or Z
    when modulus is 0); ``act[y, x] = y * x`` is the base X-set action,
    defaulting to a single point.
    """

    def __init__(self, bq, values, modulus, act=None):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim not in (3, 4):
            raise StructuralError("cocycle table must have arity 2 or 3")
        if modulus < 0:
            raise StructuralError("modulus must be nonnegative")
        if act is None:
            act = np.zeros((values.shape[0], bq.n), dtype=np.int32)
        act = np.asarray(act, dtype=np.int32)
        if any(s != bq.n for s in values.shape[1:]):
            raise StructuralError("cocycle table does not match the carrier")
        if act.shape != (values.shape[0], bq.n):
            raise StructuralError("X-set table must be |Y| x |X|")
        self.bq = bq
        self.values = _reduce(values, modulus)
        self.modulus = int(modulus)
        self.act = act

    @property
    def arity(self):
        return self.values.ndim - 1

    @property
    def points(self):
        return self.values.shape[0]

    def value(self, y, *xs):
        if len(xs) != self.arity:
            raise StructuralError(f"expected {self.arity} arguments")
        return int(self.values[(y,) + xs])

    def __add__(self, other):
        if (self.bq is not other.bq or self.modulus != other.modulus
                or self.arity != other.arity
                or not np.array_equal(self.act, other.act)):
            raise StructuralError("cocycles live on different data")
        return BQCocycle(self.bq, self.values + other.values, self.modulus,
                         act=self.act)


def verify_bq_cocycle(theta):
    """Exhaustive check of the two biquandle cocycle conditions."""
    bq = theta.bq
    V = theta.values
    act = theta.act
    U, O = bq.under, bq.over
    n, m = bq.n, theta.points
    mod = theta.modulus
    dg = np.arange(n)
    checks = []

    if theta.arity == 2:
        adj = _reduce(V[:, dg, dg], mod)
        bad = np.argwhere(adj != 0)
        wit = (int(bad[0][0]), int(bad[0][1])) if bad.size else None
        checks.append(AxiomCheck("bq-cocycle.adjacent-zero", not bad.size,
                                 m * n, "exhaustive", wit))

        ok, wit = True, None
        for x1 in range(n):
            ys = act[:, x1]
            col = O[:, x1]
            t1 = V[ys[:, None, None], col[None, :, None], col[None, None, :]]
            t3 = V[act[:, :, None], U[x1][None, :, None], O.T[None, :, :]]
            t4 = V[:, x1, :][:, None, :]
            t5 = V[act[:, None, :], U[x1][None, None, :], U[None, :, :]]
            t6 = V[:, x1, :][:, :, None]
            total = _reduce(t1 - V - t3 + t4 + t5 - t6, mod)
            bad = np.argwhere(total != 0)
            if bad.size:
                ok = False
                wit = (int(bad[0][0]), x1, int(bad[0][1]), int(bad[0][2]))
                break
        checks.append(AxiomCheck("bq-cocycle.sum", ok, m * n ** 3,
                                 "exhaustive", wit))
    else:
        a1 = _reduce(V[:, dg, dg, :], mod)
        a2 = _reduce(V[:, :, dg, dg], mod)
        ok = not (a1.any() or a2.any())
        wit = None
        if not ok:
            bad = np.argwhere(a1 != 0)
            if bad.size:
                wit = (int(bad[0][0]), int(bad[0][1]), int(bad[0][1]),
                       int(bad[0][2]))
            else:
                bad = np.argwhere(a2 != 0)
                wit = (int(bad[0][0]), int(bad[0][1]), int(bad[0][2]),
                       int(bad[0][2]))
        checks.append(AxiomCheck("bq-cocycle.adjacent-zero", ok,
                                 2 * m * n * n, "exhaustive", wit))

        ok, wit = True, None
        for x1 in range(n):
            ys1 = act[:, x1]
            col = O[:, x1]
            s1 = V[ys1[:, None, None, None], col[None, :, None, None],
                   col[None, None, :, None], col[None, None, None, :]]
            d1 = V
            s2 = V[act[:, :, None, None], U[x1][None, :, None, None],
                   O.T[None, :, :, None], O.T[None, :, None, :]]
            d2 = V[:, x1][:, None, :, :]
            s3 = V[act[:, None, :, None], U[x1][None, None, :, None],
                   U[None, :, :, None], O.T[None, None, :, :]]
            d3 = V[:, x1][:, :, None, :]
            s4 = V[act[:, None, None, :], U[x1][None, None, None, :],
                   U[None, :, None, :], U[None, None, :, :]]
            d4 = V[:, x1][:, :, :, None]
            total = _reduce((s1 - d1) - (s2 - d2) + (s3 - d3) - (s4 - d4),
                            mod)
            bad = np.argwhere(total != 0)
            if bad.size:
                ok = False
                wit = (int(bad[0][0]), x1) + tuple(int(v) for v in bad[0][1:])
                break
        checks.append(AxiomCheck("bq-cocycle.sum", ok, m * n ** 4,
                                 "exhaustive", wit))
    return AxiomReport.from_checks(checks)


class MCBCochain:
    """Degree-n cochain on the prismatic complex, dense per-shape tables.

    ``tables`` maps each composition of n (the bracket-size pattern of a
    generator) to an array indexed by ``(y, e1, .., en)`` over carrier
    elements, or to None meaning identically zero on that shape.
    """

    def __init__(self, degree, mcb, xset, modulus, tables, alexander=None):
        if modulus < 0:
            raise StructuralError("modulus must be nonnegative")
        comps = list(compositions(degree))
        clean = {}
        for comp in comps:
            tab = tables.get(comp)
            if tab is not None:
                tab = _reduce(np.asarray(tab), modulus)
                if modulus and modulus <= 2 ** 20:
                    tab = tab.astype(np.int32, copy=False)
                want = (xset.m,) + (mcb.n,) * degree
                if tab.shape != want:
                    raise StructuralError(
                        f"table for shape {comp} must have shape {want}")
            clean[comp] = tab
        unknown = set(tables) - set(comps)
        if unknown:
            raise StructuralError(f"unknown generator shapes {sorted(unknown)}")
        self.degree = int(degree)
        self.mcb = mcb
        self.xset = xset
        self.modulus = int(modulus)
        self.tables = clean
        self.alexander = alexander
        self.verified = None

    def value_of_gen(self, gen):
        y, blocks = gen
        if y is None:
            raise StructuralError("generator carries no X-set point")
        comp = tuple(len(b) for b in blocks)
        if sum(comp) != self.degree:
            raise StructuralError(
                f"generator degree {sum(comp)} does not match {self.degree}")
        tab = self.tables.get(comp)
        if tab is None:
            return 0
        flat = tuple(e for blk in blocks for e in blk)
        return int(tab[(y,) + flat])

    def __add__(self, other):
        if (not _same_mcb(self.mcb, other.mcb)
                or not _same_xset(self.xset, other.xset)
                or self.degree != other.degree
                or self.modulus != other.modulus):
            raise StructuralError("cochains live on different data")
        tables = {}
        for comp, tab in self.tables.items():
            two = other.tables[comp]
            if tab is None and two is None:
                tables[comp] = None
            else:
                shape = (self.xset.m,) + (self.mcb.n,) * self.degree
                a = np.zeros(shape, dtype=np.int64) if tab is None else tab
                b = np.zeros(shape, dtype=np.int64) if two is None else two
                tables[comp] = a + b
        return MCBCochain(self.degree, self.mcb, self.xset, self.modulus,
                          tables)

    def equal_tables(self, other):
        """Table equality with None treated as a zero table."""
        if self.degree != other.degree or self.modulus != other.modulus:
            return False
        for comp, tab in self.tables.items():
            two = other.tables.get(comp)
            if tab is None and two is None:
                continue
            if tab is None:
                if two.any():
                    return False
            elif two is None:
                if tab.any():
                    return False
            elif not np.array_equal(tab, two):
                return False
        return True

    @classmethod
    def zero(cls, degree, mcb, xset, modulus):
        return cls(degree, mcb, xset, modulus,
                   {comp: None for comp in compositions(degree)})


def _same_mcb(a, b):
    if a is b:
        return True
    return (a.n == b.n and a.block_of.tolist() == b.block_of.tolist()
            and np.array_equal(a.under, b.under)
            and np.array_equal(a.over, b.over))


def _same_xset(a, b):
    if a is b:
        return True
    return a.m == b.m and np.array_equal(a.act, b.act)


def _xset_power_tables(bq, act, t, P):
    """V[k][y, x] = y *^[k] x for k = 0 .. t."""
    m, n = act.shape
    dg = np.arange(n)
    V = [np.tile(np.arange(m, dtype=np.int32)[:, None], (1, n))]
    for k in range(t):
        diag = P[k][dg, dg]
        V.append(act[V[k], diag[None, :]])
    return V


def lift_2cocycle(theta):
    """Lift a biquandle 2-cocycle to the associated Z_t-family MCB.

    The two hypothesis sums (full-period sums over the parallel pushes
    of either argument) are checked exhaustively first; they are what
    makes the double sum independent of the chosen representatives.
    """
    if theta.arity != 2:
        raise StructuralError("expected a 2-cocycle")
    bq, act, mod = theta.bq, theta.act, theta.modulus
    mcb, xset = xset_from_parallel(bq, act)
    t = mcb.groups[0].n
    P, Q = parallel_tables(bq, t)
    V = _xset_power_tables(bq, act, t, P)
    vals = theta.values
    m, n = theta.points, bq.n
    dg = np.arange(n)

    h1 = np.zeros((m, n, n), dtype=np.int64)
    h2 = np.zeros((m, n, n), dtype=np.int64)
    for k in range(t):
        d = Q[k][dg, dg]
        h1 += vals[V[k][:, :, None], d[None, :, None], Q[k].T[None, :, :]]
        pd = P[k][dg, dg]
        h2 += vals[V[k][:, None, :], P[k][None, :, :], pd[None, None, :]]
    for label, total in (("under-period", _reduce(h2, mod)),
                         ("over-period", _reduce(h1, mod))):
        bad = np.argwhere(total != 0)
        if bad.size:
            y, x1, x2 = (int(v) for v in bad[0])
            raise CocycleRejection(
                f"lift hypothesis ({label} sum) fails", (x1, x2, y))

    T = np.zeros((t, t, m, n, n), dtype=np.int64)
    for i in range(t):
        w = Q[i].T
        d = Q[i][dg, dg]
        base = V[i]
        for j in range(t):
            pj = P[j]
            a1 = pj[d[:, None], w]
            a2 = pj[w, w]
            ay = V[j][base[:, :, None], w[None, :, :]]
            T[i, j] = vals[ay, a1[None], a2[None]]
    cum = T.cumsum(axis=0).cumsum(axis=1)
    pad = np.zeros((t, t, m, n, n), dtype=np.int64)
    pad[1:, 1:] = cum[:t - 1, :t - 1]
    table = pad.transpose(2, 3, 0, 4, 1).reshape(m, n * t, n * t)
    return MCBCochain(2, mcb, xset, mod,
                      {(1, 1): _reduce(table, mod), (2,): None})


def lift_3cocycle(theta):
    """Lift a biquandle 3-cocycle; triple sum, three hypothesis sums."""
    if theta.arity != 3:
        raise StructuralError("expected a 3-cocycle")
    bq, act, mod = theta.bq, theta.act, theta.modulus
    mcb, xset = xset_from_parallel(bq, act)
    t = mcb.groups[0].n
    P, Q = parallel_tables(bq, t)
    V = _xset_power_tables(bq, act, t, P)
    vals = theta.values
    m, n = theta.points, bq.n
    dg = np.arange(n)

    h1 = np.zeros((m, n, n, n), dtype=np.int64)
    h2 = np.zeros_like(h1)
    h3 = np.zeros_like(h1)
    for k in range(t):
        qd = Q[k][dg, dg]
        qt = Q[k].T
        h1 += vals[V[k][:, :, None, None], qd[None, :, None, None],
                   qt[None, :, :, None], qt[None, :, None, :]]
        pd = P[k][dg, dg]
        h2 += vals[V[k][:, None, :, None], P[k][None, :, :, None],
                   pd[None, None, :, None], P[k].T[None, None, :, :]]
        h3 += vals[V[k][:, None, None, :], P[k][None, :, None, :],
                   P[k][None, None, :, :], pd[None, None, None, :]]
    for label, total in (("first", _reduce(h1, mod)),
                         ("second", _reduce(h2, mod)),
                         ("third", _reduce(h3, mod))):
        bad = np.argwhere(total != 0)
        if bad.size:
            y, x1, x2, x3 = (int(v) for v in bad[0])
            raise CocycleRejection(
                f"lift hypothesis ({label} period sum) fails",
                (x1, x2, x3, y))

    T = np.zeros((t, t, t, m, n, n, n), dtype=np.int64)
    for i in range(t):
        u1 = Q[i][dg, dg]                       # x1 <o^[i] x1, by x1
        u2 = Q[i].T                             # by (x1, x2)
        u3 = Q[i].T                             # by (x1, x3)
        yi = V[i]                               # by (y, x1)
        for j in range(t):
            pj = P[j]
            v1 = pj[u1[:, None], u2]            # (x1, x2)
            v2 = pj[u2, u2]                     # (x1, x2)
            v3 = pj[u3[:, None, :], u2[:, :, None]]  # (x1, x2, x3)
            yj = V[j][yi[:, :, None], u2[None, :, :]]  # (y, x1, x2)
            for k in range(t):
                pk = P[k]
                t1 = pk[v1[:, :, None], v3]
                t2 = pk[v2[:, :, None], v3]
                t3 = pk[v3, v3]
                yk = V[k][yj[:, :, :, None], v3[None]]
                T[i, j, k] = vals[yk, t1[None], t2[None], t3[None]]
    cum = T.cumsum(axis=0).cumsum(axis=1).cumsum(axis=2)
    pad = np.zeros((t, t, t, m, n, n, n), dtype=np.int64)
    pad[1:, 1:, 1:] = cum[:t - 1, :t - 1, :t - 1]
    table = pad.transpose(3, 4, 0, 5, 1, 6, 2).reshape(m, n * t, n * t, n * t)
    tables = {comp: None for comp in compositions(3)}
    tables[(1, 1, 1)] = _reduce(table, mod)
    return MCBCochain(3, mcb, xset, mod, tables)


def _hom_scan(group, images, modulus):
    lam = np.asarray(images, dtype=np.int64)
    if lam.shape != (group.n,):
        raise CocycleRejection("lambda image list has wrong shape")
    lhs = _reduce(lam[group.table], modulus)
    rhs = _reduce(lam[:, None] + lam[None, :], modulus)
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        raise CocycleRejection("lambda is not a homomorphism",
                               (int(bad[0][0]), int(bad[0][1])))
    return _reduce(lam, modulus)


def _multilinear_scan(module, f, modulus):
    """Check f(.., a+b, ..) = f(.., a, ..) + f(.., b, ..) in every slot.

    The gather space has axes (a, b, other slots in order); the scan is
    exhaustive over all of them.
    """
    size = module.size
    if size * size > 50_000_000:
        raise BudgetExceeded("module too large for the multilinearity scan")
    XV = module.vectors()
    add = module.encode(XV[:, None, :] + XV[None, :, :])
    arity = f.ndim
    full = np.arange(size)

    def along(axis):
        shape = [1] * (arity + 1)
        shape[axis] = size
        return full.reshape(shape)

    for slot in range(arity):
        idx_sum, idx_a, idx_b = [], [], []
        other = 2
        for pos in range(arity):
            if pos == slot:
                idx_sum.append(add.reshape((size, size) + (1,) * (arity - 1)))
                idx_a.append(along(0))
                idx_b.append(along(1))
            else:
                v = along(other)
                other += 1
                idx_sum.append(v)
                idx_a.append(v)
                idx_b.append(v)
        lhs = f[tuple(idx_sum)]
        rhs = f[tuple(idx_a)] + f[tuple(idx_b)]
        bad = np.argwhere(_reduce(lhs - rhs, modulus) != 0)
        if bad.size:
            raise CocycleRejection(
                f"f is not additive in slot {slot}",
                tuple(int(v) for v in bad[0]))


def _invariance_scan(module, mats, f, modulus):
    XV = module.vectors()
    arity = f.ndim
    for g in range(mats.shape[0]):
        perm = module.encode(XV @ mats[g] % module.m)
        idx = tuple(perm.reshape([-1 if k == pos else 1
                                  for k in range(arity)])
                    for pos in range(arity))
        moved = f[idx]
        bad = np.argwhere(_reduce(moved - f, modulus) != 0)
        if bad.size:
            raise CocycleRejection(
                "f is not G-invariant",
                (g,) + tuple(int(v) for v in bad[0]))


def alexander_phi(kind, f_table, lam_images, family, modulus, mcb=None):
    """Alexander-family 2-cocycles on the associated MCB of X x G.

    kind "1":  trivial X-set, value lambda(g1) f(x1-x2, x2(1-phi(g2)g2^-1)).
    kind "2":  X-set = the carrier acting by the under operation; value
               lambda(g) f((x-x1)(1-phi(g1)^-1 g1), x1-x2, x2(1-phi(g2)g2^-1)).
    kind "2p": X-set = the module X with y*(x,g) = y <u^g x; same value
               without the lambda factor.

    ``f_table`` is indexed by module element codes; multilinearity and
    G-invariance are scanned exhaustively, as is the homomorphism
    property of ``lam_images``; failures raise CocycleRejection.
    """
    kind = {1: "1", 2: "2", "1": "1", "2": "2", "2p": "2p", "2'": "2p"}.get(kind)
    if kind is None:
        raise StructuralError("kind must be one of 1, 2, 2p")
    data = getattr(family, "alexander", None)
    if data is None:
        raise StructuralError("family does not carry Alexander construction data")
    modulus = int(modulus)
    if modulus < 0:
        raise StructuralError("modulus must be nonnegative")
    module, G, mats, phi = data.module, data.group, data.mats, data.phi
    size = module.size
    arity = 2 if kind == "1" else 3
    f = np.asarray(f_table, dtype=np.int64)
    if f.shape != (size,) * arity:
        raise StructuralError(f"f table must have shape {(size,) * arity}")
    f = _reduce(f, modulus)

    if kind == "2p":
        if lam_images is not None:
            raise StructuralError("kind 2' takes no lambda")
        lam = None
    else:
        lam = _hom_scan(G, np.zeros(G.n, dtype=np.int64)
                        if lam_images is None else lam_images, modulus)
    _multilinear_scan(module, f, modulus)
    _invariance_scan(module, mats, f, modulus)

    if mcb is None:
        mcb = assoc_mcb_from_gfamily(family)
    N = mcb.n
    XV = module.vectors()
    mm = module.m
    idx = np.arange(N)
    xs = idx // G.n
    gs = idx % G.n

    sub = module.encode(XV[:, None, :] - XV[None, :, :])
    # w[a] = x_a (1 - phi(g_a) g_a^-1) as a module code, for carrier index a
    wmat = np.stack([(np.eye(module.dim, dtype=np.int64)
                      - mats[phi[g]] @ mats[G.inv[g]]) % mm
                     for g in range(G.n)])
    w = module.encode(np.einsum("nd,nde->ne", XV[xs], wmat[gs]) % mm)

    if kind == "1":
        xset = trivial_xset(mcb)
        lamrow = lam[gs]
        dtype = np.int32 if modulus and modulus <= 2 ** 20 else np.int64
        table = np.empty((1, N, N), dtype=dtype)
        step = max(1, 4_000_000 // max(N, 1))
        for lo in range(0, N, step):
            hi = min(N, lo + step)
            block = f[sub[xs[lo:hi, None], xs[None, :]], w[None, :]]
            table[0, lo:hi] = _reduce(lamrow[lo:hi, None] * block, modulus)
        cochain = MCBCochain(2, mcb, xset, modulus,
                             {(1, 1): table, (2,): None})
        cochain.alexander = {"kind": kind, "f": f, "lam": lam,
                             "family": family, "w": w, "sub": sub}
        return cochain

    # kinds 2 and 2': a third slot driven by the X-set point
    if N * N * (N if kind == "2" else size) > 200_000_000:
        raise BudgetExceeded("cochain table too large for kinds 2/2'")
    # u(y_x, a) = (y_x - x_a)(1 - phi(g_a)^-1 g_a) as module codes
    umat = np.stack([(np.eye(module.dim, dtype=np.int64)
                      - mats[G.inv[phi[g]]] @ mats[g]) % mm
                     for g in range(G.n)])
    diff = (XV[:, None, :] - XV[None, :, :]) % mm       # (y_x, x, dim)
    uenc = np.empty((size, N), dtype=np.int64)
    for g in range(G.n):
        cols = np.nonzero(gs == g)[0]
        uenc[:, cols] = module.encode(diff[:, xs[cols], :] @ umat[g] % mm)

    inner = f[uenc[:, :, None],
              sub[xs[:, None], xs[None, :]][None, :, :],
              w[None, None, :]]                          # (y_x, a, b)
    if kind == "2":
        xset = carrier_xset(mcb, side="under")
        table = _reduce(lam[gs][:, None, None] * inner[xs], modulus)
    else:
        act = np.transpose(family.under, (1, 2, 0)).reshape(size, N)
        xset = XSetAction(mcb, act,
                          names=[str(tuple(int(v) for v in XV[i]))
                                 for i in range(size)])
        table = _reduce(inner, modulus)
    tabs = {(1, 1): table, (2,): None}
    cochain = MCBCochain(2, mcb, xset, modulus, tabs)
    cochain.alexander = {"kind": kind, "f": f, "lam": lam, "family": family}
    return cochain


def _block_tuple_arrays(mcb, k):
    """All same-block k-tuples, as k parallel index arrays."""
    cols = [[] for _ in range(k)]
    for lam in range(mcb.nblocks):
        mem = mcb.carrier_of[lam].astype(np.int64)
        grids = np.meshgrid(*([mem] * k), indexing="ij")
        for c, g in zip(cols, grids):
            c.append(g.ravel())
    return [np.concatenate(c) if c else np.empty(0, dtype=np.int64)
            for c in cols]


def _delta3_eval(c, shape, y, x1, x2, x3):
    """c(boundary of a degree-3 generator), vectorized over index arrays.

    ``shape`` is the generator's bracket pattern; for (1,2) the pair
    (x2,x3) shares a block, for (2,1) the pair (x1,x2), for (3,) all
    three.
    """
    mcb, xset = c.mcb, c.xset
    U, O, act = mcb.under, mcb.over, xset.act
    S = c.tables.get((1, 1))
    B = c.tables.get((2,))

    def sv(yy, a, b):
        return 0 if S is None else S[yy, a, b]

    def bv(yy, a, b):
        return 0 if B is None else B[yy, a, b]

    inv = mcb.inv_table
    if shape == (1, 1, 1):
        val = (sv(act[y, x1], O[x2, x1], O[x3, x1]) - sv(y, x2, x3)
               - sv(act[y, x2], U[x1, x2], O[x3, x2]) + sv(y, x1, x3)
               + sv(act[y, x3], U[x1, x3], U[x2, x3]) - sv(y, x1, x2))
    elif shape == (1, 2):
        m23 = mcb.mul_pairs(inv[x2], x3)
        val = (bv(act[y, x1], O[x2, x1], O[x3, x1]) - bv(y, x2, x3)
               - sv(act[y, x2], U[x1, x2], O[m23, x2])
               + sv(y, x1, x3) - sv(y, x1, x2))
    elif shape == (2, 1):
        m12 = mcb.mul_pairs(inv[x1], x2)
        val = (sv(act[y, x1], O[m12, x1], O[x3, x1]) - sv(y, x2, x3)
               + sv(y, x1, x3)
               + bv(act[y, x3], U[x1, x3], U[x2, x3]) - bv(y, x1, x2))
    elif shape == (3,):
        m12 = mcb.mul_pairs(inv[x1], x2)
        m13 = mcb.mul_pairs(inv[x1], x3)
        val = (bv(act[y, x1], O[m12, x1], O[m13, x1]) - bv(y, x2, x3)
               + bv(y, x1, x3) - bv(y, x1, x2))
    else:
        raise StructuralError(f"unknown degree-3 shape {shape}")
    # the zero cochain can make every term a scalar 0
    val = np.zeros(np.shape(y), dtype=np.int64) + val
    return _reduce(val, c.modulus)


def _degen2_eval(c, y, a, b):
    S = c.tables.get((1, 1))
    B = c.tables.get((2,))
    ab = c.mcb.mul_pairs(a, b)
    val = np.zeros(np.broadcast(y, a).shape, dtype=np.int64)
    if S is not None:
        val = val + S[y, a, b]
    if B is not None:
        val = val - B[y, a, ab] + B[y, b, ab]
    return _reduce(val, c.modulus)


def _scan_space(dims, chunk=2_000_000):
    total = 1
    for d in dims:
        total *= int(d)
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        yield np.unravel_index(flat, dims)


def _verify_degree2(c, budget, samples, seed):
    mcb, xset = c.mcb, c.xset
    N, mY = mcb.n, xset.m
    p2 = sum(g.n ** 2 for g in mcb.groups)
    p3 = sum(g.n ** 3 for g in mcb.groups)
    rng = np.random.default_rng(seed)
    checks = []

    count = mY * p2
    if count <= budget:
        pa, pb = _block_tuple_arrays(mcb, 2)
        ok, wit = True, None
        for ys, pi in _scan_space((mY, p2)):
            bad = np.nonzero(_degen2_eval(c, ys, pa[pi], pb[pi]))[0]
            if bad.size:
                k = bad[0]
                ok, wit = False, (int(ys[k]), int(pa[pi[k]]), int(pb[pi[k]]))
                break
        checks.append(AxiomCheck("cocycle.degenerate", ok, count,
                                 "exhaustive", wit))
    else:
        ys = rng.integers(0, mY, size=samples)
        a, b = sample_block_tuples(mcb, rng, samples, 2)
        bad = np.nonzero(_degen2_eval(c, ys, a, b))[0]
        wit = None
        if bad.size:
            k = bad[0]
            wit = (int(ys[k]), int(a[k]), int(b[k]))
        checks.append(AxiomCheck("cocycle.degenerate", not bad.size,
                                 samples, "sampled", wit))

    spaces = {(1, 1, 1): mY * N ** 3, (1, 2): mY * N * p2,
              (2, 1): mY * p2 * N, (3,): mY * p3}
    ok, wit, total, exhaustive = True, None, 0, True
    pair_cache = {}

    def pairs(k):
        if k not in pair_cache:
            pair_cache[k] = _block_tuple_arrays(mcb, k)
        return pair_cache[k]

    for shape, count in spaces.items():
        if not ok:
            break
        if count <= budget:
            if shape == (1, 1, 1):
                it = ((ys, a, b, cc) for ys, a, b, cc
                      in _scan_space((mY, N, N, N)))
            elif shape == (1, 2):
                pa, pb = pairs(2)
                it = ((ys, a, pa[pi], pb[pi]) for ys, a, pi
                      in _scan_space((mY, N, p2)))
            elif shape == (2, 1):
                pa, pb = pairs(2)
                it = ((ys, pa[pi], pb[pi], cc) for ys, pi, cc
                      in _scan_space((mY, p2, N)))
            else:
                ta, tb, tc = pairs(3)
                it = ((ys, ta[pi], tb[pi], tc[pi]) for ys, pi
                      in _scan_space((mY, p3)))
            total += count
            for ys, a, b, cc in it:
                bad = np.nonzero(_delta3_eval(c, shape, ys, a, b, cc))[0]
                if bad.size:
                    k = bad[0]
                    ok = False
                    wit = (shape, int(ys[k]), int(a[k]), int(b[k]),
                           int(cc[k]))
                    break
        else:
            exhaustive = False
            ys = rng.integers(0, mY, size=samples)
            if shape == (1, 1, 1):
                a, b, cc = (rng.integers(0, N, size=samples)
                            for _ in range(3))
            elif shape == (1, 2):
                a = rng.integers(0, N, size=samples)
                b, cc = sample_block_tuples(mcb, rng, samples, 2)
            elif shape == (2, 1):
                a, b = sample_block_tuples(mcb, rng, samples, 2)
                cc = rng.integers(0, N, size=samples)
            else:
                a, b, cc = sample_block_tuples(mcb, rng, samples, 3)
            total += samples
            bad = np.nonzero(_delta3_eval(c, shape, ys, a, b, cc))[0]
            if bad.size:
                k = bad[0]
                ok = False
                wit = (shape, int(ys[k]), int(a[k]), int(b[k]), int(cc[k]))
    checks.append(AxiomCheck("cocycle.coboundary", ok, total,
                             "exhaustive" if exhaustive else "sampled", wit))
    return checks


def _random_gen(mcb, xset, rng, comp):
    y = int(rng.integers(0, xset.m))
    blocks = []
    for part in comp:
        if part == 1:
            blocks.append((int(rng.integers(0, mcb.n)),))
        else:
            tup = sample_block_tuples(mcb, rng, 1, part)
            blocks.append(tuple(int(t[0]) for t in tup))
    return (y, tuple(blocks))


def _verify_degree3(c, budget, samples, seed):
    mcb, xset = c.mcb, c.xset
    N, mY = mcb.n, xset.m
    p2 = sum(g.n ** 2 for g in mcb.groups)
    p3 = sum(g.n ** 3 for g in mcb.groups)
    rng = np.random.default_rng(seed)
    cap = min(budget, SYMBOLIC_BUDGET)
    checks = []

    count = mY * (2 * p2 * N + 2 * p3)
    gens3 = count_prism_generators(mcb, xset, 3)
    if count <= cap and gens3 <= 2_000_000:
        ok, wit = True, None
        done = 0
        for rel in degenerate_generators(mcb, xset, 3, cap=gens3 + 1):
            done += 1
            if _reduce(np.int64(evaluate_cochain(c, rel)), c.modulus):
                ok, wit = False, rel.sorted_terms()[0][0]
                break
        checks.append(AxiomCheck("cocycle.degenerate", ok, done,
                                 "exhaustive", wit))
    else:
        ok, wit = True, None
        weights = np.array([p2 * N, N * p2, p3, p3], dtype=np.float64)
        kinds = rng.choice(4, size=samples, p=weights / weights.sum())
        for kind in kinds:
            if kind == 0:
                a, b = (int(v[0]) for v in sample_block_tuples(mcb, rng, 1, 2))
                x3 = int(rng.integers(0, N))
                blocks, at = ((a,), (b,), (x3,)), 0
            elif kind == 1:
                x1 = int(rng.integers(0, N))
                a, b = (int(v[0]) for v in sample_block_tuples(mcb, rng, 1, 2))
                blocks, at = ((x1,), (a,), (b,)), 1
            elif kind == 2:
                a, b, cc = (int(v[0])
                            for v in sample_block_tuples(mcb, rng, 1, 3))
                blocks, at = ((a,), (b, cc)), 0
            else:
                a, b, cc = (int(v[0])
                            for v in sample_block_tuples(mcb, rng, 1, 3))
                blocks, at = ((a, b), (cc,)), 0
            y = int(rng.integers(0, mY))
            total = c.value_of_gen((y, blocks))
            for mg, coeff in shuffle_chain(mcb, blocks[at],
                                           blocks[at + 1]).items():
                merged = blocks[:at] + mg[1] + blocks[at + 2:]
                total -= coeff * c.value_of_gen((y, merged))
            if _reduce(np.int64(total), c.modulus):
                ok, wit = False, (y, blocks)
                break
        checks.append(AxiomCheck("cocycle.degenerate", ok, samples,
                                 "sampled", wit))

    count4 = count_prism_generators(mcb, xset, 4)
    if count4 <= cap:
        ok, wit = True, None
        for gen in prism_generators(mcb, xset, 4, cap=max(cap, count4)):
            if _reduce(np.int64(evaluate_cochain(
                    c, boundary_gen(mcb, xset, gen))), c.modulus):
                ok, wit = False, gen
                break
        checks.append(AxiomCheck("cocycle.coboundary", ok, count4,
                                 "exhaustive", wit))
    else:
        comps = list(compositions(4))
        sizes = [g.n for g in mcb.groups]
        weights = np.array([float(np.prod([sum(s ** part for s in sizes)
                                           for part in comp]))
                            for comp in comps])
        picks = rng.choice(len(comps), size=samples,
                           p=weights / weights.sum())
        ok, wit = True, None
        for pi in picks:
            gen = _random_gen(mcb, xset, rng, comps[pi])
            if _reduce(np.int64(evaluate_cochain(
                    c, boundary_gen(mcb, xset, gen))), c.modulus):
                ok, wit = False, gen
                break
        checks.append(AxiomCheck("cocycle.coboundary", ok, samples,
                                 "sampled", wit))
    return checks


def verify_mcb_cocycle(c, budget=DEFAULT_VERIFY_BUDGET, samples=SAMPLE_SIZE,
                       seed=0):
    """Is the cochain a cocycle: zero on D_n and on boundaries of P_{n+1}?

    Runs exhaustively while the state space fits the budget, otherwise
    on a seeded random sample whose size is recorded in the report; the
    mode field of each check says which happened.  A passing report is
    stored on the cochain as ``verified``.
    """
    if c.degree == 2:
        checks = _verify_degree2(c, budget, samples, seed)
    elif c.degree == 3:
        checks = _verify_degree3(c, budget, samples, seed)
    else:
        raise StructuralError("only degrees 2 and 3 are supported")
    report = AxiomReport.from_checks(checks)
    if report.ok:
        c.verified = report
    return report


def bq_cocycle_to_dict(theta):
    return {"kind": "bq-cocycle", "arity": theta.arity,
            "modulus": theta.modulus,
            "biquandle": biquandle_to_dict(theta.bq),
            "act": theta.act.tolist(),
            "values": theta.values.tolist()}


def bq_cocycle_from_dict(d):
    if d.get("kind") != "bq-cocycle":
        raise StructuralError("not a biquandle cocycle payload")
    bq = biquandle_from_dict(d["biquandle"])
    return BQCocycle(bq, np.asarray(d["values"]), d["modulus"],
                     act=np.asarray(d["act"]))


def _comp_key(comp):
    return ",".join(str(p) for p in comp)


def cochain_to_dict(c):
    return {"kind": "mcb-cochain", "degree": c.degree, "modulus": c.modulus,
            "mcb": mcb_to_dict(c.mcb), "xset": xset_to_dict(c.xset),
            "tables": {_comp_key(comp): None if tab is None else tab.tolist()
                       for comp, tab in c.tables.items()}}


def cochain_from_dict(d, mcb=None, xset=None):
    if d.get("kind") != "mcb-cochain":
        raise StructuralError("not a cochain payload")
    if mcb is None:
        mcb = mcb_from_dict(d["mcb"])
    if xset is None:
        xset = xset_from_dict(d["xset"], mcb)
    tables = {}
    for key, tab in d["tables"].items():
        comp = tuple(int(p) for p in key.split(","))
        tables[comp] = None if tab is None else np.asarray(tab)
    return MCBCochain(d["degree"], mcb, xset, d["modulus"], tables)
