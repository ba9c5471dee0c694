"""Colorings of diagrams by an MCB, with optional region colors.

The search is planned once per diagram: a greedy pass picks root semi-arcs
(each worth a full carrier loop) and orders forced derivations through the
bijections of the operations; whatever relation is not consumed by a
derivation becomes a filter.  Execution is batched with numpy, chunked over
the first root, and aborts with BudgetExceeded when the node count passes
the cap, which keeps "no colorings" and "gave up" distinct.

For MCBs that come from a linear Alexander-type G-family there is a second
execution mode: the group layer is searched numerically and the module
layer is carried symbolically as per-arc matrices over the root vector, so
each group coloring contributes the kernel size of a small linear system
instead of a brute-force loop over module values.  ``count_colorings``
switches to it automatically when the carrier is too large to enumerate.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import BudgetExceeded, StructuralError, env_cap

__all__ = [
    "Coloring",
    "plan_search",
    "enumerate_colorings",
    "count_colorings",
    "verify_coloring",
    "alexander_coloring_batches",
    "alexander_fast_applicable",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = env_cap("MCBHOM_MAX_NODES", 20_000_000)

_CHUNK_THRESHOLD = 200_000
_CANDIDATE_CAP = 50_000


@dataclass
class Coloring:
    """Arc colors by semi-arc id; region colors by region id when Y is used."""
    arc_colors: dict
    region_colors: dict = None


@dataclass(frozen=True)
class _Rule:
    kind: str        # cu_fwd | cu_inv | co_fwd | co_inv | vc | vb
    site: int        # crossing or vertex index
    inputs: tuple    # arc indices that must be known
    output: int      # arc index produced


@dataclass
class _Plan:
    arc_ids: list
    index: dict
    steps: list              # ("root", arc) | ("derive", _Rule)
    roots: list
    cross_residual: list     # (crossing index, "u" | "o")
    vert_rule: dict          # vertex index -> fired rule kind or None


def _crossing_slots(diagram, plan_index, c):
    """Slots (src_u, dst_u, w_in, w_out) of the two crossing relations.

    Both signs share one shape: dst_u = src_u (under) w_in and
    w_out = w_in (over) src_u.  At a positive crossing the under strand
    runs input to output while the over relation runs backwards (the
    over input equals over_out acted by under_in); a negative crossing
    is the same picture with every strand reversed.
    """
    ui = plan_index[c.under_in]
    uo = plan_index[c.under_out]
    oi = plan_index[c.over_in]
    oo = plan_index[c.over_out]
    if c.sign == 1:
        return ui, uo, oo, oi
    return uo, ui, oi, oo


def _build_rules(diagram, index):
    rules = []
    for k, c in enumerate(diagram.crossings):
        src_u, dst_u, w_in, w_out = _crossing_slots(diagram, index, c)
        rules.append(_Rule("cu_fwd", k, (src_u, w_in), dst_u))
        rules.append(_Rule("cu_inv", k, (dst_u, w_in), src_u))
        rules.append(_Rule("co_fwd", k, (w_in, src_u), w_out))
        rules.append(_Rule("co_inv", k, (w_out, src_u), w_in))
    for k, v in enumerate(diagram.vertices):
        a, b, c = index[v.a_leg], index[v.b_leg], index[v.c_leg]
        rules.append(_Rule("vc", k, (a, b), c))
        rules.append(_Rule("vb", k, (a, c), b))
    return rules


def plan_search(diagram):
    """Greedy root choice plus forced propagation, deterministic."""
    arc_ids = [a.id for a in diagram.semiarcs]
    index = {aid: i for i, aid in enumerate(arc_ids)}
    rules = _build_rules(diagram, index)
    nargs = len(arc_ids)

    def closure_size(base, known):
        sim = set(known)
        sim.add(base)
        grew = True
        while grew:
            grew = False
            for r in rules:
                if r.output not in sim and all(i in sim for i in r.inputs):
                    sim.add(r.output)
                    grew = True
        return len(sim)

    steps = []
    roots = []
    known = set()
    fired = []
    while len(known) < nargs:
        grew = True
        while grew:
            grew = False
            for r in rules:
                if r.output not in known and all(i in known for i in r.inputs):
                    steps.append(("derive", r))
                    known.add(r.output)
                    fired.append(r)
                    grew = True
        if len(known) == nargs:
            break
        best, best_gain = None, -1
        for i in range(nargs):
            if i in known:
                continue
            gain = closure_size(i, known)
            if gain > best_gain:
                best, best_gain = i, gain
        steps.append(("root", best))
        roots.append(best)
        known.add(best)

    cross_residual = []
    fired_keys = {(r.kind[:2], r.site) for r in fired if r.kind.startswith("c")}
    for k in range(len(diagram.crossings)):
        if ("cu", k) not in fired_keys:
            cross_residual.append((k, "u"))
        if ("co", k) not in fired_keys:
            cross_residual.append((k, "o"))
    vert_rule = {k: None for k in range(len(diagram.vertices))}
    for r in fired:
        if r.kind in ("vc", "vb"):
            vert_rule[r.site] = r.kind
    return _Plan(arc_ids, index, steps, roots, cross_residual, vert_rule)


class _NodeBudget:
    def __init__(self, cap):
        self.cap = cap
        self.total = 0

    def add(self, rows):
        self.total += int(rows)
        if self.total > self.cap:
            raise BudgetExceeded(
                f"coloring search passed {self.cap} nodes; raise the budget "
                "to continue")


def _inverse_columns(table):
    """inv[z, a] = the x with table[x, a] = z; columns must be bijections."""
    inv = np.argsort(table, axis=0, kind="stable").astype(np.int32)
    return inv


class _GeneralEngine:
    """Batch executor for arc colors over the full carrier."""

    def __init__(self, diagram, mcb, plan):
        self.diagram = diagram
        self.mcb = mcb
        self.plan = plan
        self.U = mcb.under
        self.O = mcb.over
        self.Uinv = _inverse_columns(mcb.under)
        self.Oinv = _inverse_columns(mcb.over)
        self.checks = self._residual_checks()

    def _residual_checks(self):
        diagram, plan = self.diagram, self.plan
        checks = []
        for k, eqn in plan.cross_residual:
            c = diagram.crossings[k]
            src_u, dst_u, w_in, w_out = _crossing_slots(diagram, plan.index, c)
            if eqn == "u":
                arcs = (src_u, w_in, dst_u)

                def chk(cols, s=src_u, w=w_in, d=dst_u):
                    return cols[:, d] == self.U[cols[:, s], cols[:, w]]
            else:
                arcs = (w_in, src_u, w_out)

                def chk(cols, w=w_in, s=src_u, o=w_out):
                    return cols[:, o] == self.O[cols[:, w], cols[:, s]]
            checks.append((frozenset(arcs), f"{c.id}({eqn})", chk))
        for k, v in enumerate(diagram.vertices):
            if plan.vert_rule[k] is not None:
                continue  # the derive filtered on the full relation
            a = plan.index[v.a_leg]
            b = plan.index[v.b_leg]
            cc = plan.index[v.c_leg]

            def chk(cols, a=a, b=b, cc=cc):
                pm = self.mcb.mul_pairs(self.mcb.inv_table[cols[:, a]],
                                        cols[:, b])
                good = pm >= 0
                out = np.zeros(len(cols), dtype=bool)
                out[good] = (cols[good, cc]
                             == self.O[pm[good], cols[good, a]])
                return out
            checks.append((frozenset((a, b, cc)), v.id, chk))
        return checks

    def _derive(self, rule, cols):
        diagram, plan = self.diagram, self.plan
        if rule.kind.startswith("c"):
            c = diagram.crossings[rule.site]
            src_u, dst_u, w_in, w_out = _crossing_slots(diagram, plan.index, c)
            if rule.kind == "cu_fwd":
                cols[:, dst_u] = self.U[cols[:, src_u], cols[:, w_in]]
            elif rule.kind == "cu_inv":
                cols[:, src_u] = self.Uinv[cols[:, dst_u], cols[:, w_in]]
            elif rule.kind == "co_fwd":
                cols[:, w_out] = self.O[cols[:, w_in], cols[:, src_u]]
            else:
                cols[:, w_in] = self.Oinv[cols[:, w_out], cols[:, src_u]]
            return cols
        v = diagram.vertices[rule.site]
        a = plan.index[v.a_leg]
        b = plan.index[v.b_leg]
        cc = plan.index[v.c_leg]
        if rule.kind == "vc":
            pm = self.mcb.mul_pairs(self.mcb.inv_table[cols[:, a]], cols[:, b])
            good = pm >= 0
            cols = cols[good]
            cols[:, cc] = self.O[pm[good], cols[:, a]]
            return cols
        q = self.Oinv[cols[:, cc], cols[:, a]]
        pm = self.mcb.mul_pairs(cols[:, a], q)
        good = pm >= 0
        cols = cols[good]
        cols[:, b] = pm[good]
        return cols

    def batches(self, budget=DEFAULT_NODE_BUDGET):
        """Yield arrays of complete arc colorings, deterministic order."""
        n = self.mcb.n
        plan = self.plan
        counter = _NodeBudget(budget)
        nroots = len(plan.roots)
        if nroots and n ** min(nroots, 8) > _CHUNK_THRESHOLD:
            for v in range(n):
                yield self._run(counter, first_values=np.array([v], dtype=np.int32))
        else:
            yield self._run(counter, first_values=None)

    def _run(self, counter, first_values):
        plan = self.plan
        n = self.mcb.n
        cols = np.zeros((1, len(plan.arc_ids)), dtype=np.int32)
        known = set()
        first_root = True
        checks = list(self.checks)

        def fire_checks(cols):
            nonlocal checks
            rest = []
            for arcs, label, chk in checks:
                if arcs <= known:
                    cols = cols[chk(cols)]
                else:
                    rest.append((arcs, label, chk))
            checks = rest
            return cols

        for step, payload in plan.steps:
            if not len(cols):
                return cols
            if step == "root":
                if first_root and first_values is not None:
                    vals = first_values
                else:
                    vals = np.arange(n, dtype=np.int32)
                first_root = False
                reps = len(vals)
                cols = np.repeat(cols, reps, axis=0)
                cols[:, payload] = np.tile(vals, len(cols) // reps)
                counter.add(len(cols))
            else:
                cols = self._derive(payload, cols)
            known.add(payload if step == "root" else payload.output)
            cols = fire_checks(cols)
        return cols


def _region_structure(diagram):
    """Spanning forest of the region adjacency graph plus leftover edges.

    Tree steps are (new region, arc index, forward?) in BFS order; forward
    means the arc's source is the already-colored region.
    """
    regions = list(diagram.regions)
    rindex = {rid: i for i, rid in enumerate(regions)}
    arcs = list(diagram.semiarcs)
    adj = {i: [] for i in range(len(regions))}
    for ai, arc in enumerate(arcs):
        s, t = rindex[arc.region_source], rindex[arc.region_target]
        adj[s].append((t, ai, True))
        adj[t].append((s, ai, False))
    seen = [False] * len(regions)
    bases, tree, used = [], [], set()
    for start in range(len(regions)):
        if seen[start]:
            continue
        bases.append(start)
        seen[start] = True
        queue = [start]
        while queue:
            cur = queue.pop(0)
            for nxt, ai, fwd in adj[cur]:
                if not seen[nxt]:
                    seen[nxt] = True
                    used.add(ai)
                    tree.append((nxt, ai, fwd))
                    queue.append(nxt)
    extra = [ai for ai in range(len(arcs)) if ai not in used]
    return rindex, bases, tree, extra


def _act_inverse(xset):
    act = xset.act
    inv = np.argsort(act, axis=0, kind="stable").astype(np.int32)
    if not np.array_equal(act[inv, np.arange(act.shape[1])[None, :]],
                          np.tile(np.arange(xset.m)[:, None], (1, act.shape[1]))):
        raise StructuralError("X-set action is not invertible point-wise")
    return inv


def _region_table(diagram, xset, cols, plan):
    """(rows, n_regions) region colors for every base choice, plus a mask.

    The incoming batch is repeated for every combination of base-region
    values; rows whose leftover adjacencies fail are masked out.
    """
    rindex, bases, tree, extra = _region_structure(diagram)
    act = xset.act
    actinv = _act_inverse(xset)
    m = xset.m
    combos = m ** len(bases)
    B = len(cols)
    big = np.repeat(cols, combos, axis=0)
    vals = np.zeros((B * combos, len(rindex)), dtype=np.int32)
    choice = np.tile(np.arange(combos, dtype=np.int64), B)
    for j, base in enumerate(bases):
        vals[:, base] = (choice // m ** (len(bases) - 1 - j)) % m
    sid = [rindex[a.region_source] for a in diagram.semiarcs]
    tid = [rindex[a.region_target] for a in diagram.semiarcs]
    for reg, ai, fwd in tree:
        if fwd:
            vals[:, reg] = act[vals[:, sid[ai]], big[:, ai]]
        else:
            vals[:, reg] = actinv[vals[:, tid[ai]], big[:, ai]]
    ok = np.ones(len(big), dtype=bool)
    for ai in extra:
        ok &= vals[:, tid[ai]] == act[vals[:, sid[ai]], big[:, ai]]
    return big, vals, ok, combos


def enumerate_colorings(diagram, mcb, xset=None, budget=DEFAULT_NODE_BUDGET):
    """Yield every coloring exactly once, in a reproducible order."""
    plan = plan_search(diagram)
    engine = _GeneralEngine(diagram, mcb, plan)
    names = plan.arc_ids
    rids = list(diagram.regions)
    for cols in engine.batches(budget):
        if not len(cols):
            continue
        if xset is None:
            for row in cols:
                yield Coloring({aid: int(v) for aid, v in zip(names, row)})
            continue
        big, vals, ok, combos = _region_table(diagram, xset, cols, plan)
        for i in np.nonzero(ok)[0]:
            yield Coloring(
                {aid: int(v) for aid, v in zip(names, big[i])},
                {rid: int(v) for rid, v in zip(rids, vals[i])},
            )


def count_colorings(diagram, mcb, xset=None, budget=DEFAULT_NODE_BUDGET):
    """Number of colorings; uses the linear fast path when it applies."""
    if alexander_fast_applicable(mcb, xset):
        plan = plan_search(diagram)
        alex = mcb.family.alexander
        cand = alex.module.size ** len(plan.roots)
        workable = (_squarefree_primes(alex.module.m) is not None
                    or cand <= _CANDIDATE_CAP)
        if mcb.n ** max(len(plan.roots), 1) > budget and workable:
            total = 0
            for gcols, xmats, K in alexander_coloring_batches(
                    diagram, mcb, budget=budget, plan=plan):
                total += _count_kernel_rows(K, alex.module.m)
            return total
    plan = plan_search(diagram)
    engine = _GeneralEngine(diagram, mcb, plan)
    total = 0
    for cols in engine.batches(budget):
        if not len(cols):
            continue
        if xset is None:
            total += len(cols)
        else:
            big, vals, ok, combos = _region_table(diagram, xset, cols, plan)
            total += int(ok.sum())
    return total


def verify_coloring(diagram, mcb, xset, coloring):
    """(ok, witness): witness names the first violated site or semi-arc."""
    ac = coloring.arc_colors
    for a in diagram.semiarcs:
        if a.id not in ac:
            raise StructuralError(f"no color for semi-arc {a.id}")
        if not 0 <= ac[a.id] < mcb.n:
            raise StructuralError(f"color of {a.id} out of range")
    U, O = mcb.under, mcb.over
    for c in diagram.crossings:
        if c.sign == 1:
            u_ok = ac[c.under_out] == U[ac[c.under_in], ac[c.over_out]]
            o_ok = ac[c.over_in] == O[ac[c.over_out], ac[c.under_in]]
        else:
            u_ok = ac[c.under_in] == U[ac[c.under_out], ac[c.over_in]]
            o_ok = ac[c.over_out] == O[ac[c.over_in], ac[c.under_out]]
        if not (u_ok and o_ok):
            return False, c.id
    for v in diagram.vertices:
        a, b, cc = ac[v.a_leg], ac[v.b_leg], ac[v.c_leg]
        if mcb.block_of[a] != mcb.block_of[b]:
            return False, v.id
        if cc != O[mcb.mul(mcb.inv(a), b), a]:
            return False, v.id
    if xset is not None:
        rc = coloring.region_colors
        if rc is None:
            raise StructuralError("coloring has no region colors")
        for a in diagram.semiarcs:
            if rc[a.region_target] != xset.act[rc[a.region_source], ac[a.id]]:
                return False, a.id
    return True, None


# ---------------------------------------------------------------------------
# Linear fast path for Alexander-type associated MCBs.

def alexander_fast_applicable(mcb, xset):
    fam = getattr(mcb, "family", None)
    alex = getattr(fam, "alexander", None) if fam is not None else None
    if alex is None or alex.kind != "alexander":
        return False
    return xset is None or xset.m == 1


def _count_kernel_rows(K, modulus):
    """Sum over batch rows of the number of u with u K = 0 (mod modulus)."""
    B, rd, C = K.shape
    if C == 0:
        return B * modulus ** rd
    primes = _squarefree_primes(modulus)
    uniq, counts = np.unique(K.reshape(B, rd * C), axis=0, return_counts=True)
    Ku = uniq.reshape(len(uniq), rd, C)
    if primes is not None:
        per = np.ones(len(uniq), dtype=np.int64)
        for p in primes:
            ranks = _batched_rank_modp(Ku, p)
            per *= p ** (rd - ranks)
        return int((per * counts).sum())
    cand = _module_candidates(modulus, rd)
    total = 0
    step = max(1, 4_000_000 // (len(cand) * max(C, 1)))
    for lo in range(0, len(Ku), step):
        z = np.einsum("uk,bkc->buc", cand, Ku[lo:lo + step]) % modulus
        total += int(((z == 0).all(axis=2) * counts[lo:lo + step][:, None]).sum())
    return total


def _squarefree_primes(m):
    """Sorted prime factors if m is squarefree, else None."""
    out = []
    x, p = m, 2
    while p * p <= x:
        if x % p == 0:
            x //= p
            if x % p == 0:
                return None
            out.append(p)
        p += 1
    if x > 1:
        out.append(x)
    return out


def _batched_rank_modp(A, p):
    """Ranks of a stack of small matrices over GF(p), fully vectorized."""
    A = (np.asarray(A) % p).astype(np.int64)
    B, R, C = A.shape
    inv = np.zeros(p, dtype=np.int64)
    for v in range(1, p):
        inv[v] = pow(v, p - 2, p)
    rank = np.zeros(B, dtype=np.int64)
    rows = np.arange(R)
    bidx = np.arange(B)
    for c in range(C):
        if (rank >= R).all():
            break
        eligible = rows[None, :] >= rank[:, None]
        cand = (A[:, :, c] != 0) & eligible
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        swap = has & (piv != rank)
        if swap.any():
            bs = bidx[swap]
            rs, ps = rank[swap], piv[swap]
            tmp = A[bs, rs, :].copy()
            A[bs, rs, :] = A[bs, ps, :]
            A[bs, ps, :] = tmp
        bs = bidx[has]
        rs = rank[has]
        prow = (A[bs, rs, :] * inv[A[bs, rs, c]][:, None]) % p
        below = rows[None, :] > rs[:, None]
        factors = A[bs, :, c] * below
        A[bs] = (A[bs] - factors[:, :, None] * prow[:, None, :]) % p
        rank[has] += 1
    return rank


def _module_candidates(modulus, rd):
    out = np.empty((modulus ** rd, rd), dtype=np.int64)
    idx = np.arange(modulus ** rd)
    for j in range(rd):
        out[:, j] = (idx // modulus ** (rd - 1 - j)) % modulus
    return out


class _GLayerEngine(_GeneralEngine):
    """Group-layer executor: conjugation under, identity over."""

    def __init__(self, diagram, plan, group):
        self.diagram = diagram
        self.plan = plan
        self.group = group
        conj = group.conj_table()
        self.U = conj
        self.O = np.tile(np.arange(group.n, dtype=np.int32)[:, None],
                         (1, group.n))
        self.Uinv = conj[:, group.inv]
        self.Oinv = self.O
        self.mcb = _GroupAsMCB(group)
        self.checks = self._residual_checks()


class _GroupAsMCB:
    """Just enough of the MCB surface for the group-layer engine."""

    def __init__(self, group):
        self.group = group
        self.n = group.n
        self.inv_table = group.inv
        self.block_of = np.zeros(group.n, dtype=np.int32)

    def mul_pairs(self, A, B):
        return self.group.table[A, B].astype(np.int32)


def alexander_coloring_batches(diagram, mcb, budget=DEFAULT_NODE_BUDGET,
                               plan=None):
    """Yield (gcols, xmats, K) batches for the linear fast path.

    ``gcols`` has a valid group coloring per row.  ``xmats[b, s]`` is the
    (roots*dim, dim) matrix expressing arc s's module vector in the root
    vector u, and ``K`` stacks the residual constraints: row b's colorings
    correspond exactly to the u with u @ K[b] = 0 (mod m).
    """
    fam = mcb.family
    alex = fam.alexander
    G, mats, phi = alex.group, alex.mats, alex.phi
    m, d = alex.module.m, alex.module.dim
    if plan is None:
        plan = plan_search(diagram)
    E = len(plan.arc_ids)
    r = len(plan.roots)
    rd = r * d
    root_pos = {arc: j for j, arc in enumerate(plan.roots)}
    phimats = mats[phi]
    wmats = (phimats - mats) % m          # R_phi(h) - R_h
    inv_mats = mats[G.inv]
    inv_phimats = mats[G.inv[phi]]

    gengine = _GLayerEngine(diagram, plan, G)
    for gcols in gengine.batches(budget):
        if not len(gcols):
            continue
        B = len(gcols)
        xm = np.zeros((B, E, rd, d), dtype=np.int64)
        K_parts = []
        for step, payload in plan.steps:
            if step == "root":
                j = root_pos[payload]
                for t in range(d):
                    xm[:, payload, j * d + t, t] = 1
                continue
            rule = payload
            if rule.kind.startswith("c"):
                c = diagram.crossings[rule.site]
                src_u, dst_u, w_in, w_out = _crossing_slots(
                    diagram, plan.index, c)
                h = gcols[:, w_in]
                if rule.kind == "cu_fwd":
                    xm[:, dst_u] = (xm[:, src_u] @ mats[h]
                                    + xm[:, w_in] @ wmats[h]) % m
                elif rule.kind == "cu_inv":
                    xm[:, src_u] = ((xm[:, dst_u] - xm[:, w_in] @ wmats[h])
                                    @ inv_mats[h]) % m
                elif rule.kind == "co_fwd":
                    xm[:, w_out] = (xm[:, w_in]
                                    @ phimats[gcols[:, src_u]]) % m
                else:
                    xm[:, w_in] = (xm[:, w_out]
                                   @ inv_phimats[gcols[:, src_u]]) % m
            else:
                v = diagram.vertices[rule.site]
                a = plan.index[v.a_leg]
                b = plan.index[v.b_leg]
                cc = plan.index[v.c_leg]
                if rule.kind == "vc":
                    xm[:, cc] = (xm[:, a] @ phimats[gcols[:, a]]) % m
                    K_parts.append((xm[:, a] - xm[:, b]) % m)
                else:
                    xm[:, b] = xm[:, a]
                    K_parts.append(
                        (xm[:, cc] - xm[:, a] @ phimats[gcols[:, a]]) % m)
        for k, eqn in plan.cross_residual:
            c = diagram.crossings[k]
            src_u, dst_u, w_in, w_out = _crossing_slots(diagram, plan.index, c)
            h = gcols[:, w_in]
            if eqn == "u":
                K_parts.append((xm[:, dst_u] - xm[:, src_u] @ mats[h]
                                - xm[:, w_in] @ wmats[h]) % m)
            else:
                K_parts.append(
                    (xm[:, w_out] - xm[:, w_in]
                     @ phimats[gcols[:, src_u]]) % m)
        for k, v in enumerate(diagram.vertices):
            if plan.vert_rule[k] is not None:
                continue
            a = plan.index[v.a_leg]
            b = plan.index[v.b_leg]
            cc = plan.index[v.c_leg]
            K_parts.append((xm[:, a] - xm[:, b]) % m)
            K_parts.append((xm[:, cc] - xm[:, a] @ phimats[gcols[:, a]]) % m)
        if K_parts:
            K = np.concatenate(K_parts, axis=2)
        else:
            K = np.zeros((B, rd, 0), dtype=np.int64)
        yield gcols, xm, K
