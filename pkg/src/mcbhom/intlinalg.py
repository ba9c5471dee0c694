"""Exact integer linear algebra on object-dtype numpy arrays.

Hermite and Smith normal forms, integer kernels and lattice quotients.
All routines carry arbitrary-precision Python ints inside object arrays,
so intermediate coefficient growth can never overflow.  Matrices here are
small (a few hundred rows at most); clarity wins over asymptotics.

Row convention throughout: vectors are rows, lattices are row spans, and
a matrix acts on the right (``x @ A``).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_int_matrix",
    "zeros_int",
    "eye_int",
    "exgcd",
    "hnf_with_transform",
    "hnf",
    "left_kernel",
    "solve_left",
    "lattice_member",
    "snf_with_transforms",
    "snf_diagonal",
    "lattice_quotient",
    "LatticeQuotient",
    "RowLattice",
    "kernel_mod",
]


def as_int_matrix(rows, cols=None):
    """Coerce ``rows`` into a 2-d object array of Python ints.

    ``cols`` fixes the column count when ``rows`` is empty.
    """
    data = [[int(v) for v in row] for row in rows]
    if not data:
        if cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        return np.empty((0, cols), dtype=object)
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise ValueError("ragged rows")
    out = np.empty((len(data), width), dtype=object)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            out[i, j] = v
    return out


def zeros_int(r, c):
    out = np.empty((r, c), dtype=object)
    out[:] = 0
    return out


def eye_int(n):
    out = zeros_int(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def exgcd(a, b):
    """Return ``(g, s, t)`` with ``g = s*a + t*b`` and ``g >= 0``."""
    old_r, r = int(a), int(b)
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hnf_with_transform(A):
    """Row-style Hermite normal form.

    Returns ``(H, U, pivots)`` where ``U @ A == H``, ``U`` is unimodular,
    ``pivots`` lists the pivot column of each nonzero row, pivot entries are
    positive and entries above a pivot are reduced into ``[0, pivot)``.
    Rows ``len(pivots):`` of ``H`` are zero.
    """
    H = A.copy()
    r, c = H.shape
    U = eye_int(r)
    row = 0
    pivots = []
    for col in range(c):
        if row == r:
            break
        while True:
            nz = [i for i in range(row, r) if H[i, col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda i: abs(H[i, col]))
            p = nz[0]
            for i in nz[1:]:
                q = H[i, col] // H[p, col]
                if q:
                    H[i, :] -= q * H[p, :]
                    U[i, :] -= q * U[p, :]
        if not nz:
            continue
        p = nz[0]
        if p != row:
            H[[p, row]] = H[[row, p]]
            U[[p, row]] = U[[row, p]]
        if H[row, col] < 0:
            H[row, :] = -H[row, :]
            U[row, :] = -U[row, :]
        for i in range(row):
            q = H[i, col] // H[row, col]
            if q:
                H[i, :] -= q * H[row, :]
                U[i, :] -= q * U[row, :]
        pivots.append(col)
        row += 1
    return H, U, pivots


def hnf(A):
    """Hermite normal form with zero rows trimmed."""
    H, _, pivots = hnf_with_transform(A)
    return H[: len(pivots)]


def left_kernel(A):
    """Basis rows of ``{x : x @ A == 0}``.

    The rows of the unimodular transform that map onto the zero rows of the
    HNF are exactly a lattice basis of the left kernel.
    """
    _, U, pivots = hnf_with_transform(A)
    return U[len(pivots):].copy()


def _backsolve(H, pivots, v):
    """Solve ``y @ H[:len(pivots)] == v`` over the integers.

    Returns the coefficient row or None when no integer solution exists.
    """
    v = np.array([int(x) for x in v], dtype=object)
    y = [0] * len(pivots)
    for i, col in enumerate(pivots):
        piv = H[i, col]
        q, rem = divmod(int(v[col]), int(piv))
        if rem:
            return None
        if q:
            v = v - q * H[i, :]
        y[i] = q
    if any(x != 0 for x in v):
        return None
    return np.array(y, dtype=object)


def solve_left(A, v):
    """Integer solution ``x`` of ``x @ A == v``, or None."""
    H, U, pivots = hnf_with_transform(A)
    y = _backsolve(H, pivots, v)
    if y is None:
        return None
    if len(pivots) == 0:
        return zeros_int(1, A.shape[0])[0]
    return y @ U[: len(pivots)]


def lattice_member(A, v):
    """Is the row ``v`` in the lattice spanned by the rows of ``A``?"""
    return solve_left(A, v) is not None


def snf_with_transforms(A):
    """Smith normal form ``U @ A @ V == D`` with unimodular ``U``, ``V``.

    ``D`` is diagonal with nonnegative entries and each diagonal entry
    divides the next.
    """
    D = A.copy()
    r, c = D.shape
    U = eye_int(r)
    V = eye_int(c)
    t = 0
    while True:
        # locate the smallest nonzero entry of the trailing submatrix
        best = None
        for i in range(t, r):
            for j in range(t, c):
                if D[i, j] != 0 and (best is None or abs(D[i, j]) < abs(D[best[0], best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        if bi != t:
            D[[bi, t]] = D[[t, bi]]
            U[[bi, t]] = U[[t, bi]]
        if bj != t:
            D[:, [bj, t]] = D[:, [t, bj]]
            V[:, [bj, t]] = V[:, [t, bj]]
        again = False
        for i in range(t + 1, r):
            q = D[i, t] // D[t, t]
            if q:
                D[i, :] -= q * D[t, :]
                U[i, :] -= q * U[t, :]
            if D[i, t] != 0:
                again = True
        for j in range(t + 1, c):
            q = D[t, j] // D[t, t]
            if q:
                D[:, j] -= q * D[:, t]
                V[:, j] -= q * V[:, t]
            if D[t, j] != 0:
                again = True
        if again:
            continue
        # enforce divisibility of the trailing block by the pivot
        piv = D[t, t]
        offender = None
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if D[i, j] % piv != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            D[t, :] += D[offender, :]
            U[t, :] += U[offender, :]
            continue
        if D[t, t] < 0:
            D[t, :] = -D[t, :]
            U[t, :] = -U[t, :]
        t += 1
        if t == min(r, c):
            break
    return D, U, V


def snf_diagonal(A):
    """Positive diagonal of the Smith form (zeros trimmed)."""
    if A.shape[0] == 0 or A.shape[1] == 0:
        return []
    D, _, _ = snf_with_transforms(A)
    out = []
    for i in range(min(D.shape)):
        if D[i, i] != 0:
            out.append(int(D[i, i]))
    return out


class LatticeQuotient:
    """Structure of ``K / L`` for integer lattices ``L <= K <= Z^n``.

    Exposes the free rank, the torsion orders (> 1), and a canonical
    coordinate map ``class_of`` sending a lattice element of ``K`` to a
    hashable representative of its class.
    """

    def __init__(self, K_rows, L_rows, ambient_dim=None):
        if ambient_dim is None:
            ambient_dim = K_rows.shape[1] if K_rows.shape[0] else L_rows.shape[1]
        self.ambient_dim = ambient_dim
        H, _, pivots = hnf_with_transform(K_rows) if K_rows.shape[0] else (
            zeros_int(0, ambient_dim), None, [])
        self._basis = H[: len(pivots)]
        self._pivots = pivots
        rank = len(pivots)
        rel = []
        for row in L_rows:
            y = _backsolve(self._basis, pivots, row) if rank else None
            if rank == 0:
                if any(x != 0 for x in row):
                    raise ValueError("relation lattice is not contained in the cycle lattice")
                continue
            if y is None:
                raise ValueError("relation lattice is not contained in the cycle lattice")
            rel.append(list(y))
        relmat = as_int_matrix(rel, cols=rank) if rank else zeros_int(0, 0)
        if relmat.shape[0]:
            D, _, V = snf_with_transforms(relmat)
            diag = [int(D[i, i]) for i in range(min(D.shape))]
        else:
            V = eye_int(rank)
            diag = []
        self._V = V
        self._diag = diag
        nonzero = sum(1 for d in diag if d != 0)
        self.free_rank = rank - nonzero
        self.torsion = sorted(int(d) for d in diag if d > 1)

    def contains(self, v):
        return _backsolve(self._basis, self._pivots, v) is not None

    def class_of(self, v):
        """Canonical class representative of ``v`` (a member of K)."""
        y = _backsolve(self._basis, self._pivots, v)
        if y is None:
            raise ValueError("vector is not in the cycle lattice")
        rank = len(self._pivots)
        if rank == 0:
            return ()
        yv = y @ self._V
        out = []
        for i in range(rank):
            d = self._diag[i] if i < len(self._diag) else 0
            if d == 0:
                out.append(("free", i, int(yv[i])))
            elif d > 1:
                out.append(("tor", i, int(yv[i] % d)))
        return tuple(out)


def lattice_quotient(K_rows, L_rows, ambient_dim=None):
    """Shorthand: ``(free_rank, torsion)`` of the quotient lattice K/L."""
    q = LatticeQuotient(K_rows, L_rows, ambient_dim=ambient_dim)
    return q.free_rank, q.torsion


class RowLattice:
    """Row span with the HNF precomputed, for repeated membership tests."""

    def __init__(self, rows, ambient_dim):
        self.ambient_dim = ambient_dim
        if rows.shape[0]:
            H, _, pivots = hnf_with_transform(rows)
            self._basis = H[: len(pivots)]
            self._pivots = pivots
        else:
            self._basis = zeros_int(0, ambient_dim)
            self._pivots = []

    @property
    def rank(self):
        return len(self._pivots)

    def member(self, v):
        if not self._pivots:
            return all(int(x) == 0 for x in v)
        return _backsolve(self._basis, self._pivots, v) is not None


def kernel_mod(A, m):
    """Generator rows of ``{x in Z_m^r : x @ A == 0 (mod m)}``.

    Lifts to an integer kernel computation by stacking ``m * I`` below ``A``;
    the x-parts of the kernel basis generate all solutions mod m.
    """
    A = as_int_matrix(A) if not (isinstance(A, np.ndarray) and A.dtype == object) else A
    r, c = A.shape
    stacked = np.vstack([A, m * eye_int(c)])
    K = left_kernel(stacked)
    gens = []
    for row in K:
        x = np.array([int(v) % m for v in row[:r]], dtype=object)
        if any(v != 0 for v in x):
            gens.append(x)
    return gens
