"""Points of the quadratic chainsaw quiver: exact sampling on the moment-map
locus, group action, stability, the factorization map, Jacobian probes, and
the folding involution on the unfolded (type A) coadjoint data.

Only the independent window is stored (A_l for 0<=l<=N/2, B_l for 0<=l<N/2,
p_l for 0<l<=N/2, q_l for 0<=l<N/2); everything at other vertices is derived
through the adjoint calculus, so the selfadjointness constraints hold by
construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from gmpy2 import mpq

from . import linalg as la
from .quadratic import DimVector, QuadraticSetup


@dataclass
class QuiverPoint:
    setup: QuadraticSetup
    A: dict  # l in 0..N/2 -> d_l x d_l (symmetric at 0 and N/2)
    B: dict  # l in 0..N/2-1 -> d_{l+1} x d_l
    p: dict  # l in 1..N/2 -> vector of length d_l
    q: dict  # l in 0..N/2-1 -> covector of length d_l

    def dims(self):
        return self.setup.dims

    # full-cycle accessors; indices mod N, derived half via adjoints
    def A_at(self, m):
        m %= self.setup.N
        if m <= self.setup.N // 2:
            return self.A[m]
        return self.setup.adjoint_A(self.setup.N - m, self.A[self.setup.N - m])

    def B_at(self, m):
        m %= self.setup.N
        if m < self.setup.N // 2:
            return self.B[m]
        return self.setup.adjoint_B(self.setup.N - 1 - m, self.B[(self.setup.N - 1 - m) % self.setup.N])

    def p_at(self, m):
        m %= self.setup.N
        if 1 <= m <= self.setup.N // 2:
            return self.p[m]
        return self.setup.derive_qp((self.setup.N - m) % self.setup.N, self.q[(self.setup.N - m) % self.setup.N])

    def q_at(self, m):
        m %= self.setup.N
        if m < self.setup.N // 2:
            return self.q[m]
        return self.setup.derive_pq(self.setup.N - m, self.p[self.setup.N - m])


def moment_residual_at(pt: QuiverPoint, l) -> list:
    """mu_l = A_{l+1} B_l - B_l A_l + p_{l+1} q_l, for any l in Z/NZ."""
    t = la.mat_sub(la.mat_mul(pt.A_at(l + 1), pt.B_at(l)), la.mat_mul(pt.B_at(l), pt.A_at(l)))
    return la.mat_add(t, la.outer(pt.p_at(l + 1), pt.q_at(l)))


def moment_residuals(pt: QuiverPoint):
    """The independent window l = 0..N/2-1; the remaining equations are
    adjoints of these (tested, not assumed)."""
    return [moment_residual_at(pt, l) for l in range(pt.setup.N // 2)]


def on_locus(pt: QuiverPoint) -> bool:
    return all(la.is_zero_mat(m) for m in moment_residuals(pt))


# ---------------------------------------------------------------------------
# sampling

def _rand_mat(rng, n, m, bound):
    return [[mpq(rng.randint(-bound, bound)) for _ in range(m)] for _ in range(n)]


def _rand_sym(rng, n, bound):
    a = la.zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            v = mpq(rng.randint(-bound, bound))
            a[i][j] = v
            a[j][i] = v
    return a


def _solve_sylvester(A1, A0, C):
    """Unique B with A1 B - B A0 = C, via the vectorized Kronecker system."""
    n, m = len(A1), len(A0)
    if n == 0 or m == 0:
        return la.zeros(n, m)
    # vec(B) row-major: rows of M act on entries B[i][j], index i*m+j
    M = la.mat_sub(la.kron(A1, la.eye(m)), la.kron(la.eye(n), la.transpose(A0)))
    rhs = [C[i][j] for i in range(n) for j in range(m)]
    x = la.solve(M, rhs)
    return [[x[i * m + j] for j in range(m)] for i in range(n)]


def sample_point(setup: QuadraticSetup, bound: int, seed, max_tries: int = 200) -> QuiverPoint:
    """Exact point on the moment-map locus: draw A (symmetric at the outer
    vertices), p, q with integer entries, reject until adjacent characteristic
    polynomials are coprime, then solve each window equation for B.
    Deterministic in (bound, seed)."""
    if bound < 2:
        raise ValueError("bound must be >= 2")
    rng = random.Random(seed)
    dims = setup.dims
    half = setup.N // 2
    for _ in range(max_tries):
        A = {}
        for l in range(half + 1):
            n = dims.at(l)
            A[l] = _rand_sym(rng, n, bound) if l in (0, half) else _rand_mat(rng, n, n, bound)
        ok = True
        for l in range(half):
            if dims.at(l) == 0 or dims.at(l + 1) == 0:
                continue
            if not la.poly_gcd_is_const(la.charpoly(A[l]), la.charpoly(A[l + 1])):
                ok = False
                break
        if not ok:
            continue
        p = {l: [mpq(rng.randint(-bound, bound)) for _ in range(dims.at(l))] for l in range(1, half + 1)}
        q = {l: [mpq(rng.randint(-bound, bound)) for _ in range(dims.at(l))] for l in range(half)}
        B = {}
        for l in range(half):
            rhs = la.mat_neg(la.outer(p[l + 1], q[l]))
            B[l] = _solve_sylvester(A[l + 1], A[l], rhs)
        pt = QuiverPoint(setup, A, B, p, q)
        assert on_locus(pt)
        return pt
    raise RuntimeError(f"rejection budget exhausted after {max_tries} tries; reseed")


# ---------------------------------------------------------------------------
# group action

@dataclass
class GroupElement:
    """g_l for l in I; orthogonal at the outer vertices, invertible at the
    middle ones.  The components at the derived vertices are (g_l^*)^{-1},
    which in the fixed bases is (g_l^T)^{-1}."""

    setup: QuadraticSetup
    g: dict  # l in I -> matrix

    def at(self, m):
        m %= self.setup.N
        if m <= self.setup.N // 2:
            return self.g[m]
        return la.inverse(la.transpose(self.g[self.setup.N - m]))


def act(g: GroupElement, pt: QuiverPoint) -> QuiverPoint:
    half = pt.setup.N // 2
    A = {l: la.mat_mul(la.mat_mul(g.at(l), pt.A[l]), la.inverse(g.at(l))) for l in pt.A}
    B = {l: la.mat_mul(la.mat_mul(g.at(l + 1), pt.B[l]), la.inverse(g.at(l))) for l in pt.B}
    p = {l: la.mat_vec(g.at(l), pt.p[l]) for l in pt.p}
    q = {l: la.mat_vec(la.transpose(la.inverse(g.at(l))), pt.q[l]) for l in pt.q}
    return QuiverPoint(pt.setup, A, B, p, q)


def cayley_orthogonal(rng, n, bound=3, reflect=False):
    """Rational orthogonal matrix from the Cayley transform of a random
    antisymmetric matrix; optional reflection covers the other component."""
    while True:
        s = la.zeros(n, n)
        for i in range(n):
            for j in range(i + 1, n):
                v = mpq(rng.randint(-bound, bound), rng.randint(1, bound))
                s[i][j] = v
                s[j][i] = -v
        try:
            g = la.mat_mul(la.mat_sub(la.eye(n), s), la.inverse(la.mat_add(la.eye(n), s)))
        except ValueError:
            continue
        if reflect and n > 0:
            for i in range(n):
                g[i][0] = -g[i][0]
        return g


def random_group_element(setup: QuadraticSetup, seed, bound=3, reflect=False) -> GroupElement:
    rng = random.Random(seed)
    dims = setup.dims
    g = {}
    for l in dims.I:
        n = dims.at(l)
        if l in dims.I1:
            g[l] = cayley_orthogonal(rng, n, bound, reflect=reflect)
        else:
            while True:
                m = _rand_mat(rng, n, n, bound)
                try:
                    la.inverse(m)
                except ValueError:
                    continue
                g[l] = m
                break
    return GroupElement(setup, g)


# ---------------------------------------------------------------------------
# stability / costability (over the full cyclic quiver)

def _row_space(rows):
    red, pivots = la.rref(rows) if rows else ([], [])
    return [r for r in red[: len(pivots)]]


def is_stable(pt: QuiverPoint) -> bool:
    """Smallest A,B-invariant graded subspace containing all im p_l is V."""
    N = pt.setup.N
    dims = pt.setup.dims
    span = {l: [] for l in range(N)}
    for l in range(N):
        if dims.at(l):
            v = pt.p_at(l)
            if any(x != 0 for x in v):
                span[l].append(list(v))
    changed = True
    while changed:
        changed = False
        for l in range(N):
            if not span[l]:
                continue
            new_l = [la.mat_vec(pt.A_at(l), v) for v in span[l]]
            new_next = [la.mat_vec(pt.B_at(l), v) for v in span[l]] if dims.at(l + 1) else []
            for tgt, vecs in ((l, new_l), ((l + 1) % N, new_next)):
                old = _row_space(span[tgt])
                cand = _row_space(old + vecs)
                if len(cand) > len(old):
                    span[tgt] = cand
                    changed = True
    return all(len(_row_space(span[l])) == dims.at(l) for l in range(N))


def is_costable(pt: QuiverPoint) -> bool:
    """Largest A,B-invariant graded subspace inside all Ker q_l is zero."""
    N = pt.setup.N
    dims = pt.setup.dims
    # ann[l]: rows of a matrix whose kernel is the current candidate W_l
    ann = {}
    for l in range(N):
        ann[l] = [list(pt.q_at(l))] if dims.at(l) else []
    while True:
        changed = False
        for l in range(N):
            n = dims.at(l)
            if n == 0:
                continue
            rows = list(ann[l])
            rows += [r for r in _compose_rows(ann[l], pt.A_at(l))]
            rows += [r for r in _compose_rows(ann[(l + 1) % N], pt.B_at(l))]
            new = _row_space([r for r in rows if any(x != 0 for x in r)])
            if len(new) > len(_row_space(ann[l])):
                ann[l] = new
                changed = True
        if not changed:
            break
    return all(len(la.nullspace(ann[l] or [[mpq(0)] * dims.at(l)])) == 0 for l in range(N) if dims.at(l))


def _compose_rows(rows, m):
    # covector rows composed with the map m (row . m)
    if not rows or not m or not m[0]:
        return []
    mt = la.transpose(m)
    return [la.mat_vec(mt, r) for r in rows]


# ---------------------------------------------------------------------------
# factorization morphism

def upsilon(pt: QuiverPoint):
    """Characteristic polynomials of A_l for l in I (monic, highest first)."""
    return tuple(tuple(la.charpoly(pt.A[l])) for l in pt.setup.dims.I)


# ---------------------------------------------------------------------------
# Jacobian probes (exact, via dual numbers)

def coordinate_slots(dims: DimVector):
    """Independent coordinates: symmetric A-entries at the outer vertices,
    all entries elsewhere, then B, p, q windows."""
    half = dims.half
    slots = []
    for l in range(half + 1):
        n = dims.at(l)
        if l in (0, half):
            slots += [("A", l, i, j) for i in range(n) for j in range(i, n)]
        else:
            slots += [("A", l, i, j) for i in range(n) for j in range(n)]
    for l in range(half):
        slots += [("B", l, i, j) for i in range(dims.at(l + 1)) for j in range(dims.at(l))]
    for l in range(1, half + 1):
        slots += [("p", l, i, 0) for i in range(dims.at(l))]
    for l in range(half):
        slots += [("q", l, 0, j) for j in range(dims.at(l))]
    return slots


def point_coords(pt: QuiverPoint):
    vals = []
    for kind, l, i, j in coordinate_slots(pt.setup.dims):
        if kind == "A":
            vals.append(pt.A[l][i][j])
        elif kind == "B":
            vals.append(pt.B[l][i][j])
        elif kind == "p":
            vals.append(pt.p[l][i])
        else:
            vals.append(pt.q[l][j])
    return vals


def point_from_coords(setup: QuadraticSetup, vals):
    dims = setup.dims
    half = dims.half
    it = iter(vals)
    A, B, p, q = {}, {}, {}, {}
    for kind, l, i, j in coordinate_slots(dims):
        v = next(it)
        if kind == "A":
            m = A.setdefault(l, [[None] * dims.at(l) for _ in range(dims.at(l))])
            m[i][j] = v
            if l in (0, half):
                m[j][i] = v
        elif kind == "B":
            B.setdefault(l, [[None] * dims.at(l) for _ in range(dims.at(l + 1))])[i][j] = v
        elif kind == "p":
            p.setdefault(l, [None] * dims.at(l))[i] = v
        else:
            q.setdefault(l, [None] * dims.at(l))[j] = v
    for l in range(half):
        B.setdefault(l, la.zeros(dims.at(l + 1), dims.at(l)))
        q.setdefault(l, [])
    for l in range(1, half + 1):
        p.setdefault(l, [])
    for l in range(half + 1):
        A.setdefault(l, la.zeros(dims.at(l), dims.at(l)))
    return QuiverPoint(setup, A, B, p, q)


def _flat_equations(pt: QuiverPoint, with_charpoly: bool):
    out = []
    for m in moment_residuals(pt):
        out += [x for r in m for x in r]
    if with_charpoly:
        for l in pt.setup.dims.I:
            out += la.charpoly(pt.A[l])[1:]
    return out


def equation_jacobian(pt: QuiverPoint, with_charpoly: bool = False):
    """Exact Jacobian of the window moment equations (and optionally the
    coefficients of the factorization map) w.r.t. the independent coordinates;
    one dual-number evaluation per coordinate."""
    base = point_coords(pt)
    ncols = len(base)
    cols = []
    for k in range(ncols):
        vals = [la.Dual(v, 1 if t == k else 0) for t, v in enumerate(base)]
        dpt = point_from_coords(pt.setup, vals)
        cols.append([e.du if isinstance(e, la.Dual) else mpq(0) for e in _flat_equations(dpt, with_charpoly)])
    if not cols or not cols[0]:
        return []
    return la.transpose(cols)


def jacobian_rank_probe(pt: QuiverPoint):
    """(rank of d(moment equations), expected codimension, Upsilon-fiber
    tangent dimension, expected fiber dimension)."""
    dims = pt.setup.dims
    half = dims.half
    expected_codim = sum(dims.at(l + 1) * dims.at(l) for l in range(half))
    jac = equation_jacobian(pt, with_charpoly=False)
    r = la.rank(jac) if jac else 0
    jac2 = equation_jacobian(pt, with_charpoly=True)
    ncoords = len(coordinate_slots(dims))
    fiber_dim = ncoords - (la.rank(jac2) if jac2 else 0)
    dim_g = sum(dims.at(l) ** 2 for l in dims.I0) + sum(n * (n - 1) // 2 for n in (dims.at(0), dims.at(half)))
    expected_fiber = dim_g + sum(dims.at(l) for l in dims.I)
    return r, expected_codim, fiber_dim, expected_fiber


# ---------------------------------------------------------------------------
# unfolded (type A) coadjoint points and the folding involution

@dataclass
class TypeAPoint:
    """Full-cycle coadjoint data (A_l, A'_l, B_l, p_l, q_l), l in Z/NZ, with
    no selfadjointness constraints."""

    dims: DimVector
    A: dict
    Ap: dict
    B: dict
    p: dict
    q: dict


def type_a_residuals(pt: TypeAPoint):
    """The defining equations B_l A_l + A'_{l+1} B_l + p_{l+1} q_l, all l."""
    N = pt.dims.N
    out = []
    for l in range(N):
        t = la.mat_add(la.mat_mul(pt.B[l], pt.A[l]), la.mat_mul(pt.Ap[(l + 1) % N], pt.B[l]))
        out.append(la.mat_add(t, la.outer(pt.p[(l + 1) % N], pt.q[l])))
    return out


def sample_type_a(dims: DimVector, bound: int, seed, max_tries: int = 200) -> TypeAPoint:
    """Point on the type A locus: random A, A', p, q; each B_l solved from
    B A_l + A'_{l+1} B = -p_{l+1} q_l (solvable when spec A_l and spec(-A'_{l+1})
    are disjoint, enforced by a charpoly-gcd rejection)."""
    rng = random.Random(seed)
    N = dims.N
    for _ in range(max_tries):
        A = {l: _rand_mat(rng, dims.at(l), dims.at(l), bound) for l in range(N)}
        Ap = {l: _rand_mat(rng, dims.at(l), dims.at(l), bound) for l in range(N)}
        ok = True
        for l in range(N):
            if dims.at(l) == 0 or dims.at(l + 1) == 0:
                continue
            negAp = la.mat_neg(Ap[(l + 1) % N])
            if not la.poly_gcd_is_const(la.charpoly(A[l]), la.charpoly(negAp)):
                ok = False
                break
        if not ok:
            continue
        p = {l: [mpq(rng.randint(-bound, bound)) for _ in range(dims.at(l))] for l in range(N)}
        q = {l: [mpq(rng.randint(-bound, bound)) for _ in range(dims.at(l))] for l in range(N)}
        B = {}
        for l in range(N):
            rhs = la.mat_neg(la.outer(p[(l + 1) % N], q[l]))
            # B A_l + A'_{l+1} B = rhs  <=>  (-A'_{l+1}) B - B A_l = -rhs
            B[l] = _solve_sylvester(la.mat_neg(Ap[(l + 1) % N]), A[l], la.mat_neg(rhs))
        pt = TypeAPoint(dims, A, Ap, B, p, q)
        assert all(la.is_zero_mat(m) for m in type_a_residuals(pt))
        return pt
    raise RuntimeError("rejection budget exhausted; reseed")


def sigma_apply(pt: TypeAPoint) -> TypeAPoint:
    """The folding involution: A_l -> -A'_{N-l}^*, A'_l -> -A_{N-l}^*,
    B_l -> B_{N-l-1}^*, p_l -> q_{N-l}^*, q_l -> p_{N-l}^*.  On the unfolded
    space the p/q adjoints are normalized uniformly (p^* plain transpose,
    q^* minus transpose), which preserves the locus and gives
    sigma^2 = (p,q) -> (-p,-q)."""
    N = pt.dims.N
    A = {l: la.mat_neg(la.transpose(pt.Ap[(N - l) % N])) for l in range(N)}
    Ap = {l: la.mat_neg(la.transpose(pt.A[(N - l) % N])) for l in range(N)}
    B = {l: la.transpose(pt.B[(N - l - 1) % N]) for l in range(N)}
    p = {l: [-x for x in pt.q[(N - l) % N]] for l in range(N)}
    q = {l: list(pt.p[(N - l) % N]) for l in range(N)}
    return TypeAPoint(pt.dims, A, Ap, B, p, q)
