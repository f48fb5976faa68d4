"""Classical invariant functions of the quadratic chainsaw quiver, the
explicit low-rank relation suites, and the Lie-Kirillov-Kostant Poisson
bracket on the dual of the folded Lie algebra.

Path invariants with vertex indices outside the stored window use the
adjoint-derived matrices; the convention is the same one the quantum side
uses, so the two modules cross-check each other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from gmpy2 import mpq

from . import linalg as la
from . import quiver as qv
from .liealg import K_A, K_AP, K_B, K_P, K_Q
from .quadratic import DimVector, QuadraticSetup


# ---------------------------------------------------------------------------
# invariant labels and evaluation on quiver points

@dataclass(frozen=True)
class InvariantLabel:
    """a(l, r) = Tr A_l^r;  b(l, s) = q_l A_l^s p_l;
    path b(k, l; s_k..s_l) = q_l A_l^{s_l} B_{l-1} ... B_k A_k^{s_k} p_k;
    loop c(k, l; s_k..s_l) with l = k + m N."""

    kind: str  # "a" | "b" | "path" | "loop"
    k: int
    l: int
    s: tuple

    def __post_init__(self):
        if self.kind not in ("a", "b", "path", "loop"):
            raise ValueError(f"unknown invariant kind {self.kind!r}")
        if self.kind in ("path", "loop"):
            if self.k > self.l:
                raise ValueError("path needs k <= l")
            if len(self.s) != self.l - self.k + 1:
                raise ValueError("need one exponent per visited vertex")


def a_label(l, r):
    return InvariantLabel("a", l, l, (r,))


def b_label(l, s):
    return InvariantLabel("b", l, l, (s,))


def path_label(k, l, s):
    return InvariantLabel("path", k, l, tuple(s))


def loop_label(k, l, s):
    lab = InvariantLabel("loop", k, l, tuple(s))
    if (l - k) % 1 != 0:
        raise ValueError("bad loop")
    return lab


def _mat_pow(a, k):
    out = la.eye(len(a))
    for _ in range(k):
        out = la.mat_mul(out, a)
    return out


def _path_matrix(pt: qv.QuiverPoint, k, l, s):
    """A_l^{s_l} B_{l-1} A_{l-1}^{s_{l-1}} ... B_k A_k^{s_k} as a matrix
    V_k -> V_l (indices mod N, derived matrices beyond the window)."""
    m = _mat_pow(pt.A_at(k), s[0])
    for v in range(k + 1, l + 1):
        m = la.mat_mul(pt.B_at(v - 1), m)
        m = la.mat_mul(_mat_pow(pt.A_at(v), s[v - k]), m)
    return m


def eval_invariant(label: InvariantLabel, pt: qv.QuiverPoint):
    """Exact value of the invariant at the point (scalar)."""
    if label.kind == "a":
        return la.trace(_mat_pow(pt.A_at(label.l), label.s[0]))
    if label.kind == "b":
        k = l = label.l
    else:
        k, l = label.k, label.l
    if label.kind == "loop":
        if (label.l - label.k) % pt.setup.N != 0:
            raise ValueError("loop needs l = k mod N")
        m = la.mat_mul(pt.B_at(label.l), _path_matrix(pt, k, l, label.s))
        return la.trace(m)
    m = _path_matrix(pt, k, l, label.s)
    v = la.mat_vec(m, pt.p_at(k))
    q = pt.q_at(l)
    out = mpq(0)
    for x, y in zip(q, v):
        out += x * y
    return out


# ---------------------------------------------------------------------------
# the three explicit example suites

def run_c1_suite(d, trials, seed, bound=6):
    """Outer-vertex case (all inner dimensions zero): evidence that the
    2d basic invariants are algebraically independent, via the exact rank of
    their Jacobian in (A, p) at sampled points."""
    setup = QuadraticSetup(DimVector(2, (0, d)))
    failures = []
    for t in range(trials):
        pt = qv.sample_point(setup, bound, seed=(seed, t))
        # coordinates: symmetric entries of A, entries of p
        slots = [("A", i, j) for i in range(d) for j in range(i, d)] + [("p", i, 0) for i in range(d)]
        base = []
        for kind, i, j in slots:
            base.append(pt.A[1][i][j] if kind == "A" else pt.p[1][i])
        cols = []
        for t2 in range(len(slots)):
            A = [[la.Dual(pt.A[1][i][j]) for j in range(d)] for i in range(d)]
            p = [la.Dual(x) for x in pt.p[1]]
            kind, i, j = slots[t2]
            if kind == "A":
                A[i][j] = A[i][j] + la.Dual(0, 1)
                if i != j:
                    A[j][i] = A[j][i] + la.Dual(0, 1)
            else:
                p[i] = p[i] + la.Dual(0, 1)
            funs = []
            Ak = [[la.Dual(1 if a == b else 0) for b in range(d)] for a in range(d)]
            for r in range(1, d + 1):
                Ak = la.mat_mul(Ak, A)
                tr = Ak[0][0]
                for a in range(1, d):
                    tr = tr + Ak[a][a]
                funs.append(tr)
            Am = [[la.Dual(1 if a == b else 0) for b in range(d)] for a in range(d)]
            for s in range(d):
                w = la.mat_vec(Am, p)
                val = la.Dual(0)
                for x, y in zip(p, w):
                    val = val + x * y
                funs.append(val)
                Am = la.mat_mul(Am, A)
            cols.append([f.du for f in funs])
        jac = la.transpose(cols)
        r = la.rank(jac)
        if r != 2 * d:
            failures.append((t, r))
    return failures


def run_c2_suite(trials, seed, bound=6):
    """N=4, d=(0,1,1): the three quadratic relations among the six basic
    invariants, checked exactly on sampled locus points."""
    setup = QuadraticSetup(DimVector(4, (0, 1, 1)))
    failures = []
    for t in range(trials):
        pt = qv.sample_point(setup, bound, seed=(seed, t))
        A1, A2, B1 = pt.A[1][0][0], pt.A[2][0][0], pt.B[1][0][0]
        p1, p2 = pt.p[1][0], pt.p[2][0]
        b12 = p2 * p2
        b01 = p1 * pt.p_at(3)[0]
        b02 = p2 * B1 * p1
        b03 = B1 * B1 * p1 * p1
        checks = [
            ("b02*(A1-A2)=b01*b12", b02 * (A1 - A2) - b01 * b12),
            ("b03*(A1-A2)=b01*b02", b03 * (A1 - A2) - b01 * b02),
            ("b02^2=b12*b03", b02 * b02 - b12 * b03),
        ]
        for name, v in checks:
            if v != 0:
                failures.append((t, name, v))
    return failures


def c2_witness_point():
    """The 1x1 witness: A_1=3, A_2=1, B_1=1, p_1=5, p_2=2, p_3=1."""
    setup = QuadraticSetup(DimVector(4, (0, 1, 1)))
    A = {0: [], 1: [[mpq(3)]], 2: [[mpq(1)]]}
    B = {0: [[]], 1: [[mpq(1)]]}
    # p_3 = q_1 under the sign table, so q_1 carries the p_3 value
    p = {1: [mpq(5)], 2: [mpq(2)]}
    q = {0: [], 1: [mpq(1)]}
    return qv.QuiverPoint(setup, A, B, p, q)


def run_c1tilde_suite(trials, seed, bound=6):
    """N=2, d=(1,1): the single relation b_1 b_0 - s (A_0 - A_1)^2 = 0."""
    setup = QuadraticSetup(DimVector(2, (1, 1)))
    failures = []
    for t in range(trials):
        pt = qv.sample_point(setup, bound, seed=(seed, t))
        A0, A1, B0 = pt.A[0][0][0], pt.A[1][0][0], pt.B[0][0][0]
        b1 = pt.p[1][0] ** 2
        b0 = pt.p_at(0)[0] ** 2
        s = B0 * B0
        v = b1 * b0 - s * (A0 - A1) ** 2
        if v != 0:
            failures.append((t, v))
    return failures


def invariance_check(labels, pt, seeds, reflect_half=True):
    """eval_invariant must be constant along the group action."""
    base = [eval_invariant(lab, pt) for lab in labels]
    failures = []
    for i, s in enumerate(seeds):
        g = qv.random_group_element(pt.setup, seed=s, reflect=reflect_half and i % 2 == 1)
        pt2 = qv.act(g, pt)
        for lab, v in zip(labels, base):
            w = eval_invariant(lab, pt2)
            if w != v:
                failures.append((s, lab, v, w))
    return failures


# ---------------------------------------------------------------------------
# polynomial functions on the dual space and the Kirillov bracket

class PolyFun:
    """Commutative polynomial in the coordinate symbols of the dual space
    (symbols indexed by the Lie presentation's generator ids)."""

    __slots__ = ("pres", "c")

    def __init__(self, pres, coeffs=None):
        self.pres = pres
        self.c = {m: v for m, v in (coeffs or {}).items() if v != 0}

    @classmethod
    def coord(cls, pres, g):
        return cls(pres, {(g,): mpq(1)})

    @classmethod
    def const(cls, pres, v):
        v = mpq(v)
        return cls(pres, {(): v} if v else {})

    def add(self, o):
        out = dict(self.c)
        for m, v in o.c.items():
            w = out.get(m, mpq(0)) + v
            if w == 0:
                out.pop(m, None)
            else:
                out[m] = w
        return PolyFun(self.pres, out)

    def sub(self, o):
        return self.add(o.scale(-1))

    def scale(self, k):
        k = mpq(k)
        return PolyFun(self.pres, {m: k * v for m, v in self.c.items()} if k else {})

    def mul(self, o):
        out = {}
        for m1, v1 in self.c.items():
            for m2, v2 in o.c.items():
                m = tuple(sorted(m1 + m2))
                w = out.get(m, mpq(0)) + v1 * v2
                if w == 0:
                    out.pop(m, None)
                else:
                    out[m] = w
        return PolyFun(self.pres, out)

    def partial(self, g):
        out = {}
        for m, v in self.c.items():
            cnt = m.count(g)
            if not cnt:
                continue
            i = m.index(g)
            mm = m[:i] + m[i + 1:]
            w = out.get(mm, mpq(0)) + cnt * v
            if w == 0:
                out.pop(mm, None)
            else:
                out[mm] = w
        return PolyFun(self.pres, out)

    def support_gens(self):
        s = set()
        for m in self.c:
            s.update(m)
        return s

    def evaluate(self, point):
        """point: dict gid -> rational."""
        out = mpq(0)
        for m, v in self.c.items():
            t = v
            for g in m:
                t *= point[g]
            out += t
        return out

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, o):
        return self.pres is o.pres and self.c == o.c


def kirillov_bracket(f: PolyFun, g: PolyFun) -> PolyFun:
    """{f, g}(xi) = <xi, [d_xi f, d_xi g]> expanded with the structure
    constants; bilinear, antisymmetric, satisfies Leibniz and Jacobi."""
    pres = f.pres
    out = PolyFun(pres)
    gens_f = sorted(f.support_gens())
    gens_g = sorted(g.support_gens())
    for a in gens_f:
        fa = f.partial(a)
        if not fa:
            continue
        for b in gens_g:
            comb = pres.bracket(a, b)
            if not comb:
                continue
            gb = g.partial(b)
            if not gb:
                continue
            lin = PolyFun(pres, {(z,): c for z, c in comb.items()})
            out = out.add(fa.mul(gb).mul(lin))
    return out


def symbol(pres, ncpoly) -> PolyFun:
    """Leading (top PBW degree) symbol of an NCPoly, as a commutative
    polynomial in the coordinate symbols."""
    if not ncpoly:
        return PolyFun(pres)
    top = max(len(m) for m in ncpoly)
    return PolyFun(pres, {m: c for m, c in ncpoly.items() if len(m) == top})


def full_symbol(pres, ncpoly) -> PolyFun:
    """The NCPoly read as a commutative polynomial (all degrees)."""
    out = {}
    for m, c in ncpoly.items():
        mm = tuple(sorted(m))
        out[mm] = out.get(mm, mpq(0)) + c
    return PolyFun(pres, out)


def embed_quiver_point(pres, dims: DimVector, pt: qv.QuiverPoint):
    """Coordinates of the coadjoint point corresponding to a locus quiver
    point: A' = -A at every vertex carrying both copies, and the q side is
    negated so the defining equations hold on the nose."""
    point = {}
    for g, (kind, l, i, j) in enumerate(pres.labels):
        if kind == K_A:
            point[g] = pt.A[l][i][j]
        elif kind == K_AP:
            point[g] = -pt.A[l][i][j]
        elif kind == K_B:
            point[g] = pt.B[l][i][j]
        elif kind == K_P:
            point[g] = pt.p[l][i]
        else:
            point[g] = -pt.q[l][j]
    return point


def classical_r_invariance(uea, dims: DimVector):
    """{x^, r} stays in the linear span of the relation entries and the
    reduction subalgebra, for every coordinate x and relation entry r."""
    from .pbw import QuotientOracle, gd_entries, r_entries

    pres = uea.pres
    rs = [full_symbol(pres, r) for r in r_entries(uea, dims)]
    gd = [full_symbol(pres, g) for g in gd_entries(uea, dims)]
    ech = {}
    for p in rs + gd:
        QuotientOracle._insert(ech, dict(p.c))
    failures = []
    for g in range(pres.ngens):
        xg = PolyFun.coord(pres, g)
        for k, r in enumerate(rs):
            br = kirillov_bracket(xg, r)
            if QuotientOracle._reduce(ech, dict(br.c)):
                failures.append((pres.name(g), k))
    return failures
