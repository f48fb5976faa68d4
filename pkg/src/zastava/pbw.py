"""PBW normal forms in the enveloping algebra and the graded left-ideal
membership oracle that decides equality in the quantum Hamiltonian reduction.

An NCPoly is a dict {monomial: coefficient} with monomials non-decreasing
tuples of generator ids (the PBW basis).  Multiplication rewrites adjacent
out-of-order pairs xy -> yx + [x,y]; the per-letter products are memoized,
which is what makes the relation suites tractable.

Membership in the left ideal U*(R + g_d) is decided degree- and
weight-sliced: `verified` is a proof, `inconclusive` is not a refutation.
"""

from __future__ import annotations

from gmpy2 import mpq

from .liealg import K_A, K_AP, K_B, K_P, K_Q, LiePresentation, chainsaw_presentation
from .quadratic import DimVector


class UEA:
    def __init__(self, pres: LiePresentation):
        self.pres = pres
        self._step = {}

    # -- basic constructors ------------------------------------------------
    def zero(self):
        return {}

    def one(self):
        return {(): mpq(1)}

    def gen(self, g):
        return {(g,): mpq(1)}

    def scalar(self, c):
        c = mpq(c)
        return {(): c} if c != 0 else {}

    # -- linear structure ----------------------------------------------------
    @staticmethod
    def add_into(acc, f, c=mpq(1)):
        for m, v in f.items():
            w = acc.get(m, mpq(0)) + c * v
            if w == 0:
                acc.pop(m, None)
            else:
                acc[m] = w
        return acc

    def add(self, f, g):
        return self.add_into(dict(f), g)

    def sub(self, f, g):
        return self.add_into(dict(f), g, mpq(-1))

    def scale(self, c, f):
        c = mpq(c)
        if c == 0:
            return {}
        return {m: c * v for m, v in f.items()}

    # -- multiplication ------------------------------------------------------
    def _mono_times_gid(self, m, g):
        """Normal form of (PBW monomial m) * generator g."""
        key = (m, g)
        hit = self._step.get(key)
        if hit is not None:
            return hit
        if not m or m[-1] <= g:
            out = {m + (g,): mpq(1)}
        else:
            x = m[-1]
            rest = m[:-1]
            out = {}
            for mono, c in self._mono_times_gid(rest, g).items():
                mono2 = mono + (x,)
                out[mono2] = out.get(mono2, mpq(0)) + c
            for z, cz in self.pres.bracket(x, g).items():
                for mono, c in self._mono_times_gid(rest, z).items():
                    w = out.get(mono, mpq(0)) + cz * c
                    if w == 0:
                        out.pop(mono, None)
                    else:
                        out[mono] = w
        self._step[key] = out
        return out

    def poly_times_gid(self, f, g):
        out = {}
        for m, c in f.items():
            self.add_into(out, self._mono_times_gid(m, g), c)
        return out

    def mul(self, f, g):
        out = {}
        for mg, cg in g.items():
            cur = self.scale(cg, f)
            for letter in mg:
                cur = self.poly_times_gid(cur, letter)
            self.add_into(out, cur)
        return out

    def mul_many(self, *fs):
        acc = self.one()
        for f in fs:
            acc = self.mul(acc, f)
        return acc

    def nf_word(self, word):
        """Normal form of a product of generators (arbitrary order)."""
        cur = self.one()
        for g in word:
            cur = self.poly_times_gid(cur, g)
        return cur

    def nf_word_leftmost(self, word):
        """Independent normalization strategy (leftmost out-of-order swap),
        used to test confluence against nf_word."""
        work = {tuple(word): mpq(1)}
        out = {}
        while work:
            w, c = work.popitem()
            pos = None
            for i in range(len(w) - 1):
                if w[i] > w[i + 1]:
                    pos = i
                    break
            if pos is None:
                v = out.get(w, mpq(0)) + c
                if v == 0:
                    out.pop(w, None)
                else:
                    out[w] = v
                continue
            swapped = w[:pos] + (w[pos + 1], w[pos]) + w[pos + 2:]
            v = work.get(swapped, mpq(0)) + c
            if v == 0:
                work.pop(swapped, None)
            else:
                work[swapped] = v
            for z, cz in self.pres.bracket(w[pos], w[pos + 1]).items():
                short = w[:pos] + (z,) + w[pos + 2:]
                v = work.get(short, mpq(0)) + c * cz
                if v == 0:
                    work.pop(short, None)
                else:
                    work[short] = v
        return out

    def bracket_poly(self, f, g):
        return self.sub(self.mul(f, g), self.mul(g, f))

    # -- grading ---------------------------------------------------------------
    def mono_weight(self, m):
        w = list(self.pres.zero_weight)
        for g in m:
            for k, x in enumerate(self.pres.weights[g]):
                w[k] += x
        return tuple(w)

    def weight(self, f):
        """Common weight of a homogeneous poly (None for 0); raises if mixed."""
        w = None
        for m in f:
            wm = self.mono_weight(m)
            if w is None:
                w = wm
            elif w != wm:
                raise ValueError("polynomial is not weight-homogeneous")
        return w

    def weight_components(self, f):
        comps = {}
        for m, c in f.items():
            comps.setdefault(self.mono_weight(m), {})[m] = c
        return comps

    @staticmethod
    def degree(f):
        return max((len(m) for m in f), default=0)


# ---------------------------------------------------------------------------
# matrices with NCPoly entries

def pmat(uea, rows):
    return [list(r) for r in rows]


def pmat_mul(uea, a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if b else 0
    out = [[uea.zero() for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc = {}
            for t in range(k):
                uea.add_into(acc, uea.mul(a[i][t], b[t][j]))
            out[i][j] = acc
    return out


def pmat_add(uea, a, b):
    return [[uea.add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def pmat_scale(uea, c, a):
    return [[uea.scale(c, x) for x in r] for r in a]


def pmat_transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def pmat_trace(uea, a):
    acc = {}
    for i in range(len(a)):
        uea.add_into(acc, a[i][i])
    return acc


def pmat_power(uea, a, k):
    n = len(a)
    out = [[uea.one() if i == j else uea.zero() for j in range(n)] for i in range(n)]
    for _ in range(k):
        out = pmat_mul(uea, out, a)
    return out


def gen_matrix(uea, kind, l, nrows, ncols):
    idx = uea.pres.index
    if kind == K_Q:
        return [[uea.gen(idx[(K_Q, l, 0, j)]) for j in range(ncols)]]
    if kind == K_P:
        return [[uea.gen(idx[(K_P, l, i, 0)])] for i in range(nrows)]
    return [[uea.gen(idx[(kind, l, i, j)]) for j in range(ncols)] for i in range(nrows)]


# ---------------------------------------------------------------------------
# the reduction ideal

def r_entry_matrices(uea, dims: DimVector):
    """Per window index l, the matrix B_l A_l + A'_{l+1} B_l + p_{l+1} q_l."""
    out = []
    for l in range(dims.half):
        dl, dw = dims.at(l), dims.at(l + 1)
        A = gen_matrix(uea, K_A, l, dl, dl)
        Ap = gen_matrix(uea, K_AP, l + 1, dw, dw)
        B = gen_matrix(uea, K_B, l, dw, dl)
        p = gen_matrix(uea, K_P, l + 1, dw, 1)
        q = gen_matrix(uea, K_Q, l, 1, dl)
        m = pmat_add(uea, pmat_mul(uea, B, A), pmat_mul(uea, Ap, B))
        m = pmat_add(uea, m, pmat_mul(uea, p, q))
        out.append(m)
    return out


def r_entries(uea, dims: DimVector):
    out = []
    for m in r_entry_matrices(uea, dims):
        for r in m:
            out.extend(x for x in r if x)
    return out


def gd_entries(uea, dims: DimVector):
    """Basis of the reduction subalgebra: diagonal gl at the middle vertices,
    the orthogonal subalgebras at the outer ones."""
    idx = uea.pres.index
    out = []
    for l in dims.I0:
        n = dims.at(l)
        for i in range(n):
            for j in range(n):
                out.append(uea.add(uea.gen(idx[(K_A, l, i, j)]), uea.gen(idx[(K_AP, l, i, j)])))
    n0 = dims.at(0)
    for i in range(n0):
        for j in range(i + 1, n0):
            out.append(uea.sub(uea.gen(idx[(K_A, 0, i, j)]), uea.gen(idx[(K_A, 0, j, i)])))
    nh = dims.at(dims.half)
    for i in range(nh):
        for j in range(i + 1, nh):
            out.append(
                uea.sub(uea.gen(idx[(K_AP, dims.half, i, j)]), uea.gen(idx[(K_AP, dims.half, j, i)]))
            )
    return out


# ---------------------------------------------------------------------------
# monomial enumeration by weight

def monomials_with_weight(pres: LiePresentation, target, maxdeg):
    """All PBW monomials (sorted gid tuples) of degree <= maxdeg whose letter
    weights sum to `target`."""
    letters = list(range(pres.ngens))
    weights = [pres.weights[g] for g in letters]
    k = pres.nweights
    # suffix bounds for pruning: the most a single remaining letter can move
    # each weight component, up or down
    maxpos = [[0] * k for _ in range(len(letters) + 1)]
    minneg = [[0] * k for _ in range(len(letters) + 1)]
    for i in range(len(letters) - 1, -1, -1):
        for c in range(k):
            maxpos[i][c] = max(maxpos[i + 1][c], weights[i][c])
            minneg[i][c] = min(minneg[i + 1][c], weights[i][c])
    def rec2(i, rem, deg_left, stack):
        if i == len(letters):
            if all(x == 0 for x in rem):
                out.append(tuple(stack))
            return
        for c in range(k):
            if rem[c] > deg_left * maxpos[i][c] or rem[c] < deg_left * minneg[i][c]:
                return
        w = weights[i]
        r2 = list(rem)
        for cnt in range(deg_left + 1):
            rec2(i + 1, r2, deg_left - cnt, stack + [letters[i]] * cnt)
            for c in range(k):
                r2[c] -= w[c]

    out = []
    rec2(0, list(target), maxdeg, [])
    return out


# ---------------------------------------------------------------------------
# membership oracle

VERIFIED = "verified"
INCONCLUSIVE = "inconclusive"
REFUTED = "refuted"

_MONO_KEY = lambda m: (len(m), m)


class QuotientOracle:
    """Left-ideal membership in U*(R + g_d), weight-sliced; the slices'
    echelon bases are cached across candidates."""

    def __init__(self, uea: UEA, dims: DimVector, extra_bound: int = 2):
        self.uea = uea
        self.dims = dims
        self.extra_bound = extra_bound
        gens = [(g, uea.weight(g), uea.degree(g)) for g in r_entries(uea, dims)]
        gens += [(g, uea.weight(g), uea.degree(g)) for g in gd_entries(uea, dims)]
        self.generators = gens
        self._slices = {}

    def _slice(self, weight, bound):
        key = (weight, bound)
        ech = self._slices.get(key)
        if ech is not None:
            return ech
        ech = {}
        for g, wg, dg in self.generators:
            tgt = tuple(a - b for a, b in zip(weight, wg))
            for m in monomials_with_weight(self.uea.pres, tgt, bound - dg):
                row = self.uea.mul({m: mpq(1)}, g)
                self._insert(ech, row)
        self._slices[key] = ech
        return ech

    @staticmethod
    def _insert(ech, row):
        row = dict(row)
        while row:
            piv = max(row, key=_MONO_KEY)
            other = ech.get(piv)
            if other is None:
                c = row[piv]
                ech[piv] = {m: v / c for m, v in row.items()}
                return
            c = row[piv]
            for m, v in other.items():
                w = row.get(m, mpq(0)) - c * v
                if w == 0:
                    row.pop(m, None)
                else:
                    row[m] = w

    @staticmethod
    def _reduce(ech, row):
        row = dict(row)
        while row:
            piv = max(row, key=_MONO_KEY)
            other = ech.get(piv)
            if other is None:
                return row
            c = row[piv]
            for m, v in other.items():
                w = row.get(m, mpq(0)) - c * v
                if w == 0:
                    row.pop(m, None)
                else:
                    row[m] = w
        return row

    def membership(self, x, bound=None):
        """Is x in the left ideal, proven up to the given PBW degree bound?"""
        if not x:
            return VERIFIED
        if set(x) == {()}:
            return REFUTED  # nonzero scalars never lie in the ideal
        if bound is None:
            bound = UEA.degree(x) + self.extra_bound
        for w, comp in self.uea.weight_components(x).items():
            ech = self._slice(w, bound)
            if self._reduce(ech, comp):
                return INCONCLUSIVE
        return VERIFIED

    def quotient_equal(self, f, g, bound=None):
        return self.membership(self.uea.sub(f, g), bound)


# ---------------------------------------------------------------------------
# linear-span checks (ad-invariance of the relation space)

def _span_echelon(uea, polys):
    ech = {}
    for p in polys:
        QuotientOracle._insert(ech, p)
    return ech


def quantum_r_invariance(uea, dims: DimVector):
    """For every generator x and every entry r of the relation matrices,
    check [x, r] lies in the rational span of the relation entries together
    with the reduction subalgebra.  Returns a list of failures."""
    rs = r_entries(uea, dims)
    span = _span_echelon(uea, rs + gd_entries(uea, dims))
    failures = []
    for g in range(uea.pres.ngens):
        xg = uea.gen(g)
        for k, r in enumerate(rs):
            br = uea.bracket_poly(xg, r)
            if QuotientOracle._reduce(span, br):
                failures.append((uea.pres.name(g), k))
    return failures


def build_uea(dims: DimVector) -> UEA:
    return UEA(chainsaw_presentation(dims))
