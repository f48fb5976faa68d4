"""Exact linear algebra over Q.

Matrices are plain lists of rows with gmpy2.mpq entries (or any ring element
supporting +, -, * and division by int, e.g. Dual below).  Everything here is
exact; no floats anywhere.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

QQ = mpq
ZERO = mpq(0)
ONE = mpq(1)


def zeros(n, m):
    return [[mpq(0) for _ in range(m)] for _ in range(n)]


def eye(n):
    return [[mpq(1 if i == j else 0) for j in range(n)] for i in range(n)]


def shape(a):
    return (len(a), len(a[0]) if a else 0)


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_neg(a):
    return [[-x for x in r] for r in a]


def mat_scale(c, a):
    return [[c * x for x in r] for r in a]


def mat_mul(a, b):
    n, k = shape(a)
    k2, m = shape(b)
    if k != k2:
        raise ValueError(f"shape mismatch {shape(a)} x {shape(b)}")
    out = [[None] * m for _ in range(n)]
    for i in range(n):
        ra = a[i]
        for j in range(m):
            s = ra[0] * b[0][j] if k else mpq(0)
            for t in range(1, k):
                s = s + ra[t] * b[t][j]
            out[i][j] = s
    return out


def transpose(a):
    n, m = shape(a)
    return [[a[i][j] for i in range(n)] for j in range(m)]


def mat_eq(a, b):
    return shape(a) == shape(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_mat(a):
    return all(x == 0 for r in a for x in r)


def col(v):
    """Vector (list) as a one-column matrix."""
    return [[x] for x in v]


def row(v):
    return [list(v)]


def outer(u, v):
    """Column u times row v."""
    return [[x * y for y in v] for x in u]


def mat_vec(a, v):
    out = []
    for r in a:
        s = mpq(0)
        for x, y in zip(r, v):
            s = s + x * y
        out.append(s)
    return out


def trace(a):
    return sum((a[i][i] for i in range(len(a))), mpq(0))


def kron(a, b):
    na, ma = shape(a)
    nb, mb = shape(b)
    out = zeros(na * nb, ma * mb)
    for i in range(na):
        for j in range(ma):
            for k in range(nb):
                for l in range(mb):
                    out[i * nb + k][j * mb + l] = a[i][j] * b[k][l]
    return out


def rref(a):
    """Reduced row echelon form (copy) and pivot column list, over mpq."""
    m = [list(r) for r in a]
    nr, nc = shape(m)
    pivots = []
    r = 0
    for c in range(nc):
        pr = None
        for i in range(r, nr):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m, pivots


def _int_rows(a):
    """Clear denominators row by row; keeps the row space."""
    out = []
    for r in a:
        den = 1
        for x in r:
            den = den * (x.denominator // math.gcd(den, int(x.denominator)))
        out.append([int(x * den) for x in r])
    return out


def rank(a):
    """Exact rank via fraction-free (Bareiss) elimination on integer rows."""
    if not a or not a[0]:
        return 0
    m = _int_rows(a)
    nr, nc = shape(m)
    r = 0
    prev = 1
    for c in range(nc):
        pr = None
        for i in range(r, nr):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == nr:
            break
    return r


def solve(a, b):
    """One exact solution x of a x = b (b a vector); raises if inconsistent."""
    nr, nc = shape(a)
    aug = [list(ra) + [bb] for ra, bb in zip(a, b)]
    m, pivots = rref(aug)
    for i in range(nr):
        if all(m[i][j] == 0 for j in range(nc)) and m[i][nc] != 0:
            raise ValueError("inconsistent linear system")
    x = [mpq(0)] * nc
    for i, c in enumerate(pivots):
        if c == nc:
            raise ValueError("inconsistent linear system")
        x[c] = m[i][nc]
    return x


def nullspace(a):
    """Basis (list of vectors) of the right kernel of a."""
    nr, nc = shape(a)
    if nc == 0:
        return []
    if nr == 0:
        return [[mpq(1 if i == j else 0) for i in range(nc)] for j in range(nc)]
    m, pivots = rref(a)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * nc
        v[f] = mpq(1)
        for i, c in enumerate(pivots):
            v[c] = -m[i][f]
        basis.append(v)
    return basis


def inverse(a):
    n, m = shape(a)
    if n != m:
        raise ValueError("not square")
    aug = [list(r) + list(e) for r, e in zip(a, eye(n))]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix not invertible")
    return [r[n:] for r in red]


def charpoly(a):
    """Monic characteristic polynomial of a square matrix, highest degree first.

    Faddeev-LeVerrier; only divides by integers, so it also works over the
    dual numbers Dual.
    """
    n = len(a)
    if n == 0:
        return [mpq(1)]
    dual = isinstance(a[0][0], Dual)
    one = (lambda: Dual(1)) if dual else (lambda: mpq(1))
    zero = (lambda: Dual(0)) if dual else (lambda: mpq(0))
    coeffs = [one()]
    m = [[one() if i == j else zero() for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        m = mat_mul(a, m)
        t = m[0][0]
        for i in range(1, n):
            t = t + m[i][i]
        c = -(t / k)
        coeffs.append(c)
        for i in range(n):
            m[i][i] = m[i][i] + c
    return coeffs


def poly_mul(f, g):
    """Polynomials as coefficient lists, highest degree first."""
    out = [mpq(0)] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        for j, y in enumerate(g):
            out[i + j] += x * y
    return out


def poly_gcd_is_const(f, g):
    """True iff gcd(f, g) over Q is a nonzero constant (coprime polynomials)."""
    f = _poly_trim(f)
    g = _poly_trim(g)
    while g:
        f, g = g, _poly_mod(f, g)
    return len(f) == 1


def _poly_trim(f):
    i = 0
    while i < len(f) and f[i] == 0:
        i += 1
    return [mpq(x) for x in f[i:]]


def _poly_mod(f, g):
    f = list(f)
    while len(f) >= len(g) and f:
        q = f[0] / g[0]
        for i in range(len(g)):
            f[i] -= q * g[i]
        f = _poly_trim(f[1:] if f[0] == 0 else f)
        if f and f[0] == 0:
            f = _poly_trim(f)
    return _poly_trim(f)


class Dual:
    """Dual numbers a + b*eps with eps^2 = 0; exact directional derivatives."""

    __slots__ = ("re", "du")

    def __init__(self, re, du=0):
        self.re = mpq(re)
        self.du = mpq(du)

    def __add__(self, o):
        o = _as_dual(o)
        return Dual(self.re + o.re, self.du + o.du)

    __radd__ = __add__

    def __sub__(self, o):
        o = _as_dual(o)
        return Dual(self.re - o.re, self.du - o.du)

    def __rsub__(self, o):
        return _as_dual(o) - self

    def __mul__(self, o):
        o = _as_dual(o)
        return Dual(self.re * o.re, self.re * o.du + self.du * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            if o.du != 0:
                raise ValueError("division by a non-constant dual")
            o = o.re
        return Dual(self.re / o, self.du / o)

    def __neg__(self):
        return Dual(-self.re, -self.du)

    def __eq__(self, o):
        o = _as_dual(o)
        return self.re == o.re and self.du == o.du

    def __repr__(self):
        return f"Dual({self.re}, {self.du})"


def _as_dual(x):
    return x if isinstance(x, Dual) else Dual(x)
