"""Truncated formal series with noncommutative (NCPoly) coefficients.

One-variable series live in powers of u (integer exponents, finite head,
infinite tail truncated at a validity bound `lo`: coefficients with exponent
>= lo are exact, everything above the stored support is exactly zero).
Two-variable series live in the region |v| < |u|: supports sit inside a cone
eu <= head and eu + ev <= head', and rational prefactors like 1/(u-v) are
always expanded there.  Validity is tracked per direction so that a test can
refuse to read a coefficient the truncation no longer guarantees.
"""

from __future__ import annotations

from gmpy2 import mpq

NEG_INF = None  # validity marker: exact at every exponent


def _vmax(a, b):
    if a is NEG_INF:
        return b
    if b is NEG_INF:
        return a
    return max(a, b)


def _vadd(a, b):
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a + b


def _ok(lo, e):
    return lo is NEG_INF or e >= lo


def binom(e, j):
    """Generalized binomial coefficient C(e, j) for integer e (possibly
    negative), j >= 0."""
    num = mpq(1)
    for t in range(j):
        num *= mpq(e - t, t + 1)
    return num


class NCSeries:
    """sum_e c_e u^e, c_e NCPoly over a fixed enveloping algebra."""

    __slots__ = ("uea", "c", "lo")

    def __init__(self, uea, coeffs=None, lo=NEG_INF):
        self.uea = uea
        self.c = {e: p for e, p in (coeffs or {}).items() if p}
        self.lo = lo

    @property
    def hi(self):
        return max(self.c) if self.c else None

    def coeff(self, e):
        if not _ok(self.lo, e):
            raise ValueError(f"coefficient u^{e} below validity bound {self.lo}")
        return self.c.get(e, {})

    def copy(self):
        return NCSeries(self.uea, {e: dict(p) for e, p in self.c.items()}, self.lo)

    # -- ring operations ----------------------------------------------------
    def add(self, other):
        lo = _vmax(self.lo, other.lo)
        out = {e: dict(p) for e, p in self.c.items() if _ok(lo, e)}
        for e, p in other.c.items():
            if not _ok(lo, e):
                continue
            acc = out.setdefault(e, {})
            self.uea.add_into(acc, p)
        return NCSeries(self.uea, {e: p for e, p in out.items() if p}, lo)

    def neg(self):
        return NCSeries(self.uea, {e: self.uea.scale(-1, p) for e, p in self.c.items()}, self.lo)

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        c = mpq(c)
        if c == 0:
            return NCSeries(self.uea, {}, self.lo)
        return NCSeries(self.uea, {e: self.uea.scale(c, p) for e, p in self.c.items()}, self.lo)

    def _eff_hi(self):
        # top of the zone where coefficients may be nonzero or unknown;
        # None means the series is exactly zero
        if self.c:
            h = max(self.c)
            return h if self.lo is NEG_INF else max(h, self.lo - 1)
        return None if self.lo is NEG_INF else self.lo - 1

    def mul(self, other):
        u = self.uea
        hif = self._eff_hi()
        hig = other._eff_hi()
        if hif is None or hig is None:
            return NCSeries(u, {}, NEG_INF)
        lo = _vmax(_vadd(self.lo, hig), _vadd(other.lo, hif))
        out = {}
        for e1, p1 in self.c.items():
            for e2, p2 in other.c.items():
                e = e1 + e2
                if not _ok(lo, e):
                    continue
                acc = out.setdefault(e, {})
                u.add_into(acc, u.mul(p1, p2))
        return NCSeries(u, {e: p for e, p in out.items() if p}, lo)

    def lmul_poly(self, p):
        """Multiply every coefficient by the NCPoly p on the left."""
        return NCSeries(self.uea, {e: self.uea.mul(p, q) for e, q in self.c.items()}, self.lo)

    def shift(self, cst):
        """Substitute u -> u + cst, re-expanding negative powers binomially."""
        cst = mpq(cst)
        if cst == 0:
            return self.copy()
        u = self.uea
        out = {}
        for e, p in self.c.items():
            if e >= 0:
                jmax = e
            elif self.lo is NEG_INF:
                raise ValueError("cannot shift an untruncated series with negative exponents")
            else:
                jmax = e - self.lo
            for j in range(max(jmax, -1) + 1):
                tgt = e - j
                if not _ok(self.lo, tgt):
                    break
                b = binom(e, j)
                if b != 0:
                    acc = out.setdefault(tgt, {})
                    u.add_into(acc, p, b * cst**j)
        return NCSeries(u, {e: p for e, p in out.items() if p}, self.lo)

    def invert(self, lo_req):
        """Two-sided inverse assuming the top coefficient is a nonzero scalar
        times the empty monomial; exact down to u^{lo_req}."""
        h = self.hi
        if h is None:
            raise ValueError("cannot invert the zero series")
        top = self.c[h]
        if set(top) != {()}:
            raise ValueError("series head is not a scalar; cannot invert")
        c0 = top[()]
        floor = NEG_INF if self.lo is NEG_INF else self.lo - 2 * h
        if not (floor is NEG_INF or lo_req >= floor):
            raise ValueError(f"inverse not computable below u^{floor}")
        u = self.uea
        inv = {-h: {(): 1 / c0}}
        for e in range(-h - 1, lo_req - 1, -1):
            acc = {}
            for et, pt in inv.items():
                ps = self.c.get(e + h - et)
                if ps and et > e:
                    u.add_into(acc, u.mul(pt, ps))
            if acc:
                inv[e] = u.scale(-1 / c0, acc)
        return NCSeries(u, inv, lo_req)

    def terms_str(self, namer=None):
        parts = []
        for e in sorted(self.c, reverse=True):
            parts.append(f"u^{e}: {len(self.c[e])} terms")
        return ", ".join(parts)


def scalar_series(uea, pairs, lo=NEG_INF):
    """Series with scalar coefficients, given as {exponent: rational}."""
    return NCSeries(uea, {e: uea.scalar(c) for e, c in pairs.items()}, lo)


# ---------------------------------------------------------------------------

class NCSeries2:
    """Two-variable series sum c_{ab} u^a v^b, expanded in the region
    |v| < |u|.  Coefficients with a >= lo_u and a+b >= lo_t are exact;
    head_u / head_t bound a and a+b over everything the series could carry
    (stored or truncated), which is what makes products soundly trackable."""

    __slots__ = ("uea", "c", "lo_u", "lo_t", "head_u", "head_t")

    def __init__(self, uea, coeffs=None, lo_u=NEG_INF, lo_t=NEG_INF, head_u=None, head_t=None):
        self.uea = uea
        self.c = {k: p for k, p in (coeffs or {}).items() if p}
        self.lo_u = lo_u
        self.lo_t = lo_t
        hu = max((a for a, b in self.c), default=None)
        ht = max((a + b for a, b in self.c), default=None)
        if lo_u is not NEG_INF:
            hu = lo_u - 1 if hu is None else max(hu, lo_u - 1)
        if lo_t is not NEG_INF:
            ht = lo_t - 1 if ht is None else max(ht, lo_t - 1)
        self.head_u = hu if head_u is None else max(head_u, hu if hu is not None else head_u)
        self.head_t = ht if head_t is None else max(head_t, ht if ht is not None else head_t)

    def is_surely_zero(self):
        return not self.c and self.lo_u is NEG_INF and self.lo_t is NEG_INF

    def in_region(self, a, b):
        return _ok(self.lo_u, a) and _ok(self.lo_t, a + b)

    def coeff(self, a, b):
        if not self.in_region(a, b):
            raise ValueError(f"coefficient u^{a} v^{b} outside validity region")
        return self.c.get((a, b), {})

    def add(self, other):
        lo_u = _vmax(self.lo_u, other.lo_u)
        lo_t = _vmax(self.lo_t, other.lo_t)
        out = {}
        for src in (self.c, other.c):
            for (a, b), p in src.items():
                if _ok(lo_u, a) and _ok(lo_t, a + b):
                    acc = out.setdefault((a, b), {})
                    self.uea.add_into(acc, p)
        hu = _none_max(self.head_u, other.head_u)
        ht = _none_max(self.head_t, other.head_t)
        return NCSeries2(self.uea, {k: p for k, p in out.items() if p}, lo_u, lo_t, hu, ht)

    def neg(self):
        return NCSeries2(
            self.uea,
            {k: self.uea.scale(-1, p) for k, p in self.c.items()},
            self.lo_u,
            self.lo_t,
            self.head_u,
            self.head_t,
        )

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        return NCSeries2(
            self.uea,
            {k: self.uea.scale(c, p) for k, p in self.c.items()},
            self.lo_u,
            self.lo_t,
            self.head_u,
            self.head_t,
        )

    def mul(self, other):
        u = self.uea
        if self.is_surely_zero() or other.is_surely_zero():
            return NCSeries2(u, {})
        lo_u = _vmax(_vadd(self.lo_u, other.head_u), _vadd(other.lo_u, self.head_u))
        lo_t = _vmax(_vadd(self.lo_t, other.head_t), _vadd(other.lo_t, self.head_t))
        hu = _vadd(self.head_u, other.head_u)
        ht = _vadd(self.head_t, other.head_t)
        out = {}
        for (a1, b1), p1 in self.c.items():
            for (a2, b2), p2 in other.c.items():
                a, b = a1 + a2, b1 + b2
                if _ok(lo_u, a) and _ok(lo_t, a + b):
                    acc = out.setdefault((a, b), {})
                    u.add_into(acc, u.mul(p1, p2))
        return NCSeries2(u, {k: p for k, p in out.items() if p}, lo_u, lo_t, hu, ht)


def _none_max(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def embed_u(s: NCSeries) -> NCSeries2:
    h = s._eff_hi()
    if h is None:
        return NCSeries2(s.uea, {})
    return NCSeries2(s.uea, {(e, 0): dict(p) for e, p in s.c.items()}, s.lo, NEG_INF, h, h)


def embed_v(s: NCSeries) -> NCSeries2:
    h = s._eff_hi()
    if h is None:
        return NCSeries2(s.uea, {})
    return NCSeries2(s.uea, {(0, e): dict(p) for e, p in s.c.items()}, NEG_INF, s.lo, 0, h)


def uv_linear(uea, cu=0, cv=0, cst=0) -> NCSeries2:
    """The polynomial cu*u + cv*v + cst as a two-variable series."""
    c = {}
    if cu:
        c[(1, 0)] = uea.scalar(cu)
    if cv:
        c[(0, 1)] = uea.scalar(cv)
    if cst:
        c[(0, 0)] = uea.scalar(cst)
    return NCSeries2(uea, c)


def uv_linear_inverse(uea, cu, cv, cst, depth) -> NCSeries2:
    """(cu*u + cv*v + cst)^(-1) expanded in |v| < |u| (cu != 0), materialized
    for u-exponents >= -depth-1."""
    if cu == 0:
        raise ValueError("need a u term to expand in |v| < |u|")
    cu, cv, cst = mpq(cu), mpq(cv), mpq(cst)
    out = {}
    # 1/(cu*u) * sum_j (-1)^j ((cv*v + cst)/(cu*u))^j
    for j in range(depth + 1):
        base = mpq(-1) ** j / cu ** (j + 1)
        for k in range(j + 1):
            coef = base * binom(j, k) * cv**k * cst ** (j - k)
            if coef:
                key = (-j - 1, k)
                acc = out.setdefault(key, {})
                uea.add_into(acc, uea.scalar(1), coef)
    return NCSeries2(uea, {k: p for k, p in out.items() if p}, -depth - 1, NEG_INF, -1, -1)


def solve_d_series(a: NCSeries, d: int, order: int) -> NCSeries:
    """The unique monic D(u) = u^d + sum_{r>=0} D_r u^{d-r-1} with
    a(u) D(u + 1/2) = D(u - 1/2), coefficients exact down to u^{d-order-1};
    raises if the input has the wrong head."""
    u = a.uea
    if a.coeff(0) != u.one() or (a.hi is not None and a.hi > 0):
        raise ValueError("Cartan series must have head 1")
    if a.coeff(-1) != u.scalar(-d):
        raise ValueError(f"Cartan series head does not match dimension {d}")
    # working copy pretends validity one step deeper; the unsolved tail
    # coefficient cancels from the equations it is read in
    D = NCSeries(u, {d: u.one()}, lo=d - order - 1)
    half = mpq(1, 2)
    for r in range(1, order + 1):
        lhs = a.mul(D.shift(half))
        rhs = D.shift(-half)
        resid = u.sub(lhs.coeff(d - r - 1), rhs.coeff(d - r - 1))
        # D_{r-1} enters the u^{d-r-1} equation with total factor -r
        newc = u.scale(mpq(1, r), resid)
        if newc:
            D.c[d - r] = newc
    # consistency: residual must now vanish on every solved coefficient
    lhs = a.mul(D.shift(half))
    rhs = D.shift(-half)
    lo = _vmax(lhs.lo, d - order)
    for e in range(d, lo - 1, -1):
        if u.sub(lhs.coeff(e), rhs.coeff(e)):
            raise ValueError(f"no monic solution: functional equation fails at u^{e}")
    return NCSeries(u, D.c, lo=d - order)
