"""Lie algebras by structure constants.

Generators are labels (kind, l, i, j); the kind codes fix the PBW order
A' < A < B < q < p (nilpotent-radical letters rightmost), lexicographic by
(l, i, j) within a kind.  Brackets are stored sparsely as linear combinations
of generators; antisymmetry holds by construction and the Jacobi identity is
checked by an exhaustive sweep.
"""

from __future__ import annotations

from gmpy2 import mpq

from .quadratic import DimVector

K_AP, K_A, K_B, K_Q, K_P = 0, 1, 2, 3, 4
KIND_NAMES = {K_AP: "A'", K_A: "A", K_B: "B", K_Q: "q", K_P: "p"}


class LiePresentation:
    def __init__(self, labels, brackets, weights, nweights=1):
        """labels: list of (kind, l, i, j), already sorted in PBW order.
        brackets: dict (ga, gb) -> {gc: coeff} for ga > gb only.
        weights: per-generator tuples of length nweights."""
        self.labels = list(labels)
        self.index = {lab: g for g, lab in enumerate(self.labels)}
        self.brackets = brackets
        self.weights = list(weights)
        self.nweights = nweights
        self.zero_weight = (0,) * nweights

    @property
    def ngens(self):
        return len(self.labels)

    def name(self, g):
        kind, l, i, j = self.labels[g]
        if kind == K_Q:
            return f"q({l})[{j}]"
        if kind == K_P:
            return f"p({l})[{i}]"
        return f"{KIND_NAMES[kind]}({l})[{i},{j}]"

    def bracket(self, a, b):
        """[x_a, x_b] as {gid: coeff}."""
        if a == b:
            return {}
        if a > b:
            return self.brackets.get((a, b), {})
        neg = self.brackets.get((b, a), {})
        return {g: -c for g, c in neg.items()}

    def weight(self, g):
        return self.weights[g]

    def validate(self):
        """Antisymmetry is structural; check Jacobi and weight additivity on
        every pair/triple.  Exact; raises on failure."""
        n = self.ngens
        for (a, b), comb in self.brackets.items():
            wa, wb = self.weights[a], self.weights[b]
            wsum = tuple(x + y for x, y in zip(wa, wb))
            for g, c in comb.items():
                if c != 0 and self.weights[g] != wsum:
                    raise ValueError(f"bracket [{self.name(a)},{self.name(b)}] not weight-homogeneous")
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    acc = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        inner = self.bracket(y, z)
                        for g, cf in inner.items():
                            for h, cf2 in self.bracket(x, g).items():
                                acc[h] = acc.get(h, mpq(0)) + cf * cf2
                    if any(v != 0 for v in acc.values()):
                        raise ValueError(
                            f"Jacobi fails on ({self.name(a)}, {self.name(b)}, {self.name(c)})"
                        )
        return True


def _basis_weight(dims: DimVector, kind, l):
    w = [0] * (dims.half + 1)
    if kind == K_B:
        w[l] += 1
        w[l + 1] -= 1
    elif kind == K_Q:
        w[l] += 1
    elif kind == K_P:
        w[l] -= 1
    return tuple(w)


def chainsaw_presentation(dims: DimVector) -> LiePresentation:
    """The folded-chainsaw Lie algebra: a sum over l = 0..N/2-1 of
    (gl(V_l) + gl(V_{l+1})) acting on the 2-step nilpotent algebra
    V_l + V_{l+1}^* + V_l (x) V_{l+1}^*, different summands commuting.

    Generator matrices: A(l) (0<=l<N/2, the gl copy acting on V_l), A'(l)
    (0<l<=N/2, the copy acting on V_l^*), B(l), q(l) (0<=l<N/2), p(l)
    (0<l<=N/2)."""
    half = dims.half
    labels = []
    for l in range(1, half + 1):
        n = dims.at(l)
        labels += [(K_AP, l, i, j) for i in range(n) for j in range(n)]
    for l in range(half):
        n = dims.at(l)
        labels += [(K_A, l, i, j) for i in range(n) for j in range(n)]
    for l in range(half):
        labels += [(K_B, l, i, j) for i in range(dims.at(l + 1)) for j in range(dims.at(l))]
    for l in range(half):
        labels += [(K_Q, l, 0, j) for j in range(dims.at(l))]
    for l in range(1, half + 1):
        labels += [(K_P, l, i, 0) for i in range(dims.at(l))]
    labels.sort()
    index = {lab: g for g, lab in enumerate(labels)}
    weights = [_basis_weight(dims, lab[0], lab[1]) for lab in labels]

    table = {}

    def put(la_, lb_, out):
        a, b = index[la_], index[lb_]
        if a == b:
            return
        if a < b:
            a, b = b, a
            out = {k: -v for k, v in out.items()}
        tgt = table.setdefault((a, b), {})
        for lab, c in out.items():
            g = index[lab]
            tgt[g] = tgt.get(g, mpq(0)) + c
            if tgt[g] == 0:
                del tgt[g]

    def gl_block(kind, l, n):
        # [E_ij, E_km] = d_jk E_im - d_mi E_kj within one gl copy
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for m in range(n):
                        if (i, j) >= (k, m):
                            continue
                        out = {}
                        if j == k:
                            out[(kind, l, i, m)] = out.get((kind, l, i, m), mpq(0)) + 1
                        if m == i:
                            out[(kind, l, k, j)] = out.get((kind, l, k, j), mpq(0)) - 1
                        if out:
                            put((kind, l, i, j), (kind, l, k, m), out)

    for l in range(half):
        dl, dw = dims.at(l), dims.at(l + 1)
        gl_block(K_A, l, dl)
        gl_block(K_AP, l + 1, dw)
        # tautological action on V_l: [A(l)_ij, q(l)_k] = d_jk q(l)_i
        for i in range(dl):
            for j in range(dl):
                for k in range(dl):
                    if j == k:
                        put((K_A, l, i, j), (K_Q, l, 0, k), {(K_Q, l, 0, i): mpq(1)})
        # dual action on V_{l+1}^*: [A'(l+1)_ij, p(l+1)_k] = -d_ik p(l+1)_j
        for i in range(dw):
            for j in range(dw):
                for k in range(dw):
                    if i == k:
                        put((K_AP, l + 1, i, j), (K_P, l + 1, k, 0), {(K_P, l + 1, j, 0): mpq(-1)})
        # [q(l)_j, p(l+1)_i] = B(l)_ij
        for j in range(dl):
            for i in range(dw):
                put((K_Q, l, 0, j), (K_P, l + 1, i, 0), {(K_B, l, i, j): mpq(1)})
        # gl actions on the central part:
        # [A(l)_ij, B(l)_km] = d_jm B(l)_ki,  [A'(l+1)_ij, B(l)_km] = -d_ik B(l)_jm
        for i in range(dl):
            for j in range(dl):
                for k in range(dw):
                    for m in range(dl):
                        if j == m:
                            put((K_A, l, i, j), (K_B, l, k, m), {(K_B, l, k, i): mpq(1)})
        for i in range(dw):
            for j in range(dw):
                for k in range(dw):
                    for m in range(dl):
                        if i == k:
                            put((K_AP, l + 1, i, j), (K_B, l, k, m), {(K_B, l, j, m): mpq(-1)})

    return LiePresentation(labels, table, weights, nweights=half + 1)


def gl_presentation(n: int) -> LiePresentation:
    """gl_n with generators E_ij, for the determinant identities."""
    labels = [(K_A, 0, i, j) for i in range(n) for j in range(n)]
    labels.sort()
    index = {lab: g for g, lab in enumerate(labels)}
    table = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for m in range(n):
                    if (i, j) >= (k, m):
                        continue
                    out = {}
                    if j == k:
                        out[(K_A, 0, i, m)] = out.get((K_A, 0, i, m), mpq(0)) + 1
                    if m == i:
                        out[(K_A, 0, k, j)] = out.get((K_A, 0, k, j), mpq(0)) - 1
                    out = {lab: c for lab, c in out.items() if c != 0}
                    if out:
                        a, b = index[(K_A, 0, i, j)], index[(K_A, 0, k, m)]
                        comb = {index[lab]: c for lab, c in out.items()}
                        if a > b:
                            table[(a, b)] = comb
                        else:
                            table[(b, a)] = {g: -c for g, c in comb.items()}
    weights = [(0,)] * len(labels)
    return LiePresentation(labels, table, weights, nweights=1)
