"""Dimension vectors and the bilinear-form (adjoint) calculus of the folded
chainsaw quiver.

Bases are fixed once and for all: orthonormal bases at the two outer vertices
0 and N/2, dual bases (identity pairing) between the middle vertices l and
N-l, and the standard symplectic basis w_0..w_{N-1} on the framing space.
With these choices every adjoint is a transpose with an explicit sign; the
sign table `sign_p` is pinned jointly by the 1x1 witnesses (q_2=-p_2, q_1=p_3,
q_3=p_1 at N=4; q_0=p_0, q_1=-p_1 at N=2) and by the requirement that the
derived half of the moment equations is the adjoint of the stored half.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from . import linalg as la


@dataclass(frozen=True)
class DimVector:
    """Half dimension vector d = (d_0, ..., d_{N/2}); the full vector over
    Z/NZ is the symmetric extension d_{N-l} = d_l."""

    N: int
    d: tuple

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError("N must be even and >= 2")
        if len(self.d) != self.N // 2 + 1:
            raise ValueError(f"need {self.N//2 + 1} dimensions for N={self.N}")
        if any(x < 0 for x in self.d):
            raise ValueError("negative dimension")

    @property
    def half(self):
        return self.N // 2

    @property
    def I(self):
        return tuple(range(self.half + 1))

    @property
    def I0(self):
        return tuple(range(1, self.half))

    @property
    def I1(self):
        return (0, self.half)

    def at(self, l):
        """Dimension at any vertex of Z/NZ."""
        l %= self.N
        return self.d[l] if l <= self.half else self.d[self.N - l]

    def full(self):
        return tuple(self.at(l) for l in range(self.N))


class QuadraticSetup:
    """Form data and the adjoint calculus for a fixed dimension vector."""

    def __init__(self, dims: DimVector):
        self.dims = dims
        self.N = dims.N

    def sign_p(self, l):
        """Sign s in the derived-coordinate rule p_l^* = s * (p_l as covector
        at vertex -l); equivalently q_{-l} = s * p_l entrywise."""
        l %= self.N
        half = self.N // 2
        if 1 <= l <= half - 1:
            return 1
        if l == (half + 1) % self.N:
            return 1
        return -1

    def sign_q(self, l):
        """Sign in q_l^* = s * (q_l as vector at vertex -l); fixed by
        p^{**} = -p."""
        return -self.sign_p(-l % self.N)

    def form_W(self):
        """Gram matrix of the symplectic form on W in the basis w_0..w_{N-1}."""
        n = self.N
        g = la.zeros(n, n)
        for l in range(n // 2):
            g[l][n - 1 - l] = mpq(1)
            g[n - 1 - l][l] = mpq(-1)
        return g

    def form_V(self):
        """Gram matrix of the symmetric form on V = sum V_l, block order
        l = 0..N-1 with the fixed bases."""
        full = self.dims.full()
        offs = [0]
        for x in full:
            offs.append(offs[-1] + x)
        n = offs[-1]
        g = la.zeros(n, n)
        for l in range(self.N):
            m = (-l) % self.N
            for i in range(full[l]):
                g[offs[l] + i][offs[m] + i] = mpq(1)
        return g

    # -- adjoints (all plain transposes through the V-form; p/q pick up signs
    #    from the symplectic W-form) --

    def adjoint_A(self, l, A):
        """A_l -> A_{-l} = A_l^*; a d_l x d_l matrix goes to vertex -l."""
        dl = self.dims.at(l)
        if la.shape(A) != (dl, dl):
            raise ValueError(f"A at vertex {l} must be {dl}x{dl}, got {la.shape(A)}")
        return la.transpose(A)

    def adjoint_B(self, l, B):
        """B_l -> B_{-l-1} = B_l^* of shape d_{-l} x d_{-l-1}."""
        if la.shape(B) != (self.dims.at(l + 1), self.dims.at(l)):
            raise ValueError(f"B at vertex {l} has wrong shape {la.shape(B)}")
        return la.transpose(B)

    def derive_pq(self, l, p):
        """p_l (vector at vertex l) -> the derived q_{-l} (covector), via the
        selfadjointness constraint p_l^* = q_{-l}."""
        if len(p) != self.dims.at(l):
            raise ValueError(f"p at vertex {l} must have length {self.dims.at(l)}")
        s = self.sign_p(l)
        return [s * x for x in p]

    def derive_qp(self, l, q):
        """q_l (covector at vertex l) -> the derived p_{-l}, via the
        constraint p_{-l}^* = q_l."""
        if len(q) != self.dims.at(l):
            raise ValueError(f"q at vertex {l} must have length {self.dims.at(l)}")
        s = self.sign_p(-l % self.N)
        return [s * x for x in q]

    def adjoint_p(self, l, p):
        """The * operation on p-type maps (same sign as derive_pq)."""
        return self.derive_pq(l, p)

    def adjoint_q(self, l, q):
        """The * operation on q-type maps; composing with adjoint_p gives -id."""
        s = self.sign_q(l)
        return [s * x for x in q]
