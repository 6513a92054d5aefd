"""Jacobian-coordinate arithmetic for short-Weierstrass curves y^2 = x^3 + b.

One implementation serves both G1 (coordinates in Fp) and G2 (coordinates in
Fp2, on the sextic twist): ``PointOps`` closes over the field's primitive
operations. Affine points are (x, y) tuples with None for the point at
infinity; Jacobian triples (X, Y, Z) use Z = zero for infinity.

Formulas: dbl-2009-l and add-2007-bl (complete for a = 0 curves apart from
the explicitly handled doubling/inverse cases).
"""

from gmpy2 import invert, mpz

from .fields import (
    fp2_add,
    fp2_inv,
    fp2_mul,
    fp2_neg,
    fp2_sqr,
    fp2_sub,
    FP2_ZERO,
    FP2_ONE,
)

_Z = mpz(0)
_ONE = mpz(1)


class PointOps:
    def __init__(self, p, b, *, add, sub, mul, sqr, neg, inv, zero, one):
        self.p = p
        self.b = b
        self._add = add
        self._sub = sub
        self._mul = mul
        self._sqr = sqr
        self._neg = neg
        self._inv = inv
        self.zero = zero
        self.one = one
        self.infinity = (one, one, zero)

    # -------------------------------------------------------------- basics

    def is_infinity(self, P) -> bool:
        return P[2] == self.zero

    def on_curve(self, affine) -> bool:
        if affine is None:
            return True
        x, y = affine
        lhs = self._sqr(y)
        rhs = self._add(self._mul(self._sqr(x), x), self.b)
        return lhs == rhs

    def from_affine(self, affine):
        if affine is None:
            return self.infinity
        return (affine[0], affine[1], self.one)

    def to_affine(self, P):
        if self.is_infinity(P):
            return None
        zinv = self._inv(P[2])
        zinv2 = self._sqr(zinv)
        x = self._mul(P[0], zinv2)
        y = self._mul(P[1], self._mul(zinv2, zinv))
        return (x, y)

    def neg_affine(self, affine):
        if affine is None:
            return None
        return (affine[0], self._neg(affine[1]))

    # ------------------------------------------------------ group law (jac)

    def double(self, P):
        if self.is_infinity(P):
            return P
        X1, Y1, Z1 = P
        add, sub, mul, sqr = self._add, self._sub, self._mul, self._sqr
        A = sqr(X1)
        B = sqr(Y1)
        C = sqr(B)
        D = sub(sqr(add(X1, B)), add(A, C))
        D = add(D, D)
        E = add(add(A, A), A)
        F = sqr(E)
        X3 = sub(F, add(D, D))
        C8 = add(add(C, C), add(C, C))
        C8 = add(C8, C8)
        Y3 = sub(mul(E, sub(D, X3)), C8)
        Z3 = mul(add(Y1, Y1), Z1)
        return (X3, Y3, Z3)

    def add(self, P, Q):
        if self.is_infinity(P):
            return Q
        if self.is_infinity(Q):
            return P
        X1, Y1, Z1 = P
        X2, Y2, Z2 = Q
        add, sub, mul, sqr = self._add, self._sub, self._mul, self._sqr
        Z1Z1 = sqr(Z1)
        Z2Z2 = sqr(Z2)
        U1 = mul(X1, Z2Z2)
        U2 = mul(X2, Z1Z1)
        S1 = mul(mul(Y1, Z2), Z2Z2)
        S2 = mul(mul(Y2, Z1), Z1Z1)
        H = sub(U2, U1)
        rr = sub(S2, S1)
        if H == self.zero:
            if rr == self.zero:
                return self.double(P)
            return self.infinity
        rr = add(rr, rr)
        I = sqr(add(H, H))
        J = mul(H, I)
        V = mul(U1, I)
        X3 = sub(sub(sqr(rr), J), add(V, V))
        S1J = mul(S1, J)
        Y3 = sub(mul(rr, sub(V, X3)), add(S1J, S1J))
        Z3 = mul(sub(sqr(add(Z1, Z2)), add(Z1Z1, Z2Z2)), H)
        return (X3, Y3, Z3)

    def scalar_mul(self, k: int, affine):
        """k * P for affine P; returns an affine point (None for infinity)."""
        if affine is None or k == 0:
            return None
        if k < 0:
            raise ValueError("negative scalar")
        R = self.infinity
        P = self.from_affine(affine)
        for bit in bin(k)[2:]:
            R = self.double(R)
            if bit == "1":
                R = self.add(R, P)
        return self.to_affine(R)

    def equals(self, P, Q) -> bool:
        """Jacobian equality without normalizing to affine."""
        if self.is_infinity(P) or self.is_infinity(Q):
            return self.is_infinity(P) and self.is_infinity(Q)
        sub, mul, sqr = self._sub, self._mul, self._sqr
        Z1Z1 = sqr(P[2])
        Z2Z2 = sqr(Q[2])
        if mul(P[0], Z2Z2) != mul(Q[0], Z1Z1):
            return False
        return mul(mul(P[1], Q[2]), Z2Z2) == mul(mul(Q[1], P[2]), Z1Z1)


def g1_ops(p, b) -> PointOps:
    p = mpz(p)
    return PointOps(
        p,
        mpz(b) % p,
        add=lambda a, c: (a + c) % p,
        sub=lambda a, c: (a - c) % p,
        mul=lambda a, c: (a * c) % p,
        sqr=lambda a: (a * a) % p,
        neg=lambda a: (-a) % p,
        inv=lambda a: invert(a, p),
        zero=_Z,
        one=_ONE,
    )


def g2_ops(p, b2) -> PointOps:
    p = mpz(p)
    return PointOps(
        p,
        b2,
        add=lambda a, c: fp2_add(a, c, p),
        sub=lambda a, c: fp2_sub(a, c, p),
        mul=lambda a, c: fp2_mul(a, c, p),
        sqr=lambda a: fp2_sqr(a, p),
        neg=lambda a: fp2_neg(a, p),
        inv=lambda a: fp2_inv(a, p),
        zero=FP2_ZERO,
        one=FP2_ONE,
    )
