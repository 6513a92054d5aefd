"""Extension-field tower arithmetic over a Barreto-Naehrig base field.

Layout (all coefficients are gmpy2.mpz reduced into [0, p)):

    Fp2  = Fp[i]/(i^2 + 1)          tuples (a0, a1)  =  a0 + a1*i
    Fp6  = Fp2[tau]/(tau^3 - xi)    tuples (c0, c1, c2) of Fp2
    Fp12 = Fp6[w]/(w^2 - tau)       tuples (d0, d1) of Fp6

i^2 = -1 requires p = 3 (mod 4), which the curve search guarantees; xi is a
per-curve Fp2 constant that is neither a square nor a cube. Elements are
plain nested tuples and the functions here are free functions: this keeps
the hot paths (Miller loop, final exponentiation) free of attribute lookups
and object allocation beyond the tuples themselves.

The w-power basis used by the canonical GT byte encoding relates to the
tower coordinates by w^2 = tau:

    e0 + e1*w + e2*w^2 + e3*w^3 + e4*w^4 + e5*w^5
      = (e0, e2, e4) + (e1, e3, e5)*w      with e_j in Fp2.
"""

from gmpy2 import invert, mpz, powmod

_Z = mpz(0)
_ONE = mpz(1)

FP2_ZERO = (_Z, _Z)
FP2_ONE = (_ONE, _Z)
FP6_ZERO = (FP2_ZERO, FP2_ZERO, FP2_ZERO)
FP6_ONE = (FP2_ONE, FP2_ZERO, FP2_ZERO)
FP12_ZERO = (FP6_ZERO, FP6_ZERO)
FP12_ONE = (FP6_ONE, FP6_ZERO)


# ---------------------------------------------------------------- Fp helpers

def fp_inv(a, p):
    return invert(a, p)


def fp_legendre(a, p):
    """1 if a is a nonzero square mod p, -1 if non-square, 0 if a = 0."""
    a = a % p
    if a == 0:
        return 0
    return 1 if powmod(a, (p - 1) >> 1, p) == 1 else -1


def fp_sqrt(a, p):
    """Square root mod p for p = 3 (mod 4); None when a is not a square."""
    a = a % p
    root = powmod(a, (p + 1) >> 2, p)
    if root * root % p != a:
        return None
    return root


# --------------------------------------------------------------------- Fp2

def fp2_add(a, b, p):
    return ((a[0] + b[0]) % p, (a[1] + b[1]) % p)


def fp2_sub(a, b, p):
    return ((a[0] - b[0]) % p, (a[1] - b[1]) % p)


def fp2_neg(a, p):
    return ((-a[0]) % p, (-a[1]) % p)


def fp2_conj(a, p):
    return (a[0], (-a[1]) % p)


def fp2_dbl(a, p):
    return ((a[0] + a[0]) % p, (a[1] + a[1]) % p)


def fp2_mul(a, b, p):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    t2 = (a0 + a1) * (b0 + b1)
    return ((t0 - t1) % p, (t2 - t0 - t1) % p)


def fp2_sqr(a, p):
    a0, a1 = a
    return ((a0 + a1) * (a0 - a1) % p, (a0 * a1 << 1) % p)


def fp2_mul_fp(a, s, p):
    return (a[0] * s % p, a[1] * s % p)


def fp2_inv(a, p):
    a0, a1 = a
    norm = (a0 * a0 + a1 * a1) % p
    ninv = invert(norm, p)
    return (a0 * ninv % p, (-a1) * ninv % p)


def fp2_pow(a, e, p):
    result = FP2_ONE
    if e == 0:
        return result
    for bit in bin(e)[2:]:
        result = fp2_sqr(result, p)
        if bit == "1":
            result = fp2_mul(result, a, p)
    return result


def fp2_is_square(a, p):
    """a is a square in Fp2 iff its norm is a square in Fp."""
    norm = (a[0] * a[0] + a[1] * a[1]) % p
    return fp_legendre(norm, p) >= 0


def fp2_sqrt(a, p):
    """Square root in Fp2 for p = 3 (mod 4); None when a is not a square.

    Complex-method: with |a| = sqrt(a0^2 + a1^2), a root is x0 + x1*i where
    x0^2 = (a0 + |a|)/2 (or the variant with -|a|) and x1 = a1 / (2*x0).
    """
    a0, a1 = a[0] % p, a[1] % p
    if a1 == 0:
        root = fp_sqrt(a0, p)
        if root is not None:
            return (root, _Z)
        # a0 is a non-residue; -1 is too (p = 3 mod 4), so -a0 is a residue.
        root = fp_sqrt((-a0) % p, p)
        if root is None:
            return None
        return (_Z, root)
    mag = fp_sqrt((a0 * a0 + a1 * a1) % p, p)
    if mag is None:
        return None
    inv2 = invert(mpz(2), p)
    x0 = fp_sqrt((a0 + mag) * inv2 % p, p)
    if x0 is None:
        x0 = fp_sqrt((a0 - mag) * inv2 % p, p)
        if x0 is None:
            return None
    x1 = a1 * invert(x0 << 1, p) % p
    candidate = (x0, x1)
    if fp2_sqr(candidate, p) != (a0, a1):
        return None
    return candidate


# --------------------------------------------------------------------- Fp6

def fp6_add(a, b, p):
    return (fp2_add(a[0], b[0], p), fp2_add(a[1], b[1], p), fp2_add(a[2], b[2], p))


def fp6_sub(a, b, p):
    return (fp2_sub(a[0], b[0], p), fp2_sub(a[1], b[1], p), fp2_sub(a[2], b[2], p))


def fp6_neg(a, p):
    return (fp2_neg(a[0], p), fp2_neg(a[1], p), fp2_neg(a[2], p))


def fp6_mul(a, b, p, xi):
    a0, a1, a2 = a
    b0, b1, b2 = b
    v0 = fp2_mul(a0, b0, p)
    v1 = fp2_mul(a1, b1, p)
    v2 = fp2_mul(a2, b2, p)
    t = fp2_mul(fp2_add(a1, a2, p), fp2_add(b1, b2, p), p)
    t = fp2_sub(fp2_sub(t, v1, p), v2, p)
    c0 = fp2_add(v0, fp2_mul(t, xi, p), p)
    t = fp2_mul(fp2_add(a0, a1, p), fp2_add(b0, b1, p), p)
    c1 = fp2_add(fp2_sub(fp2_sub(t, v0, p), v1, p), fp2_mul(v2, xi, p), p)
    t = fp2_mul(fp2_add(a0, a2, p), fp2_add(b0, b2, p), p)
    c2 = fp2_add(fp2_sub(fp2_sub(t, v0, p), v2, p), v1, p)
    return (c0, c1, c2)


def fp6_sqr(a, p, xi):
    return fp6_mul(a, a, p, xi)


def fp6_mul_tau(a, p, xi):
    """Multiply by tau: (c0, c1, c2) -> (xi*c2, c0, c1)."""
    return (fp2_mul(a[2], xi, p), a[0], a[1])


def fp6_mul_fp2(a, s, p):
    return (fp2_mul(a[0], s, p), fp2_mul(a[1], s, p), fp2_mul(a[2], s, p))


def fp6_mul_fp(a, s, p):
    return (fp2_mul_fp(a[0], s, p), fp2_mul_fp(a[1], s, p), fp2_mul_fp(a[2], s, p))


def fp6_mul_sparse01(h, a, b, p, xi):
    """h * (a + b*tau) with a, b in Fp2: the Miller-loop line shape."""
    h0, h1, h2 = h
    h0a = fp2_mul(h0, a, p)
    h2b = fp2_mul(h2, b, p)
    c0 = fp2_add(h0a, fp2_mul(h2b, xi, p), p)
    c1 = fp2_add(fp2_mul(h0, b, p), fp2_mul(h1, a, p), p)
    c2 = fp2_add(fp2_mul(h1, b, p), fp2_mul(h2, a, p), p)
    return (c0, c1, c2)


def fp6_inv(a, p, xi):
    c0, c1, c2 = a
    t0 = fp2_sub(fp2_sqr(c0, p), fp2_mul(xi, fp2_mul(c1, c2, p), p), p)
    t1 = fp2_sub(fp2_mul(xi, fp2_sqr(c2, p), p), fp2_mul(c0, c1, p), p)
    t2 = fp2_sub(fp2_sqr(c1, p), fp2_mul(c0, c2, p), p)
    norm = fp2_add(
        fp2_mul(c0, t0, p),
        fp2_mul(xi, fp2_add(fp2_mul(c1, t2, p), fp2_mul(c2, t1, p), p), p),
        p,
    )
    ninv = fp2_inv(norm, p)
    return (fp2_mul(t0, ninv, p), fp2_mul(t1, ninv, p), fp2_mul(t2, ninv, p))


# -------------------------------------------------------------------- Fp12

def fp12_add(a, b, p):
    return (fp6_add(a[0], b[0], p), fp6_add(a[1], b[1], p))


def fp12_conj(a, p):
    """The p^6-power Frobenius; equals inversion on cyclotomic elements."""
    return (a[0], fp6_neg(a[1], p))


def fp12_mul(a, b, p, xi):
    a0, a1 = a
    b0, b1 = b
    v0 = fp6_mul(a0, b0, p, xi)
    v1 = fp6_mul(a1, b1, p, xi)
    c0 = fp6_add(v0, fp6_mul_tau(v1, p, xi), p)
    t = fp6_mul(fp6_add(a0, a1, p), fp6_add(b0, b1, p), p, xi)
    c1 = fp6_sub(fp6_sub(t, v0, p), v1, p)
    return (c0, c1)


def fp12_sqr(a, p, xi):
    a0, a1 = a
    v = fp6_mul(a0, a1, p, xi)
    t = fp6_mul(fp6_add(a0, a1, p), fp6_add(a0, fp6_mul_tau(a1, p, xi), p), p, xi)
    c0 = fp6_sub(fp6_sub(t, v, p), fp6_mul_tau(v, p, xi), p)
    c1 = fp6_add(v, v, p)
    return (c0, c1)


def fp12_inv(a, p, xi):
    a0, a1 = a
    norm = fp6_sub(fp6_sqr(a0, p, xi), fp6_mul_tau(fp6_sqr(a1, p, xi), p, xi), p)
    ninv = fp6_inv(norm, p, xi)
    return (fp6_mul(a0, ninv, p, xi), fp6_neg(fp6_mul(a1, ninv, p, xi), p))


def fp12_pow(a, e, p, xi):
    if e < 0:
        raise ValueError("negative exponent")
    result = FP12_ONE
    if e == 0:
        return result
    for bit in bin(e)[2:]:
        result = fp12_sqr(result, p, xi)
        if bit == "1":
            result = fp12_mul(result, a, p, xi)
    return result


def fp12_mul_line(f, e0_fp, e1, e3, p, xi):
    """Multiply f by the sparse line value e0_fp + e1*w + e3*w^3.

    e0_fp is an Fp scalar (the G1 point's y), e1 and e3 are Fp2. In tower
    coordinates the line is (L0, L1) with L0 = ((e0_fp, 0), 0, 0) and
    L1 = (e1, e3, 0), so both half-products stay sparse.
    """
    f0, f1 = f
    v0 = fp6_mul_fp(f0, e0_fp, p)
    v1 = fp6_mul_sparse01(f1, e1, e3, p, xi)
    mixed_a = fp2_add(e1, (e0_fp % p, _Z), p)
    t = fp6_mul_sparse01(fp6_add(f0, f1, p), mixed_a, e3, p, xi)
    c0 = fp6_add(v0, fp6_mul_tau(v1, p, xi), p)
    c1 = fp6_sub(fp6_sub(t, v0, p), v1, p)
    return (c0, c1)


# -------------------------------------------------- Frobenius endomorphisms

class FieldCtx:
    """Per-curve tower context: modulus, xi, and Frobenius constant tables.

    FROB1[j] = xi^(j*(p-1)/6)   in Fp2   (p-power Frobenius on w^j)
    FROB2[j] = xi^(j*(p^2-1)/6) in Fp    (p^2-power; always a base-field value)
    FROB3[j] = xi^(j*(p^3-1)/6) in Fp2   (p^3-power)

    TWX/TWY map the p-power Frobenius through the sextic untwist onto twist
    coordinates; TW2X is the p^2 analogue (its y constant is exactly -1
    because xi is a non-square, which the constructor asserts).
    """

    def __init__(self, p: int, xi: tuple):
        p = mpz(p)
        self.p = p
        self.xi = (mpz(xi[0]) % p, mpz(xi[1]) % p)
        # p = 3 mod 4 is required for i^2 = -1; p = 1 mod 6 holds for every
        # Barreto-Naehrig prime and makes the Frobenius exponents integral.
        if p % 4 != 3 or (p - 1) % 6 != 0:
            raise ValueError("modulus incompatible with the tower")
        self.frob1 = tuple(
            fp2_pow(self.xi, j * (p - 1) // 6, p) for j in range(6)
        )
        frob2_full = tuple(
            fp2_pow(self.xi, j * (p * p - 1) // 6, p) for j in range(6)
        )
        if any(c[1] != 0 for c in frob2_full):
            raise ValueError("p^2 Frobenius constants left the base field")
        self.frob2 = tuple(c[0] for c in frob2_full)
        self.frob3 = tuple(
            fp2_pow(self.xi, j * (p * p * p - 1) // 6, p) for j in range(6)
        )
        self.twx = self.frob1[2]          # xi^((p-1)/3)
        self.twy = self.frob1[3]          # xi^((p-1)/2)
        self.tw2x = self.frob2[2]         # xi^((p^2-1)/3), in Fp
        minus_one = fp2_pow(self.xi, (p * p - 1) >> 1, p)
        if minus_one != ((p - 1) % p, _Z):
            raise ValueError("xi is a square in Fp2; tower is degenerate")


def _coords(a):
    """Tower tuple -> w-power basis [e0..e5] (each Fp2)."""
    d0, d1 = a
    return (d0[0], d1[0], d0[1], d1[1], d0[2], d1[2])


def _from_coords(e):
    return ((e[0], e[2], e[4]), (e[1], e[3], e[5]))


def fp12_frob(a, ctx):
    p = ctx.p
    e = _coords(a)
    out = tuple(
        fp2_mul(fp2_conj(e[j], p), ctx.frob1[j], p) if j else fp2_conj(e[0], p)
        for j in range(6)
    )
    return _from_coords(out)


def fp12_frob2(a, ctx):
    p = ctx.p
    e = _coords(a)
    out = tuple(
        fp2_mul_fp(e[j], ctx.frob2[j], p) if j else e[0] for j in range(6)
    )
    return _from_coords(out)


def fp12_frob3(a, ctx):
    p = ctx.p
    e = _coords(a)
    out = tuple(
        fp2_mul(fp2_conj(e[j], p), ctx.frob3[j], p) if j else fp2_conj(e[0], p)
        for j in range(6)
    )
    return _from_coords(out)
