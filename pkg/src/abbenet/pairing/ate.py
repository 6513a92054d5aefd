"""Optimal ate pairing for Barreto-Naehrig curves.

``pair_points(P, Q, curve)`` maps an order-r point P on the base curve and
an order-r point Q on the sextic twist into the order-r subgroup of Fp12*.

The Miller loop runs over the non-adjacent form of 6u + 2 with the twist
point kept in affine coordinates (one Fp2 inversion per step; at this size
the simpler formulas outweigh the inversion cost). Lines are evaluated
directly in the w-power basis of the untwisted curve, where they are sparse
(coefficients at w^0, w^1 and w^3 only); denominators are Fp2-rational and
vanish under the final exponentiation, so they are dropped. Two Frobenius
correction lines complete the loop.

The final exponentiation splits into the easy part (p^6 - 1)(p^2 + 1) and
the standard BN addition chain for the hard part, built from three
u-power maps and Frobenius images. ``final_exp_slow`` computes the same
map by a single generic exponentiation; it exists as an independent
cross-check and is never used on the hot path.
"""

from .fields import (
    FP12_ONE,
    fp2_add,
    fp2_conj,
    fp2_inv,
    fp2_mul,
    fp2_mul_fp,
    fp2_neg,
    fp2_sub,
    fp12_conj,
    fp12_frob,
    fp12_frob2,
    fp12_inv,
    fp12_mul,
    fp12_mul_line,
    fp12_pow,
    fp12_sqr,
)


def _line_double(T, P, p, xi):
    """Tangent line at twist point T, evaluated at P; returns (e1, e3, 2T)."""
    x, y = T
    xp, yp = P
    x2 = fp2_mul(x, x, p)
    lam = fp2_mul(
        fp2_add(fp2_add(x2, x2, p), x2, p), fp2_inv(fp2_add(y, y, p), p), p
    )
    x3 = fp2_sub(fp2_mul(lam, lam, p), fp2_add(x, x, p), p)
    y3 = fp2_sub(fp2_mul(lam, fp2_sub(x, x3, p), p), y, p)
    e1 = fp2_neg(fp2_mul_fp(lam, xp, p), p)
    e3 = fp2_sub(fp2_mul(lam, x, p), y, p)
    return e1, e3, (x3, y3)


def _line_add(T, Q, P, p, xi):
    """Chord through T and Q, evaluated at P; returns (e1, e3, T + Q)."""
    x1, y1 = T
    x2, y2 = Q
    dx = fp2_sub(x1, x2, p)
    if dx == (0, 0):
        raise ValueError("degenerate addition in Miller loop")
    lam = fp2_mul(fp2_sub(y1, y2, p), fp2_inv(dx, p), p)
    x3 = fp2_sub(fp2_sub(fp2_mul(lam, lam, p), x1, p), x2, p)
    y3 = fp2_sub(fp2_mul(lam, fp2_sub(x1, x3, p), p), y1, p)
    e1 = fp2_neg(fp2_mul_fp(lam, P[0], p), p)
    e3 = fp2_sub(fp2_mul(lam, x2, p), y2, p)
    return e1, e3, (x3, y3)


def miller_loop(P, Q, curve):
    """Miller function f_{6u+2,Q}(P) times the two correction lines."""
    ctx = curve.ctx
    p, xi = ctx.p, ctx.xi
    yp = P[1]
    mQ = (Q[0], fp2_neg(Q[1], p))
    f = FP12_ONE
    T = Q
    for digit in curve.ate_naf[1:]:
        f = fp12_sqr(f, p, xi)
        e1, e3, T = _line_double(T, P, p, xi)
        f = fp12_mul_line(f, yp, e1, e3, p, xi)
        if digit:
            e1, e3, T = _line_add(T, Q if digit == 1 else mQ, P, p, xi)
            f = fp12_mul_line(f, yp, e1, e3, p, xi)
    # pi(Q) and -pi^2(Q), mapped through the untwist.
    q1 = (
        fp2_mul(fp2_conj(Q[0], p), ctx.twx, p),
        fp2_mul(fp2_conj(Q[1], p), ctx.twy, p),
    )
    mq2 = (fp2_mul_fp(Q[0], ctx.tw2x, p), Q[1])
    e1, e3, T = _line_add(T, q1, P, p, xi)
    f = fp12_mul_line(f, yp, e1, e3, p, xi)
    e1, e3, T = _line_add(T, mq2, P, p, xi)
    f = fp12_mul_line(f, yp, e1, e3, p, xi)
    return f


def final_exp(f, curve):
    """Map f to f^((p^12 - 1) / r) by the factored BN route."""
    ctx = curve.ctx
    p, xi = ctx.p, ctx.xi
    u = int(curve.u)

    # Easy part: f^(p^6 - 1) then ^(p^2 + 1).
    m = fp12_mul(fp12_conj(f, p), fp12_inv(f, p, xi), p, xi)
    m = fp12_mul(fp12_frob2(m, ctx), m, p, xi)

    # Hard part: addition chain over p- and u-power images of m.
    fp1 = fp12_frob(m, ctx)
    fp2_ = fp12_frob2(m, ctx)
    fp3 = fp12_frob(fp2_, ctx)
    fu1 = fp12_pow(m, u, p, xi)
    fu2 = fp12_pow(fu1, u, p, xi)
    fu3 = fp12_pow(fu2, u, p, xi)
    fu2p = fp12_frob(fu2, ctx)
    fu3p = fp12_frob(fu3, ctx)

    y0 = fp12_mul(fp12_mul(fp1, fp2_, p, xi), fp3, p, xi)
    y1 = fp12_conj(m, p)
    y2 = fp12_frob2(fu2, ctx)
    y3 = fp12_conj(fp12_frob(fu1, ctx), p)
    y4 = fp12_conj(fp12_mul(fu1, fu2p, p, xi), p)
    y5 = fp12_conj(fu2, p)
    y6 = fp12_conj(fp12_mul(fu3, fu3p, p, xi), p)

    t0 = fp12_mul(fp12_mul(fp12_sqr(y6, p, xi), y4, p, xi), y5, p, xi)
    t1 = fp12_mul(fp12_mul(y3, y5, p, xi), t0, p, xi)
    t0 = fp12_mul(t0, y2, p, xi)
    t1 = fp12_mul(fp12_sqr(t1, p, xi), t0, p, xi)
    t1 = fp12_sqr(t1, p, xi)
    t0 = fp12_mul(t1, y1, p, xi)
    t1 = fp12_mul(t1, y0, p, xi)
    t0 = fp12_sqr(t0, p, xi)
    return fp12_mul(t0, t1, p, xi)


def final_exp_slow(f, curve):
    """One generic exponentiation by (p^12 - 1) / r; cross-check only."""
    p = curve.p
    return fp12_pow(f, (p**12 - 1) // int(curve.r), p, curve.ctx.xi)


def pair_points(P, Q, curve):
    """Reduced optimal ate pairing of affine P (base curve) and Q (twist).

    Callers deal with identity inputs; here both points must be finite.
    """
    return final_exp(miller_loop(P, Q, curve), curve)
