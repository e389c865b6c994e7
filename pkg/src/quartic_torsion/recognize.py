"""Recognition of exact algebraic data from high-precision approximations.

Two mechanisms, used at different degrees:

* Lattice reduction.  A complex number alpha accurate to k decimal digits
  is an approximate root of an integer polynomial exactly when the lattice
  spanned by the columns of the scaled matrix below has a disproportionately
  short vector; LLL finds it.  The same trick with one extra column writes
  alpha as an integer combination of a number-field basis.

      ( I               0    )        rows 0..n-1: coefficient slots
      ( [S re a^n] ...  S    )        S = 10^k', [.] = nearest integer
      ( [S im a^n] ...  0    )        omitted when it would be all zero

* Continued fractions.  When the degree is too large for lattices, the
  orbit polynomial prod (x - y_i) over a conjugation-closed root set has
  rational coefficients, and each one is recognized from its convergents.

The tolerance story: a candidate relation is pre-filtered by the size of
the lattice residual gamma (accept below 10^(k'/2); genuine noise sits
near 10^k') and then confirmed by evaluating the polynomial at alpha,
which must come out below 10^(-k'+n+2).  For continued fractions the
caller chooses cf_tolerance just above the input's evaluation error;
anything below half the inverse square of the largest expected
denominator is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .exactpoly import UPoly, integer_primitive, upoly_from_text, upoly_to_text
from .numsolve import MPComplex


@dataclass(frozen=True)
class RecognitionConfig:
    """Knobs for the lattice and continued-fraction recognizers.

    k_prime is the scaling exponent; None scans 0.8k, 0.6k, 0.4k of the
    input's accuracy k.  cf_tolerance should sit above the evaluation
    error of the input and below 1/(2 q_max^2) for the largest plausible
    denominator q_max.
    """

    k_prime: Optional[int] = None
    max_degree: int = 16
    lll_delta: float = 0.99
    cf_tolerance: float = 1e-20
    cf_max_iters: int = 64

    def __post_init__(self):
        if not 0.25 < self.lll_delta < 1:
            raise ValueError("lll_delta must lie in (0.25, 1)")
        if self.max_degree < 1:
            raise ValueError("max_degree must be at least 1")
        if self.cf_max_iters < 1:
            raise ValueError("cf_max_iters must be at least 1")
        if self.k_prime is not None and self.k_prime < 1:
            raise ValueError("k_prime must be positive")


@dataclass(frozen=True)
class MinPolyResult:
    """An integer polynomial vanishing at the recognized number.

    Coefficients are coprime integers with positive leading term;
    residual_gamma is the length of the lattice error vector that
    certified the relation.
    """

    poly: UPoly
    residual_gamma: float


@dataclass(frozen=True)
class PowerBasisExpr:
    """denominator * x = numerators[0] * 1 + sum numerators[i] * basis[i]."""

    denominator: int
    numerators: tuple
    basis: tuple

    def __post_init__(self):
        if self.denominator == 0:
            raise ValueError("denominator must be nonzero")


# --------------------------------------------------------------------------
# LLL over exact rationals
# --------------------------------------------------------------------------


def _dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def _gso(b):
    """Gram-Schmidt data (mu, B) of integer columns, exact over Fraction."""
    m = len(b)
    mu = [[Fraction(0)] * m for _ in range(m)]
    B = [Fraction(0)] * m
    star = []
    for i in range(m):
        v = [Fraction(c) for c in b[i]]
        for j in range(i):
            mu[i][j] = Fraction(_dot(b[i], star[j])) / B[j]
            v = [a - mu[i][j] * w for a, w in zip(v, star[j])]
        star.append(v)
        B[i] = _dot(v, v)
        if B[i] == 0:
            raise ValueError("basis columns are linearly dependent")
    return mu, B


def lll_reduce(basis, delta: float = 0.99):
    """LLL-reduce integer lattice columns; returns new columns, same lattice.

    The output is size-reduced and satisfies the Lovasz condition with the
    given delta, so the first column is within the usual 2^((m-1)/4)
    factor of the shortest vector.
    """
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (0.25, 1)")
    d = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    b = [[int(c) for c in col] for col in basis]
    m = len(b)
    if m <= 1:
        if m == 1 and not any(b[0]):
            raise ValueError("basis columns are linearly dependent")
        return [list(col) for col in b]
    mu, B = _gso(b)

    k = 1
    while k < m:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [a - q * c for a, c in zip(b[k], b[j])]
                mu[k][j] -= q
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
        if B[k] >= (d - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
            continue
        # swap b_{k-1}, b_k and patch the Gram-Schmidt data in place
        b[k - 1], b[k] = b[k], b[k - 1]
        nu = mu[k][k - 1]
        Bk = B[k] + nu * nu * B[k - 1]
        mu[k][k - 1] = nu * B[k - 1] / Bk
        B[k] = B[k - 1] * B[k] / Bk
        B[k - 1] = Bk
        for l in range(k - 1):
            mu[k - 1][l], mu[k][l] = mu[k][l], mu[k - 1][l]
        for i in range(k + 1, m):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - nu * t
            mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
        k = max(k - 1, 1)
    return [list(col) for col in b]


# --------------------------------------------------------------------------
# minimal polynomials and basis expressions
# --------------------------------------------------------------------------


def _round_even(x) -> int:
    """Nearest integer, ties to even (the [.] of the lattice rows)."""
    f = mpmath.floor(x)
    n = int(f)
    r = x - f
    if r > mpmath.mpf(1) / 2:
        return n + 1
    if r < mpmath.mpf(1) / 2:
        return n
    return n if n % 2 == 0 else n + 1


def _scan_kprimes(k: int, cfg: RecognitionConfig):
    if cfg.k_prime is not None:
        if cfg.k_prime >= k:
            raise ValueError("k_prime must be below the input accuracy")
        return [cfg.k_prime]
    return sorted({max(4, int(k * f)) for f in (0.8, 0.6, 0.4)}, reverse=True)


def _candidates(cols, n_gamma_rows: int, kp: int, delta: float):
    """Reduced columns with their |gamma|^2, shortest first, prefiltered.

    gamma lives in the last n_gamma_rows coordinates; candidates at or
    above 10^k' / 2 digits of residual cannot be relations and are
    dropped here.
    """
    red = lll_reduce(cols, delta)
    out = []
    for v in sorted(red, key=lambda c: _dot(c, c)):
        g2 = sum(t * t for t in v[-n_gamma_rows:])
        if g2 < 10 ** kp:
            out.append((v, g2))
    return out


def minpoly_from_approx(alpha: MPComplex,
                        cfg: Optional[RecognitionConfig] = None) -> MinPolyResult:
    """The lowest-degree integer polynomial vanishing at alpha.

    Scans degree n upward (1 catches rationals) and k' downward; a
    candidate must have a lattice residual below 10^(k'/2) and evaluate
    below 10^(-k'+n+2) at alpha.  Raises when nothing of degree at most
    max_degree passes - raise the precision or max_degree, or fall back
    to cf_rational / orbit_poly.
    """
    cfg = cfg or RecognitionConfig()
    k = alpha.working_digits
    kps = _scan_kprimes(k, cfg)
    with mpmath.workdps(k + 10):
        z = alpha.to_mpc()
        pows = [z]
        for n in range(1, cfg.max_degree + 1):
            if len(pows) < n:
                pows.append(pows[-1] * z)
            for kp in kps:
                got = _try_minpoly(z, pows[:n], kp, cfg)
                if got is not None:
                    return got
    raise ValueError(
        "no integer polynomial of degree <= %d accepted; raise the "
        "precision or max_degree, or use cf_rational" % cfg.max_degree)


def _try_minpoly(z, pows, kp: int, cfg: RecognitionConfig):
    n = len(pows)
    S = 10 ** kp
    re = [_round_even(S * mpmath.re(p)) for p in reversed(pows)]
    im = [_round_even(S * mpmath.im(p)) for p in reversed(pows)]
    use_im = any(im)
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(e + [re[j]] + ([im[j]] if use_im else []))
    cols.append([0] * n + [S] + ([0] if use_im else []))

    grow = max(1, float(abs(z)))
    for v, g2 in _candidates(cols, 2 if use_im else 1, kp, cfg.lll_delta):
        c_desc = v[:n]                   # c_n .. c_1
        rem = v[n] - sum(c * r for c, r in zip(c_desc, re))
        if rem % S:
            continue
        coeffs = [rem // S] + list(reversed(c_desc))          # ascending
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            continue
        ints, _ = integer_primitive([Fraction(c) for c in coeffs])
        if ints[-1] < 0:
            ints = [-c for c in ints]
        deg = len(ints) - 1
        height = max(abs(c) for c in ints)
        # a height this large cannot be certified by k' scaled digits
        if height ** (2 * (deg + 1)) >= 10 ** kp:
            continue
        val = mpmath.mpc(0)
        for c in reversed(ints):
            val = val * z + c
        # must be small per the lattice scale, and as small as an exact
        # relation of this height evaluated at a k'-accurate point
        if abs(val) >= mpmath.mpf(10) ** (-kp + deg + 2):
            continue
        if abs(val) >= (deg + 1) * height * grow ** deg \
                * mpmath.mpf(10) ** (-kp + 2):
            continue
        return MinPolyResult(UPoly(ints), float(mpmath.sqrt(g2)))
    return None


def express_in_basis(alpha: MPComplex, basis_approx: Sequence[MPComplex],
                     cfg: Optional[RecognitionConfig] = None) -> PowerBasisExpr:
    """Write alpha over a number-field basis 1, x_1 .. x_n with one
    integer denominator:  c_{n+1} alpha = c_0 + c_1 x_1 + ... + c_n x_n.

    basis_approx lists approximations of 1, x_1, .., x_n in that order.
    Raises when no scaling exponent produces an accepted relation.
    """
    cfg = cfg or RecognitionConfig()
    if not basis_approx:
        raise ValueError("basis must contain at least the element 1")
    k = min([alpha.working_digits] + [b.working_digits for b in basis_approx])
    kps = _scan_kprimes(k, cfg)
    n = len(basis_approx) - 1
    with mpmath.workdps(k + 10):
        z = alpha.to_mpc()
        xs = [b.to_mpc() for b in basis_approx]
        for kp in kps:
            got = _try_express(z, xs, kp, cfg)
            if got is not None:
                denom, nums = got
                return PowerBasisExpr(denom, tuple(nums),
                                      tuple(basis_approx))
    raise ValueError(
        "no basis expression accepted at degree %d; raise the precision "
        "or check that alpha lies in the spanned field" % n)


def _try_express(z, xs, kp: int, cfg: RecognitionConfig):
    n = len(xs) - 1
    S = 10 ** kp
    vals = [z] + list(reversed(xs[1:]))             # alpha, x_n .. x_1
    re = [_round_even(S * mpmath.re(v)) for v in vals]
    im = [_round_even(S * mpmath.im(v)) for v in vals]
    re1 = _round_even(S * mpmath.re(xs[0]))
    im1 = _round_even(S * mpmath.im(xs[0]))
    use_im = any(im) or im1 != 0
    cols = []
    for j in range(n + 1):
        e = [0] * (n + 1)
        e[j] = 1
        cols.append(e + [re[j]] + ([im[j]] if use_im else []))
    cols.append([0] * (n + 1) + [re1] + ([im1] if use_im else []))

    for v, _ in _candidates(cols, 2 if use_im else 1, kp, cfg.lll_delta):
        w = v[:n + 1]                    # -c_{n+1}, c_n .. c_1
        rem = v[n + 1] - sum(c * r for c, r in zip(w, re))
        if re1 == 0 or rem % re1:
            continue
        c0 = rem // re1
        denom = -w[0]
        if denom == 0:
            continue
        nums = [c0] + list(reversed(w[1:]))         # c_0, c_1 .. c_n
        if denom < 0:
            denom, nums = -denom, [-c for c in nums]
        g = math.gcd(denom, *(abs(c) for c in nums))
        if g > 1:
            denom //= g
            nums = [c // g for c in nums]
        height = max(denom, max(abs(c) for c in nums))
        if height ** (2 * (n + 2)) >= 10 ** kp:
            continue
        resid = denom * z - sum(c * x for c, x in zip(nums, xs))
        if abs(resid) >= mpmath.mpf(10) ** (-kp + n + 2):
            continue
        if abs(resid) >= (n + 2) * height * mpmath.mpf(10) ** (-kp + 2):
            continue
        return denom, nums
    return None


# --------------------------------------------------------------------------
# continued fractions and orbit polynomials
# --------------------------------------------------------------------------


def cf_rational(x, cfg: Optional[RecognitionConfig] = None) -> Fraction:
    """The first continued-fraction convergent of x within cf_tolerance.

    x is a real number (float, mpf, Fraction...) evaluated at the ambient
    mpmath precision.  Raises after cf_max_iters convergents.
    """
    cfg = cfg or RecognitionConfig()
    x0 = mpmath.mpf(x)
    tol = mpmath.mpf(cfg.cf_tolerance)
    h2, h1 = 0, 1
    k2, k1 = 1, 0
    y = x0
    for _ in range(cfg.cf_max_iters):
        a = int(mpmath.floor(y))
        h = a * h1 + h2
        k = a * k1 + k2
        if abs(x0 - mpmath.mpf(h) / k) < tol:
            return Fraction(h, k)
        h2, h1 = h1, h
        k2, k1 = k1, k
        if y == a:
            break
        y = 1 / (y - a)
    raise ValueError(
        "no convergent within %.1e after %d iterations"
        % (cfg.cf_tolerance, cfg.cf_max_iters))


def orbit_poly(approx_roots: Sequence[MPComplex],
               cfg: Optional[RecognitionConfig] = None) -> UPoly:
    """The monic rational polynomial with the given conjugation-closed roots.

    Expands prod (x - y_i) at the inputs' working precision and recognizes
    every coefficient with cf_rational; a coefficient whose imaginary part
    reaches cf_tolerance means the set was not closed under conjugation.
    """
    cfg = cfg or RecognitionConfig()
    if not approx_roots:
        raise ValueError("need at least one root")
    digits = min(r.working_digits for r in approx_roots)
    with mpmath.workdps(digits + 10):
        coeffs = [mpmath.mpc(1)]
        for r in approx_roots:
            z = r.to_mpc()
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] += c
                nxt[i] -= z * c
            coeffs = nxt
        out = []
        for i, c in enumerate(coeffs):
            if abs(mpmath.im(c)) >= cfg.cf_tolerance:
                raise ValueError(
                    "coefficient of x^%d has imaginary residue %.1e; the "
                    "root set is not conjugation-closed" % (i, float(abs(mpmath.im(c)))))
            out.append(cf_rational(mpmath.re(c), cfg))
    return UPoly(out)


def count_roots_mod_p(poly: UPoly, p: int) -> int:
    """Number of distinct roots of poly in F_p (good p only).

    Clears denominators first; a prime dividing the leading coefficient
    or any denominator is rejected.  Computed as deg gcd(f, x^p - x).
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    ints, mult = integer_primitive(poly.coeffs)
    if mult.numerator % p == 0:
        raise ValueError("p divides a denominator; choose a good prime")
    f = [c % p for c in ints]
    while f and f[-1] == 0:
        f.pop()
    if len(f) - 1 != len(ints) - 1:
        raise ValueError("p divides the leading coefficient; choose a good prime")
    if len(f) == 1:
        return 0
    xp = _powmod_x(p, f, p)
    g = _gcd_mod(f, _sub_mod(xp, [0, 1], p), p)
    return len(g) - 1


def _sub_mod(u, v, p):
    n = max(len(u), len(v))
    out = [((u[i] if i < len(u) else 0) - (v[i] if i < len(v) else 0)) % p
           for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _mulrem_mod(u, v, f, p):
    out = [0] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                out[i + j] = (out[i + j] + a * b) % p
    return _rem_mod(out, f, p)


def _rem_mod(u, f, p):
    u = u[:]
    d = len(f) - 1
    inv = pow(f[-1], p - 2, p)
    for i in range(len(u) - 1, d - 1, -1):
        c = u[i] * inv % p
        if c:
            for j in range(d + 1):
                u[i - d + j] = (u[i - d + j] - c * f[j]) % p
    u = u[:d]
    while u and u[-1] == 0:
        u.pop()
    return u


def _powmod_x(e: int, f, p):
    """x^e mod (f, p) by binary powering."""
    result = [1]
    base = _rem_mod([0, 1], f, p)
    while e:
        if e & 1:
            result = _mulrem_mod(result, base, f, p)
        base = _mulrem_mod(base, base, f, p)
        e >>= 1
    return result


def _gcd_mod(u, v, p):
    while v:
        u, v = v, _rem_mod(u, v, p)
    if u:
        inv = pow(u[-1], p - 2, p)
        u = [c * inv % p for c in u]
    return u


# --------------------------------------------------------------------------
# recognized-polynomial files
# --------------------------------------------------------------------------


def recognized_to_text(poly: UPoly, source_digits: int, name: str = "x") -> str:
    return "source_digits: %d\n%s\n" % (source_digits, upoly_to_text(poly, name))


def recognized_from_text(text: str, name: str = "x"):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("source_digits:"):
        raise ValueError("expected a 'source_digits: N' header")
    digits = int(lines[0].split(":", 1)[1])
    if len(lines) < 2:
        raise ValueError("missing polynomial line")
    return upoly_from_text(lines[1], name), digits


def write_recognized(path, poly: UPoly, source_digits: int) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(recognized_to_text(poly, source_digits))


def read_recognized(path):
    with open(path, encoding="ascii") as fh:
        return recognized_from_text(fh.read())
