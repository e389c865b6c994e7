from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quartic_torsion.exactpoly import UPoly
from quartic_torsion.numsolve import MPComplex
from quartic_torsion.recognize import (
    MinPolyResult,
    PowerBasisExpr,
    RecognitionConfig,
    cf_rational,
    count_roots_mod_p,
    express_in_basis,
    lll_reduce,
    minpoly_from_approx,
    orbit_poly,
    read_recognized,
    recognized_from_text,
    recognized_to_text,
    write_recognized,
)


def _mp(value, digits):
    """MPComplex at `digits` working digits.

    Pass a zero-argument callable for anything that must be *computed*
    (sqrt, pi, ...) so the evaluation happens at full precision; plain
    values are trusted to already carry `digits` digits.
    """
    with mpmath.workdps(digits + 10):
        if callable(value):
            value = value()
        return MPComplex.from_mpc(mpmath.mpc(value), digits)


# --------------------------------------------------------------------------
# LLL
# --------------------------------------------------------------------------


def _hnf(rows):
    """Row-style Hermite normal form; canonical per lattice (test oracle)."""
    rows = [list(r) for r in rows]
    m, n = len(rows), len(rows[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, m):
            while rows[i][c]:
                q = rows[r][c] // rows[i][c]
                rows[r] = [a - q * b for a, b in zip(rows[r], rows[i])]
                rows[r], rows[i] = rows[i], rows[r]
        if rows[r][c] < 0:
            rows[r] = [-a for a in rows[r]]
        for i in range(r):
            q = rows[i][c] // rows[r][c]
            rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return tuple(tuple(row) for row in rows[:r])


def _int_det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    out = 0
    for j in range(n):
        if M[0][j]:
            minor = [row[:j] + row[j + 1:] for row in M[1:]]
            out += (-1) ** j * M[0][j] * _int_det(minor)
    return out


def test_lll_identity_is_fixed():
    basis = [(1, 0), (0, 1)]
    assert sorted(map(tuple, lll_reduce(basis))) == [(0, 1), (1, 0)]


def test_lll_classic_two_dim():
    # the textbook pair (1, 1), (1, 0) reduces to vectors of norm 1
    red = lll_reduce([(1, 1), (1, 0)])
    norms = sorted(a * a + b * b for a, b in red)
    assert norms == [1, 1]


def test_lll_rejects_dependent_columns():
    with pytest.raises(ValueError, match="dependent"):
        lll_reduce([(1, 2), (2, 4)])


@given(st.integers(2, 4).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(-9, 9), min_size=n, max_size=n),
        min_size=n, max_size=n)))
@settings(max_examples=60, deadline=None)
def test_lll_preserves_the_lattice_and_reduces(rows):
    from hypothesis import assume
    assume(_int_det(rows) != 0)
    red = lll_reduce([tuple(r) for r in rows])
    assert _hnf(red) == _hnf(rows)
    # size reduction + Lovasz condition, checked in exact arithmetic
    b = [list(map(Fraction, v)) for v in red]
    n = len(b)
    mu = [[Fraction(0)] * n for _ in range(n)]
    bs = [v[:] for v in b]
    B = [Fraction(0)] * n
    for i in range(n):
        bs[i] = b[i][:]
        for j in range(i):
            mu[i][j] = (sum(x * y for x, y in zip(b[i], bs[j])) / B[j])
            bs[i] = [x - mu[i][j] * y for x, y in zip(bs[i], bs[j])]
        B[i] = sum(x * x for x in bs[i])
    delta = Fraction(99, 100)
    for i in range(n):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2)
    for i in range(1, n):
        assert B[i] >= (delta - mu[i][i - 1] ** 2) * B[i - 1]


# --------------------------------------------------------------------------
# minimal polynomials
# --------------------------------------------------------------------------


def test_minpoly_sqrt2():
    alpha = _mp(lambda: mpmath.sqrt(2), 50)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([-2, 0, 1])
    assert got.residual_gamma >= 0


def test_minpoly_catches_rationals_at_degree_one():
    alpha = _mp(lambda: mpmath.mpf(1) / 2, 40)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([-1, 2])


def test_minpoly_cube_root_two():
    alpha = _mp(lambda: mpmath.cbrt(2), 50)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([-2, 0, 0, 1])


def test_minpoly_imaginary_unit():
    alpha = _mp(mpmath.mpc(0, 1), 40)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([1, 0, 1])


def test_minpoly_needs_enough_digits():
    # degree-8 integers of height 432 are not certifiable from 20 digits
    with mpmath.workdps(80):
        roots = mpmath.polyroots([432, 0, 0, 0, -72, 0, 0, 0, -1],
                                 maxsteps=200)
        u = max((r for r in roots if abs(mpmath.im(r)) < 1e-40),
                key=lambda r: mpmath.re(r))
    alpha = _mp(u, 20)
    with pytest.raises(ValueError, match="no integer polynomial"):
        minpoly_from_approx(alpha, RecognitionConfig(max_degree=8))


def test_minpoly_octic_from_sixty_digits():
    # the polynomial of the acceptance example: 432 u^8 - 72 u^4 - 1
    with mpmath.workdps(80):
        roots = mpmath.polyroots([432, 0, 0, 0, -72, 0, 0, 0, -1],
                                 maxsteps=200)
        u = max((r for r in roots if abs(mpmath.im(r)) < 1e-40),
                key=lambda r: mpmath.re(r))
    alpha = _mp(u, 60)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([-1, 0, 0, 0, -72, 0, 0, 0, 432])


def test_minpoly_complex_octic_root():
    with mpmath.workdps(80):
        roots = mpmath.polyroots([1, 0, 0, 0, -72, 0, 0, 0, -432],
                                 maxsteps=200)
        z = next(r for r in roots if mpmath.im(r) > 0.1 and mpmath.re(r) > 0.1)
    alpha = _mp(z, 60)
    got = minpoly_from_approx(alpha)
    assert got.poly == UPoly([-432, 0, 0, 0, -72, 0, 0, 0, 1])


def test_minpoly_rejects_transcendental_input():
    alpha = _mp(lambda: +mpmath.pi, 40)
    with pytest.raises(ValueError, match="no integer polynomial"):
        minpoly_from_approx(alpha, RecognitionConfig(max_degree=3))


NONSQUARES = [2, 3, 5, 6, 7, 10, 11, 13]


@given(st.sampled_from(NONSQUARES),
       st.integers(-6, 6), st.fractions(min_value=-4, max_value=4,
                                        max_denominator=3))
@settings(max_examples=30, deadline=None)
def test_minpoly_quadratic_irrationals(d, p, q):
    from hypothesis import assume
    assume(q != 0)
    with mpmath.workdps(60):
        z = p + mpmath.mpf(q.numerator) / q.denominator * mpmath.sqrt(d)
    alpha = _mp(z, 50)
    got = minpoly_from_approx(alpha)
    # exact quadratic (x - p)^2 - q^2 d, cleared to coprime integers
    from quartic_torsion.exactpoly import integer_primitive
    exact = [Fraction(p) ** 2 - Fraction(q) ** 2 * d, -2 * Fraction(p),
             Fraction(1)]
    ints, _ = integer_primitive(exact)
    assert got.poly == UPoly(ints)
    # and it really vanishes on the input
    with mpmath.workdps(60):
        val = mpmath.polyval([mpmath.mpf(int(c)) for c
                              in reversed(got.poly.coeffs)], z)
        assert abs(val) < mpmath.mpf(10) ** -40


# --------------------------------------------------------------------------
# power-basis expressions
# --------------------------------------------------------------------------


def test_express_golden_ratio_square():
    with mpmath.workdps(60):
        phi = (1 + mpmath.sqrt(5)) / 2
        alpha = MPComplex.from_mpc(mpmath.mpc(phi ** 2), 50)
        one = MPComplex.from_mpc(mpmath.mpc(1), 50)
        base = MPComplex.from_mpc(mpmath.mpc(phi), 50)
    got = express_in_basis(alpha, [one, base])
    assert got.denominator == 1
    assert got.numerators == (1, 1)


def test_express_with_denominator():
    with mpmath.workdps(60):
        s = mpmath.sqrt(2)
        alpha = MPComplex.from_mpc(mpmath.mpc((s + 3) / 2), 50)
        one = MPComplex.from_mpc(mpmath.mpc(1), 50)
        base = MPComplex.from_mpc(mpmath.mpc(s), 50)
    got = express_in_basis(alpha, [one, base])
    assert got.denominator == 2
    assert got.numerators == (3, 1)


def test_express_requires_nonempty_basis():
    alpha = _mp(mpmath.mpf(1), 40)
    with pytest.raises(ValueError, match="basis"):
        express_in_basis(alpha, [])


def test_express_rejects_foreign_element():
    # cbrt(2) does not lie in Q(sqrt(2))
    with mpmath.workdps(50):
        alpha = MPComplex.from_mpc(mpmath.mpc(mpmath.cbrt(2)), 40)
        one = MPComplex.from_mpc(mpmath.mpc(1), 40)
        base = MPComplex.from_mpc(mpmath.mpc(mpmath.sqrt(2)), 40)
    with pytest.raises(ValueError, match="no basis expression"):
        express_in_basis(alpha, [one, base])


def test_power_basis_expr_rejects_zero_denominator():
    with pytest.raises(ValueError, match="denominator"):
        PowerBasisExpr(0, (1,), (None,))


# --------------------------------------------------------------------------
# continued fractions
# --------------------------------------------------------------------------


def test_cf_rational_examples():
    with mpmath.workdps(40):
        assert cf_rational(mpmath.mpf(1) / 3) == Fraction(1, 3)
        assert cf_rational(mpmath.mpf(2)) == Fraction(2)
        assert cf_rational(mpmath.mpf(-17) / 728) == Fraction(-17, 728)


def test_cf_rational_runs_out_of_iterations():
    cfg = RecognitionConfig(cf_tolerance=1e-30, cf_max_iters=4)
    with mpmath.workdps(40):
        with pytest.raises(ValueError, match="convergent"):
            cf_rational(mpmath.pi, cfg)


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6))
@settings(max_examples=150, deadline=None)
def test_cf_rational_roundtrip(p, q):
    L = len(str(q))
    cfg = RecognitionConfig(cf_tolerance=10.0 ** -(2 * L + 7))
    with mpmath.workdps(2 * L + 10):
        x = mpmath.mpf(p) / q
        assert cf_rational(x, cfg) == Fraction(p, q)


# --------------------------------------------------------------------------
# orbit polynomials
# --------------------------------------------------------------------------


def test_orbit_poly_conjugate_pair():
    roots = [_mp(mpmath.mpc(0, 1), 40), _mp(mpmath.mpc(0, -1), 40)]
    assert orbit_poly(roots) == UPoly([1, 0, 1])


def test_orbit_poly_full_octic():
    # all eight roots of u^8 - u^4/6 - 1/432 expand to the exact rational
    # coefficient vector
    with mpmath.workdps(70):
        roots = mpmath.polyroots(
            [mpmath.mpf(1), 0, 0, 0, -mpmath.mpf(1) / 6, 0, 0, 0,
             -mpmath.mpf(1) / 432], maxsteps=300)
        approx = [MPComplex.from_mpc(r, 60) for r in roots]
    got = orbit_poly(approx)
    assert got == UPoly([Fraction(-1, 432), 0, 0, 0, Fraction(-1, 6),
                         0, 0, 0, 1])


def test_orbit_poly_rejects_unclosed_root_sets():
    roots = [_mp(mpmath.mpc(0, 1), 40), _mp(mpmath.mpc(1, 1), 40)]
    with pytest.raises(ValueError, match="conjugation"):
        orbit_poly(roots)


@given(st.sets(st.integers(-5, 5), min_size=1, max_size=5))
@settings(max_examples=40, deadline=None)
def test_orbit_poly_recovers_integer_root_products(rs):
    roots = [_mp(mpmath.mpf(r), 40) for r in sorted(rs)]
    want = UPoly([1])
    for r in sorted(rs):
        want = want * UPoly([-r, 1])
    assert orbit_poly(roots) == want


# --------------------------------------------------------------------------
# root counts mod p
# --------------------------------------------------------------------------


def test_count_roots_mod_p_splits():
    # x^2 - 2 mod 7: 2 = 3^2, two roots; mod 5: none
    f = UPoly([-2, 0, 1])
    assert count_roots_mod_p(f, 7) == 2
    assert count_roots_mod_p(f, 5) == 0


def test_count_roots_mod_p_counts_distinct_roots_once():
    # (x - 1)^2 has the single root 1 mod any p
    f = UPoly([1, -2, 1])
    assert count_roots_mod_p(f, 11) == 1


def test_count_roots_mod_p_full_split():
    # x^3 - x = x(x-1)(x+1) splits mod every p
    f = UPoly([0, -1, 0, 1])
    assert count_roots_mod_p(f, 13) == 3


def test_count_roots_mod_p_rejects_bad_primes():
    f = UPoly([Fraction(1, 3), 0, 1])
    with pytest.raises(ValueError, match="denominator"):
        count_roots_mod_p(f, 3)
    g = UPoly([1, 0, 7])
    with pytest.raises(ValueError, match="leading"):
        count_roots_mod_p(g, 7)


@given(st.lists(st.integers(-9, 9), min_size=2, max_size=6),
       st.sampled_from([3, 5, 7, 11, 13]))
@settings(max_examples=60, deadline=None)
def test_count_roots_mod_p_matches_brute_force(coeffs, p):
    from hypothesis import assume
    f = UPoly(coeffs)
    assume(not f.is_zero() and f.degree >= 1)
    assume(int(f.coeffs[-1]) % p != 0)
    got = count_roots_mod_p(f, p)
    want = sum(1 for x in range(p)
               if sum(int(c) * pow(x, k, p) for k, c in
                      enumerate(f.coeffs)) % p == 0)
    assert got == want


# --------------------------------------------------------------------------
# configuration and file format
# --------------------------------------------------------------------------


def test_recognition_config_validation():
    with pytest.raises(ValueError):
        RecognitionConfig(lll_delta=1.5)
    with pytest.raises(ValueError):
        RecognitionConfig(max_degree=0)
    with pytest.raises(ValueError):
        RecognitionConfig(k_prime=0)


def test_recognized_file_roundtrip(tmp_path):
    f = tmp_path / "minpoly.txt"
    poly = UPoly([-1, 0, 0, 0, -72, 0, 0, 0, 432])
    write_recognized(f, poly, 60)
    back, digits = read_recognized(f)
    assert back == poly
    assert digits == 60


def test_recognized_text_errors():
    with pytest.raises(ValueError, match="source_digits"):
        recognized_from_text("degree: 8\n1*x^2\n")
    with pytest.raises(ValueError, match="polynomial"):
        recognized_from_text("source_digits: 40\n")
    text = recognized_to_text(UPoly([-2, 0, 1]), 50)
    assert text.splitlines()[0] == "source_digits: 50"
