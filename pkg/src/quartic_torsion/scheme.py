"""Derivation of the 11-equation system whose solutions are 3-torsion cubics.

Setting: C is a normalized quartic (point (0:1:0), tangent z = 0, so
a6 = a10 = 0, a11 != 0).  A cubic of the shape

    h = -y^2 z + s1_homogeneous,   s1 = A(x) + B(x) y,
    A = b1 x^3 + b3 x^2 + b4 x + b2,    B = bf x^2 + b5 x + b6,

meets C with every intersection multiplicity divisible by 3 exactly when the
degree-9 polynomial s4 below is a perfect cube c*(x^3+b8 x^2+b9 x+b10)^3 and
s2, s3 share no root.  Reducing f(x, y, 1) by y^2 := s1 until it is linear in
y leaves F = s2(x) y + s3(x); then s4 = A s2^2 - B s2 s3 - s3^2 (the cleared
numerator of s1(x, -s3/s2) - (s3/s2)^2).  Matching coefficients of
s4 - b7 (x^3 + b8 x^2 + b9 x + b10)^3 gives e1..e10 (ascending powers of x),
and e11 = b11 * Res_x(s2, s3) + 1 forces the resultant to be nonzero.

The x^2 y coefficient of s1 is not free: bf = -a3/a11, pinned by the
vanishing of the x^4 coefficient of s2 (the a11 bf^2 + a3 bf cancellation).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .curves import MONOMIALS, PlaneQuartic
from .exactpoly import MPoly, det_minor_expansion, sylvester_matrix

# internal variable order: x, y, b1..b11
_ARITY = 13
_X, _Y = 0, 1


def _b(i: int) -> MPoly:
    """Unknown b_i (1-based) in the internal 13-variable ring."""
    return MPoly.variable(_ARITY, 1 + i)


def _xpow(k: int) -> MPoly:
    e = [0] * _ARITY
    e[_X] = k
    return MPoly(_ARITY, {tuple(e): 1})


BETA_NAMES = tuple("b%d" % i for i in range(1, 12))


@dataclass(frozen=True)
class TorsionScheme:
    """The derived polynomial system for one normalized quartic."""

    curve: PlaneQuartic
    beta_f: Fraction
    s1: MPoly                      # in (x, y, b1..b6)
    s2: tuple[MPoly, ...]          # x-coefficients (ascending), in b1..b11
    s3: tuple[MPoly, ...]
    s4: tuple[MPoly, ...]
    equations: tuple[MPoly, ...]   # e1..e11 in b1..b11

    @property
    def n_unknowns(self) -> int:
        return 11


@dataclass(frozen=True)
class SchemeSolution:
    """Numeric solution of a TorsionScheme."""

    beta: tuple
    residual: float
    precision_digits: int


@dataclass(frozen=True)
class TorsionCubic:
    """Contact cubic -y^2 z + (homogenized s1), alpha-normalized with a6 = -1.

    alpha = (a1..a7) are the free coefficients of
    a1 x^3 + a2 z^3 + a3 x^2 z + a4 x z^2 + a5 x y z + a6 y^2 z + a7 y z^2,
    with a6 = -1 fixed and the x^2 y coefficient constrained to alpha_f * a6.
    """

    alpha: tuple
    x2y_coeff: object

    def monomial_dict(self) -> dict[tuple[int, int, int], object]:
        a1, a2, a3, a4, a5, a6, a7 = self.alpha
        return {
            (3, 0, 0): a1,
            (0, 0, 3): a2,
            (2, 0, 1): a3,
            (1, 0, 2): a4,
            (1, 1, 1): a5,
            (0, 2, 1): a6,
            (0, 1, 2): a7,
            (2, 1, 0): self.x2y_coeff,
        }


def _curve_affine_f(C: PlaneQuartic) -> MPoly:
    """f(x, y, 1) embedded into the internal (x, y, b*) ring."""
    terms = {}
    for (i, j, _k), c in zip(MONOMIALS, C.a):
        if c:
            e = [0] * _ARITY
            e[_X], e[_Y] = i, j
            terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return MPoly(_ARITY, terms)


def _reduce_y_squared(F: MPoly, s1: MPoly) -> MPoly:
    """Replace y^k by y^(k mod 2) * s1^(k div 2) until F is linear in y."""
    for _ in range(4):
        if F.degree(_Y) < 2:
            return F
        split = F.coefficients_in(_Y)
        out = MPoly.zero(_ARITY)
        y = MPoly.variable(_ARITY, _Y)
        for k, coeff in split.items():
            rep = coeff
            if k >= 2:
                rep = coeff * s1 ** (k // 2)
                if k % 2:
                    rep = rep * y
            elif k == 1:
                rep = coeff * y
            out = out + rep
        F = out
    if F.degree(_Y) >= 2:
        raise AssertionError("y^2 reduction did not terminate in 4 passes")
    return F


def _project_beta(p: MPoly) -> MPoly:
    """Drop the x, y slots (must be unused) leaving a polynomial in b1..b11."""
    return p.project(list(range(2, _ARITY)))


def _x_coefficients(p: MPoly, up_to: int) -> list[MPoly]:
    out = []
    for k in range(up_to + 1):
        out.append(_project_beta(p.coefficient_of(_X, k)))
    return out


def derive_scheme(C: PlaneQuartic) -> TorsionScheme:
    """Derive e1..e11 for a normalized quartic.

    Raises ValueError when the curve is not normalized.  The derivation
    asserts the two structural degree drops (x^4 coefficient of s2 and x^5
    coefficient of s3 vanish identically once bf = -a3/a11 is substituted)
    and that s4 has x-degree exactly 9.
    """
    if not C.is_normalized:
        raise ValueError("scheme derivation needs a normalized curve "
                         "(a6 = a10 = 0, a11 != 0)")
    bf = -C.a[3] / C.a[11]

    A = _b(1) * _xpow(3) + _b(3) * _xpow(2) + _b(4) * _xpow(1) + _b(2)
    B = _xpow(2).scale(bf) + _b(5) * _xpow(1) + _b(6)
    y = MPoly.variable(_ARITY, _Y)
    s1 = A + B * y

    F = _reduce_y_squared(_curve_affine_f(C), s1)
    assert F.degree(_Y) <= 1
    split = F.coefficients_in(_Y)
    s2_poly = split.get(1, MPoly.zero(_ARITY))
    s3_poly = split.get(0, MPoly.zero(_ARITY))

    # structural degree drops forced by bf = -a3/a11
    assert s2_poly.coefficient_of(_X, 4).is_zero(), "x^4 of s2 must cancel"
    assert s2_poly.degree(_X) <= 3
    assert s3_poly.coefficient_of(_X, 5).is_zero(), "x^5 of s3 must cancel"
    assert s3_poly.degree(_X) <= 4

    s4_poly = A * s2_poly**2 - B * s2_poly * s3_poly - s3_poly**2
    assert s4_poly.degree(_X) == 9, "s4 must have x-degree exactly 9"
    assert s4_poly.degree(_Y) == 0

    cube = _xpow(3) + _b(8) * _xpow(2) + _b(9) * _xpow(1) + _b(10)
    diff = s4_poly - _b(7) * cube**3

    equations = [_project_beta(diff.coefficient_of(_X, k)) for k in range(10)]

    s2_coeffs = _x_coefficients(s2_poly, 3)
    s3_coeffs = _x_coefficients(s3_poly, 4)
    syl = sylvester_matrix(
        list(reversed(s2_coeffs)), list(reversed(s3_coeffs)), 3, 4
    )
    syl = [
        [MPoly.constant(11, v) if isinstance(v, int) else v for v in row]
        for row in syl
    ]
    res = det_minor_expansion(
        syl, zero=MPoly.zero(11), is_zero=lambda m: m.is_zero()
    )
    e11 = res * MPoly.variable(11, BETA_NAMES.index("b11")) + MPoly.constant(11, 1)
    equations.append(e11)

    s1_pub = s1.project([_X, _Y] + [2 + i for i in range(6)])

    return TorsionScheme(
        curve=C,
        beta_f=bf,
        s1=s1_pub,
        s2=tuple(s2_coeffs),
        s3=tuple(s3_coeffs),
        s4=tuple(_x_coefficients(s4_poly, 9)),
        equations=tuple(equations),
    )


def residual(S: TorsionScheme, beta, digits: int = 16):
    """max |e_i(beta)| over the 11 equations, evaluated at `digits` digits."""
    if len(beta) != 11:
        raise ValueError("expected 11 coordinates")
    if digits < 16:
        raise ValueError("residual precision must be at least 16 digits")
    with mpmath.workdps(digits + 10):
        vals = [mpmath.mpc(b) for b in beta]
        worst = mpmath.mpf(0)
        for eq in S.equations:
            v = abs(_eval_beta(eq, vals))
            if v > worst:
                worst = v
    return worst


def _eval_beta(eq: MPoly, vals):
    acc = mpmath.mpc(0)
    for e, c in eq.terms.items():
        term = mpmath.mpf(c.numerator) / c.denominator
        for v, k in zip(vals, e):
            if k:
                term *= v**k
        acc += term
    return acc


def solution_to_cubic(sol: SchemeSolution, S: TorsionScheme) -> TorsionCubic:
    """Map a scheme solution to its contact cubic (alpha-form, a6 = -1)."""
    b1, b2, b3, b4, b5, b6 = sol.beta[:6]
    bf = S.beta_f
    x2y = mpmath.mpf(bf.numerator) / bf.denominator
    return TorsionCubic(
        alpha=(b1, b2, b3, b4, b5, -mpmath.mpf(1), b6),
        x2y_coeff=x2y,
    )


def scheme_to_text(S: TorsionScheme) -> str:
    from .exactpoly import mpoly_to_text

    lines = ["unknowns: " + " ".join(BETA_NAMES)]
    lines.append("beta_f: %d/%d" % (S.beta_f.numerator, S.beta_f.denominator))
    for i, eq in enumerate(S.equations, start=1):
        lines.append("e%d: %s" % (i, mpoly_to_text(eq, BETA_NAMES)))
    return "\n".join(lines) + "\n"


def scheme_equations_from_text(text: str) -> tuple[Fraction, list[MPoly]]:
    """Parse a scheme file back to (beta_f, equations)."""
    from .exactpoly import mpoly_from_text

    beta_f = None
    eqs: dict[int, MPoly] = {}
    for ln in text.strip().splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("unknowns:"):
            names = ln.split(":", 1)[1].split()
            if tuple(names) != BETA_NAMES:
                raise ValueError("unexpected unknown list %r" % names)
        elif ln.startswith("beta_f:"):
            beta_f = Fraction(ln.split(":", 1)[1].strip())
        elif ln[0] == "e":
            label, body = ln.split(":", 1)
            eqs[int(label[1:])] = mpoly_from_text(body.strip(), BETA_NAMES)
        else:
            raise ValueError("unrecognized scheme line %r" % ln[:40])
    if beta_f is None or sorted(eqs) != list(range(1, 12)):
        raise ValueError("scheme file incomplete")
    return beta_f, [eqs[i] for i in range(1, 12)]
