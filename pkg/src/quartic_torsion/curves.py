"""Plane quartic models: coefficients, transforms, normalization.

A quartic is stored as 15 coefficients a0..a14 against the monomial order

    x^4, x^3y, x^3z, x^2y^2, x^2yz, x^2z^2, xy^3, xy^2z, xyz^2, xz^3,
    y^4, y^3z, y^2z^2, yz^3, z^4.

The *normalized* position used by the 3-torsion derivation puts a rational
point at (0:1:0) with tangent line z = 0, which forces a10 = a6 = 0 and
needs a11 != 0 (otherwise the curve would carry a g^1_2 and be hyperelliptic,
not a smooth plane quartic through that point).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .exactpoly import MPoly, integer_primitive

MONOMIALS: tuple[tuple[int, int, int], ...] = (
    (4, 0, 0), (3, 1, 0), (3, 0, 1), (2, 2, 0), (2, 1, 1), (2, 0, 2),
    (1, 3, 0), (1, 2, 1), (1, 1, 2), (1, 0, 3),
    (0, 4, 0), (0, 3, 1), (0, 2, 2), (0, 1, 3), (0, 0, 4),
)

_MONOMIAL_INDEX = {m: i for i, m in enumerate(MONOMIALS)}


class HyperellipticModelError(ValueError):
    """Raised when normalization would need a11 = 0 (no smooth quartic there)."""


@dataclass(frozen=True)
class ProjPoint:
    """Point of P^2 with exact rational coordinates."""

    coords: tuple[Fraction, Fraction, Fraction]

    def __init__(self, x, y, z):
        object.__setattr__(
            self, "coords", (Fraction(x), Fraction(y), Fraction(z))
        )
        if not any(self.coords):
            raise ValueError("(0:0:0) is not a projective point")

    def canonical(self) -> "ProjPoint":
        """Scale so the first nonzero coordinate is 1."""
        pivot = next(c for c in self.coords if c)
        return ProjPoint(*(c / pivot for c in self.coords))

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.canonical().coords == other.canonical().coords

    def __hash__(self):
        return hash(self.canonical().coords)


class ProjTransform:
    """Invertible 3x3 rational matrix acting on P^2 (columns are images)."""

    def __init__(self, rows):
        self.rows = tuple(
            tuple(Fraction(v) for v in row) for row in rows
        )
        if len(self.rows) != 3 or any(len(r) != 3 for r in self.rows):
            raise ValueError("need a 3x3 matrix")
        if self.det() == 0:
            raise ValueError("transform must be invertible")

    @classmethod
    def identity(cls) -> "ProjTransform":
        return cls([[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    def det(self) -> Fraction:
        ((a, b, c), (d, e, f), (g, h, i)) = self.rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def inverse(self) -> "ProjTransform":
        ((a, b, c), (d, e, f), (g, h, i)) = self.rows
        det = self.det()
        cof = [
            [e * i - f * h, c * h - b * i, b * f - c * e],
            [f * g - d * i, a * i - c * g, c * d - a * f],
            [d * h - e * g, b * g - a * h, a * e - b * d],
        ]
        return ProjTransform([[v / det for v in row] for row in cof])

    def __matmul__(self, other: "ProjTransform") -> "ProjTransform":
        rows = [
            [
                sum(self.rows[i][k] * other.rows[k][j] for k in range(3))
                for j in range(3)
            ]
            for i in range(3)
        ]
        return ProjTransform(rows)

    def apply_point(self, p: ProjPoint) -> ProjPoint:
        x = [sum(r[j] * c for j, c in enumerate(p.coords)) for r in self.rows]
        return ProjPoint(*x)

    def __eq__(self, other):
        return isinstance(other, ProjTransform) and self.rows == other.rows

    def __repr__(self):
        return f"ProjTransform({[list(map(str, r)) for r in self.rows]})"


@dataclass(frozen=True)
class PlaneQuartic:
    """Smooth plane quartic f = sum a_i * m_i with an optional marked point."""

    a: tuple
    point: ProjPoint | None = None

    def __post_init__(self):
        if len(self.a) != 15:
            raise ValueError("a plane quartic needs 15 coefficients")
        object.__setattr__(self, "a", tuple(Fraction(c) for c in self.a))
        if not any(self.a):
            raise ValueError("zero polynomial is not a quartic")
        if self.point is not None and self.evaluate(*self.point) != 0:
            raise ValueError("marked point does not lie on the curve")

    @classmethod
    def from_mpoly(cls, p: MPoly, point: ProjPoint | None = None) -> "PlaneQuartic":
        if p.arity != 3:
            raise ValueError("expected a polynomial in x, y, z")
        a = [Fraction(0)] * 15
        for e, c in p.terms.items():
            if sum(e) != 4:
                raise ValueError("polynomial is not homogeneous of degree 4")
            a[_MONOMIAL_INDEX[e]] = Fraction(c)
        return cls(tuple(a), point)

    def as_mpoly(self) -> MPoly:
        return MPoly(3, {m: c for m, c in zip(MONOMIALS, self.a) if c})

    def evaluate(self, x, y, z):
        acc = 0
        for (i, j, k), c in zip(MONOMIALS, self.a):
            if c:
                acc += c * x**i * y**j * z**k
        return acc

    def gradient(self, p: ProjPoint) -> tuple[Fraction, Fraction, Fraction]:
        q = self.as_mpoly()
        pt = list(p.coords)
        return tuple(q.partial(i).evaluate(pt) for i in range(3))

    @property
    def alpha_f(self) -> Fraction | None:
        """a3/a11, defined whenever a11 != 0."""
        if self.a[11] == 0:
            return None
        return self.a[3] / self.a[11]

    @property
    def is_normalized(self) -> bool:
        return self.a[6] == 0 and self.a[10] == 0 and self.a[11] != 0

    def is_smooth_at(self, p: ProjPoint) -> bool:
        return any(self.gradient(p))

    def scale(self, c) -> "PlaneQuartic":
        c = Fraction(c)
        if not c:
            raise ValueError("cannot scale a curve by zero")
        return PlaneQuartic(tuple(c * v for v in self.a), self.point)


def apply_transform(C: PlaneQuartic, T: ProjTransform) -> PlaneQuartic:
    """Pull back: the result is f(T v).  P lies on C iff T^{-1} P lies here."""
    rows = [
        MPoly(
            3,
            {
                (1, 0, 0): T.rows[i][0],
                (0, 1, 0): T.rows[i][1],
                (0, 0, 1): T.rows[i][2],
            },
        )
        for i in range(3)
    ]
    powers = [{0: MPoly.constant(3, 1)} for _ in range(3)]

    def power(j: int, k: int) -> MPoly:
        cache = powers[j]
        if k not in cache:
            cache[k] = power(j, k - 1) * rows[j]
        return cache[k]

    out = MPoly.zero(3)
    for (i, j, k), c in zip(MONOMIALS, C.a):
        if c:
            out = out + (power(0, i) * power(1, j) * power(2, k)).scale(c)
    new_point = None
    if C.point is not None:
        new_point = T.inverse().apply_point(C.point)
    return PlaneQuartic.from_mpoly(out, new_point)


def tangent_line(C: PlaneQuartic, p: ProjPoint) -> tuple[int, int, int]:
    """Tangent at a smooth point as primitive integer line coefficients.

    The line is grad f(p) . (x, y, z) = 0; by the Euler relation it passes
    through p.  Coefficients are scaled to coprime integers with the first
    nonzero one positive.
    """
    if C.evaluate(*p) != 0:
        raise ValueError("point is not on the curve")
    g = C.gradient(p)
    if not any(g):
        raise ValueError("curve is singular at the point")
    ints, _ = integer_primitive(g)
    lead = next(v for v in ints if v)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def _move_point_to_origin(C: PlaneQuartic, p: ProjPoint) -> tuple[PlaneQuartic, ProjTransform]:
    """Transform sending (0:1:0) to p, deterministically."""
    coords = list(p.coords)
    pivot = next(i for i, c in enumerate(coords) if c)
    others = [i for i in range(3) if i != pivot]
    cols = [[Fraction(0)] * 3 for _ in range(3)]
    # middle column is p itself; the rest are unit vectors off the pivot row
    for r in range(3):
        cols[1][r] = coords[r]
    cols[0][others[0]] = Fraction(1)
    cols[2][others[1]] = Fraction(1)
    T = ProjTransform([[cols[j][r] for j in range(3)] for r in range(3)])
    return apply_transform(C, T), T


def _move_tangent_to_z(C: PlaneQuartic) -> tuple[PlaneQuartic, ProjTransform]:
    """With the marked point at (0:1:0), make the tangent there z = 0."""
    T = ProjTransform.identity()
    # gradient at (0:1:0) is (a6, 4*a10, a11) and a10 = 0 already
    if C.a[11] == 0:
        if C.a[6] == 0:
            raise ValueError("curve is singular at (0:1:0)")
        swap = ProjTransform([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        C, T = apply_transform(C, swap), T @ swap
    if C.a[6]:
        c = -C.a[6] / C.a[11]
        shear = ProjTransform([[1, 0, 0], [0, 1, 0], [c, 0, 1]])
        C, T = apply_transform(C, shear), T @ shear
    return C, T


def normalize(C: PlaneQuartic, p: ProjPoint | None = None) -> tuple[PlaneQuartic, ProjTransform]:
    """Move a rational point to (0:1:0) with tangent z = 0, canonically.

    Steps: move the point, move its tangent, then a cleanup pass that kills
    the y^2z^2 coefficient by the shear y -> y - a12/(3 a11) z, scales all
    coefficients to coprime integers and makes the first nonzero coefficient
    positive.  The output satisfies a6 = a10 = 0 and a11 != 0; a rational
    point with those properties and a11 = 0 cannot exist on a smooth quartic
    (the projection from the point would make the curve hyperelliptic), so
    that case raises HyperellipticModelError.

    A warning (not an error) is issued when the tangent meets the curve with
    multiplicity >= 3 at the point, i.e. the point is a flex; in normalized
    coordinates that is exactly a3 = 0.

    Returns (normalized curve, transform T) with f_norm proportional to
    f o T; a point Q lies on C iff T^{-1} Q lies on the normalized curve.
    """
    if p is None:
        p = C.point
    if p is None:
        raise ValueError("normalization needs a rational point on the curve")
    if C.evaluate(*p) != 0:
        raise ValueError("point is not on the curve")
    if not any(C.gradient(p)):
        raise ValueError("curve is singular at the point")

    C1, T1 = _move_point_to_origin(C, p)
    assert C1.a[10] == 0  # the moved point lies on the curve
    C2, T2 = _move_tangent_to_z(C1)
    assert C2.a[10] == 0 and C2.a[6] == 0
    if C2.a[11] == 0:
        raise HyperellipticModelError(
            "tangent direction degenerates: a11 = 0, so the model would be "
            "hyperelliptic rather than a smooth plane quartic"
        )

    T3 = ProjTransform.identity()
    if C2.a[12]:
        e = -C2.a[12] / (3 * C2.a[11])
        T3 = ProjTransform([[1, 0, 0], [0, 1, e], [0, 0, 1]])
        C2 = apply_transform(C2, T3)

    ints, _ = integer_primitive(C2.a)
    lead = next(v for v in ints if v)
    if lead < 0:
        ints = [-v for v in ints]
    out = PlaneQuartic(tuple(ints), ProjPoint(0, 1, 0))

    if out.a[3] == 0:
        warnings.warn(
            "marked point is a flex: tangent meets the curve with "
            "multiplicity >= 3",
            stacklevel=2,
        )
    return out, T1 @ T2 @ T3


# ---------------------------------------------------------------------------
# Named curves used across tests and scripts

FERMAT = PlaneQuartic(
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, -1),  # x^4 + y^4 - z^4
    ProjPoint(1, 0, 1),
)

KLEIN = PlaneQuartic(
    (0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0),  # x^3y + y^3z + xz^3
    ProjPoint(0, 1, 0),
)


def curve_to_text(C: PlaneQuartic) -> str:
    """One line of 15 rational tokens, then an optional marked-point line."""
    line = " ".join(
        "%d/%d" % (c.numerator, c.denominator) for c in C.a
    )
    if C.point is not None:
        x, y, z = C.point.coords
        line += "\npoint: %s %s %s" % (x, y, z)
    return line + "\n"


def curve_from_text(text: str) -> PlaneQuartic:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty curve file")
    toks = lines[0].split()
    if len(toks) != 15:
        raise ValueError("expected 15 coefficient tokens, got %d" % len(toks))
    a = tuple(Fraction(t) for t in toks)
    point = None
    for ln in lines[1:]:
        if ln.startswith("point:"):
            parts = ln[len("point:"):].split()
            if len(parts) != 3:
                raise ValueError("point line needs 3 coordinates")
            point = ProjPoint(*(Fraction(v) for v in parts))
    return PlaneQuartic(a, point)


def read_curve(path: str) -> PlaneQuartic:
    with open(path, "r", encoding="utf-8") as fh:
        return curve_from_text(fh.read())


def write_curve(path: str, C: PlaneQuartic) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(curve_to_text(C))
