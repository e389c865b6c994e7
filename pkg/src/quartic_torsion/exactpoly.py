"""Exact polynomial arithmetic: univariate/multivariate polynomials, resultants.

Coefficients are ``fractions.Fraction`` in exact contexts, but both polynomial
classes are deliberately coefficient-agnostic: the same arithmetic runs with
``mpmath.mpc`` or plain ``complex`` coefficients when a numeric pipeline wants
to reuse a symbolic derivation step.  Division only happens where documented.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Rational = Fraction


def _as_coeff(c):
    """Normalize ints to Fraction so mixed exact arithmetic stays exact."""
    if isinstance(c, int):
        return Fraction(c)
    return c


class UPoly:
    """Dense univariate polynomial, coefficients ascending by degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [_as_coeff(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = cs

    @classmethod
    def zero(cls) -> "UPoly":
        return cls([])

    @classmethod
    def one(cls) -> "UPoly":
        return cls([1])

    @classmethod
    def x(cls) -> "UPoly":
        return cls([0, 1])

    @classmethod
    def monomial(cls, c, k: int) -> "UPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial at -1."""
        return len(self.coeffs) - 1

    @property
    def lead(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __eq__(self, other) -> bool:
        return isinstance(other, UPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __add__(self, other: "UPoly") -> "UPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UPoly([self[k] + other[k] for k in range(n)])

    def __sub__(self, other: "UPoly") -> "UPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UPoly([self[k] - other[k] for k in range(n)])

    def __neg__(self) -> "UPoly":
        return UPoly([-c for c in self.coeffs])

    def __mul__(self, other: "UPoly") -> "UPoly":
        if self.is_zero() or other.is_zero():
            return UPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UPoly(out)

    def scale(self, c) -> "UPoly":
        c = _as_coeff(c)
        return UPoly([c * a for a in self.coeffs])

    def __pow__(self, n: int) -> "UPoly":
        if n < 0:
            raise ValueError("negative power")
        out, base = UPoly.one(), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UPoly":
        return UPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "UPoly":
        if self.is_zero():
            return self
        inv = 1 / self.lead
        return UPoly([c * inv for c in self.coeffs])

    def divmod(self, other: "UPoly") -> tuple["UPoly", "UPoly"]:
        """Euclidean division; coefficients must form a field."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        d, lc = other.degree, other.lead
        while len(r) - 1 >= d and any(r):
            while r and not r[-1]:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            c = r[-1] / lc
            q[k] = c
            for i, b in enumerate(other.coeffs):
                r[k + i] -= c * b
            r.pop()
        return UPoly(q), UPoly(r)

    def map_coefficients(self, fn: Callable) -> "UPoly":
        return UPoly([fn(c) for c in self.coeffs])

    def __repr__(self) -> str:
        return f"UPoly({self.coeffs!r})"


def upoly_gcd(u: UPoly, v: UPoly) -> UPoly:
    """Monic gcd over a coefficient field (Euclid)."""
    a, b = u, v
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    return a.monic() if not a.is_zero() else a


def sylvester_matrix(u: Sequence, v: Sequence, m: int, n: int) -> list[list]:
    """(m+n) x (m+n) Sylvester matrix from descending coefficient lists.

    ``u`` has nominal degree m (len m+1, leading first), ``v`` nominal degree
    n.  The n rows shifted from u sit on top, the m rows from v below, so the
    determinant is Res(u, v) in the convention with sign (-1)^(mn) relative
    to the opposite stacking.
    """
    if len(u) != m + 1 or len(v) != n + 1:
        raise ValueError("coefficient list length must match nominal degree + 1")
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(u) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(v) + [0] * (size - n - 1 - i))
    return rows


def _det_fraction(mat: list[list]) -> Fraction:
    """Exact determinant by Gaussian elimination over Fraction."""
    n = len(mat)
    if n == 0:
        return Fraction(1)
    a = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def det_minor_expansion(mat: list[list], *, zero, is_zero: Callable) -> object:
    """Determinant by memoized cofactor expansion, generic over the entry ring.

    Entries only need + and *.  Intended for small matrices (size <= 8) whose
    entries are themselves polynomials; memoization is on (row, column-subset)
    so shared minors are expanded once.
    """
    n = len(mat)
    if n == 0:
        raise ValueError("empty matrix")
    memo: dict[tuple[int, int], object] = {}
    full = (1 << n) - 1

    def minor(row: int, colmask: int):
        if row == n:
            return None  # empty product, handled by caller
        key = (row, colmask)
        if key in memo:
            return memo[key]
        acc = None
        sign = 1
        for col in range(n):
            bit = 1 << col
            if not (colmask & bit):
                continue
            entry = mat[row][col]
            if not is_zero(entry):
                sub = minor(row + 1, colmask & ~bit)
                term = entry if sub is None else entry * sub
                if sign < 0:
                    term = -term
                acc = term if acc is None else acc + term
            sign = -sign
        if acc is None:
            acc = zero
        memo[key] = acc
        return acc

    out = minor(0, full)
    return zero if out is None else out


def resultant(u: UPoly, v: UPoly) -> Fraction:
    """Resultant of two rational polynomials via the Sylvester determinant.

    Uses the actual degrees of u and v.  Res(u, v) for constants follows the
    usual conventions: Res(c, v) = c^deg(v), Res of two constants is 1.
    """
    if u.is_zero() and v.is_zero():
        raise ValueError("resultant of two zero polynomials")
    m, n = max(u.degree, 0), max(v.degree, 0)
    if m == 0 and n == 0:
        return Fraction(1)
    if m == 0:
        return Fraction(u[0]) ** n
    if n == 0:
        return Fraction(v[0]) ** m
    ud = list(reversed(u.coeffs))
    vd = list(reversed(v.coeffs))
    return _det_fraction(sylvester_matrix(ud, vd, m, n))


def upoly_is_perfect_cube_form(s4: UPoly):
    """Detect s4 = c * (x^3 + a x^2 + b x + d)^3 and return (c, cubic).

    The candidate cubic is read off the three top coefficients of the monic
    normalization and then verified by exact re-expansion; returns None when
    s4 is not of that shape.  Requires degree exactly 9.
    """
    if s4.degree != 9:
        raise ValueError("perfect-cube detection expects degree 9, got %d" % s4.degree)
    c = s4.lead
    t = s4.scale(1 / c)
    a = t[8] / 3
    b = (t[7] - 3 * a * a) / 3
    d = (t[6] - a**3 - 6 * a * b) / 3
    cubic = UPoly([d, b, a, 1])
    if (cubic**3).scale(c) == s4:
        return c, cubic
    return None


class MPoly:
    """Sparse multivariate polynomial: exponent tuple -> coefficient."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: dict | None = None):
        self.arity = arity
        self.terms: dict[tuple[int, ...], object] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != arity:
                    raise ValueError("exponent tuple arity mismatch")
                c = _as_coeff(c)
                if c:
                    self.terms[tuple(e)] = c

    @classmethod
    def zero(cls, arity: int) -> "MPoly":
        return cls(arity)

    @classmethod
    def constant(cls, arity: int, c) -> "MPoly":
        return cls(arity, {tuple([0] * arity): c})

    @classmethod
    def variable(cls, arity: int, i: int) -> "MPoly":
        e = [0] * arity
        e[i] = 1
        return cls(arity, {tuple(e): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MPoly)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def _check(self, other: "MPoly"):
        if self.arity != other.arity:
            raise ValueError("arity mismatch: %d vs %d" % (self.arity, other.arity))

    def __add__(self, other: "MPoly") -> "MPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MPoly(self.arity, out)

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __neg__(self) -> "MPoly":
        return MPoly(self.arity, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "MPoly") -> "MPoly":
        self._check(other)
        out: dict[tuple[int, ...], object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MPoly(self.arity, out)

    def scale(self, c) -> "MPoly":
        c = _as_coeff(c)
        if not c:
            return MPoly.zero(self.arity)
        return MPoly(self.arity, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, n: int) -> "MPoly":
        if n < 0:
            raise ValueError("negative power")
        out = MPoly.constant(self.arity, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def degree(self, var: int | None = None) -> int:
        """Total degree, or degree in one variable; zero polynomial -> -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        return max(e[var] for e in self.terms)

    def coefficient_of(self, var: int, k: int) -> "MPoly":
        """Coefficient of var^k, as a polynomial with that variable removed
        from play (exponent zeroed, arity preserved)."""
        out = {}
        for e, c in self.terms.items():
            if e[var] == k:
                e2 = list(e)
                e2[var] = 0
                out[tuple(e2)] = c
        return MPoly(self.arity, out)

    def coefficients_in(self, var: int) -> dict[int, "MPoly"]:
        split: dict[int, dict] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            k = e2[var]
            e2[var] = 0
            split.setdefault(k, {})[tuple(e2)] = c
        return {k: MPoly(self.arity, t) for k, t in split.items()}

    def partial(self, var: int) -> "MPoly":
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k:
                e2 = list(e)
                e2[var] = k - 1
                out[tuple(e2)] = c * k
        return MPoly(self.arity, out)

    def evaluate(self, point: Sequence):
        if len(point) != self.arity:
            raise ValueError("point arity mismatch")
        acc = 0
        for e, c in self.terms.items():
            term = c
            for xi, k in zip(point, e):
                if k:
                    term = term * xi**k
            acc = acc + term
        return acc

    def map_coefficients(self, fn: Callable) -> "MPoly":
        return MPoly(self.arity, {e: fn(c) for e, c in self.terms.items()})

    def project(self, keep: Sequence[int]) -> "MPoly":
        """Restrict to the listed variables (all dropped exponents must be 0)."""
        out = {}
        keep = list(keep)
        dropped = [i for i in range(self.arity) if i not in keep]
        for e, c in self.terms.items():
            if any(e[i] for i in dropped):
                raise ValueError("nonzero exponent on a dropped variable")
            out[tuple(e[i] for i in keep)] = c
        return MPoly(len(keep), out)

    def embed(self, arity: int, positions: Sequence[int]) -> "MPoly":
        """Re-index variables into a wider variable set."""
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * arity
            for pos, k in zip(positions, e):
                e2[pos] = k
            out[tuple(e2)] = c
        return MPoly(arity, out)

    def __repr__(self) -> str:
        return f"MPoly(arity={self.arity}, nterms={len(self.terms)})"


def mpoly_substitute(p: MPoly, var: int, replacement: MPoly) -> MPoly:
    """Substitute a polynomial for one variable (a ring homomorphism).

    Powers of the replacement are cached, so it is multiplied out at most
    deg_var(p) times.
    """
    p._check(replacement)
    split = p.coefficients_in(var)
    if not split:
        return MPoly.zero(p.arity)
    out = MPoly.zero(p.arity)
    powers = {0: MPoly.constant(p.arity, 1)}

    def power(k: int) -> MPoly:
        if k not in powers:
            powers[k] = power(k - 1) * replacement
        return powers[k]

    for k, coeff in split.items():
        out = out + coeff * power(k)
    return out


_TOKEN = re.compile(r"^\s*(-?\d+)(?:/(\d+))?\s*$")


def _coeff_to_text(c: Fraction) -> str:
    c = Fraction(c)
    return "%d/%d" % (c.numerator, c.denominator)


def mpoly_to_text(p: MPoly, names: Sequence[str]) -> str:
    """Serialize with every variable's exponent explicit: 'p/q*x^i*y^j*z^k'."""
    if len(names) != p.arity:
        raise ValueError("names arity mismatch")
    if p.is_zero():
        return "0"
    parts = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        factors = [_coeff_to_text(c)]
        factors += ["%s^%d" % (nm, k) for nm, k in zip(names, e)]
        parts.append("*".join(factors))
    return " + ".join(parts)


def mpoly_from_text(s: str, names: Sequence[str]) -> MPoly:
    arity = len(names)
    idx = {nm: i for i, nm in enumerate(names)}
    s = s.strip()
    if s == "0" or not s:
        return MPoly.zero(arity)
    terms: dict[tuple[int, ...], Fraction] = {}
    for part in s.split("+"):
        part = part.strip()
        if not part:
            continue
        factors = part.split("*")
        m = _TOKEN.match(factors[0])
        if not m:
            raise ValueError("bad coefficient token %r" % factors[0])
        c = Fraction(int(m.group(1)), int(m.group(2) or 1))
        e = [0] * arity
        for tok in factors[1:]:
            tok = tok.strip()
            if "^" in tok:
                nm, k = tok.split("^")
            else:
                nm, k = tok, "1"
            if nm not in idx:
                raise ValueError("unknown variable %r" % nm)
            e[idx[nm]] += int(k)
        key = tuple(e)
        terms[key] = terms.get(key, Fraction(0)) + c
    return MPoly(arity, terms)


def upoly_to_text(p: UPoly, name: str = "x") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p[k]
        if c:
            parts.append("%s*%s^%d" % (_coeff_to_text(c), name, k))
    return " + ".join(parts)


def upoly_from_text(s: str, name: str = "x") -> UPoly:
    m = mpoly_from_text(s, [name])
    coeffs = [Fraction(0)] * (m.degree(0) + 1)
    for e, c in m.terms.items():
        coeffs[e[0]] = c
    return UPoly(coeffs)


def integer_primitive(coeffs: Iterable[Fraction]) -> tuple[list[int], Fraction]:
    """Scale rationals to coprime integers; returns (ints, multiplier used).

    The multiplier m satisfies ints[i] = m * coeffs[i] and is positive, so
    signs are preserved.
    """
    cs = [Fraction(c) for c in coeffs]
    nz = [c for c in cs if c]
    if not nz:
        return [0 for _ in cs], Fraction(1)
    denom = math.lcm(*(c.denominator for c in nz))
    ints = [c * denom for c in cs]
    g = math.gcd(*(abs(int(c)) for c in ints if c))
    m = Fraction(denom, g)
    return [int(c * m) for c in cs], m
