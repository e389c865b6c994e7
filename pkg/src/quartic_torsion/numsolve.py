"""Numerical solving of polynomial systems.

Three layers:

* a straight-line / parameter homotopy path tracker (Euler predictor,
  Newton corrector, adaptive step),
* solvers built on it: total-degree continuation for small systems and
  monodromy population for the 728-point torsion scheme,
* arbitrary-precision Newton refinement of approximate solutions.

Derivatives everywhere come from forward-mode jets so the same evaluation
code yields values and Jacobians, in two backends: numpy arrays batched
over all paths at once, and mpmath scalars for refinement.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .curves import PlaneQuartic
from .exactpoly import MPoly, det_minor_expansion
from .scheme import SchemeSolution

__all__ = [
    "MPComplex",
    "TrackerConfig",
    "ParameterSystem",
    "SolutionSet",
    "Jet",
    "track_path",
    "total_degree_solve",
    "seed_pair",
    "monodromy_solve",
    "newton_refine",
    "scheme_parameter_system",
    "mpoly_parameter_system",
    "solutions_to_text",
    "solutions_from_text",
]


# --------------------------------------------------------------------------
# jets
# --------------------------------------------------------------------------


class Jet:
    """Value plus partial derivatives with respect to k unknowns.

    ``val`` is a scalar-like (numpy array over a batch, or an mpmath
    number); ``grad`` is a list of k objects of the same kind.  Arithmetic
    is the usual dual-number rules, so any polynomial code written against
    +, -, * and / differentiates itself.
    """

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad

    @classmethod
    def constant(cls, val, k: int, zero):
        return cls(val, [zero] * k)

    @classmethod
    def variable(cls, val, index: int, k: int, zero, one):
        g = [zero] * k
        g[index] = one
        return cls(val, g)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val,
                       [a + b for a, b in zip(self.grad, other.grad)])
        return Jet(self.val + other, list(self.grad))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, [-g for g in self.grad])

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val - other.val,
                       [a - b for a, b in zip(self.grad, other.grad)])
        return Jet(self.val - other, list(self.grad))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val * other.val,
                       [a * other.val + self.val * b
                        for a, b in zip(self.grad, other.grad)])
        return Jet(self.val * other, [g * other for g in self.grad])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            inv = 1 / other.val
            v = self.val * inv
            return Jet(v, [(a - v * b) * inv
                           for a, b in zip(self.grad, other.grad)])
        inv = 1 / other
        return Jet(self.val * inv, [g * inv for g in self.grad])

    def __pow__(self, n: int):
        out = self
        for _ in range(n - 1):
            out = out * self
        return out


def _jet_vars(values: Sequence, zero, one) -> list[Jet]:
    k = len(values)
    return [Jet.variable(v, i, k, zero, one) for i, v in enumerate(values)]


# --------------------------------------------------------------------------
# small domain types
# --------------------------------------------------------------------------


@dataclass
class MPComplex:
    """A complex number carried at a stated working precision."""

    real: object
    imaginary: object
    working_digits: int = 16

    def __post_init__(self):
        if self.working_digits < 16:
            raise ValueError("working_digits must be at least 16")

    def to_mpc(self) -> mpmath.mpc:
        return mpmath.mpc(self.real, self.imaginary)

    @classmethod
    def from_mpc(cls, z, digits: int) -> "MPComplex":
        return cls(mpmath.re(z), mpmath.im(z), digits)


@dataclass
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-7
    corrector_tolerance: float = 1e-10
    max_corrector_iters: int = 3
    max_steps: int = 10000
    gamma: complex = complex(0.4195357895489862, 0.9077495978837783)

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step < 1):
            raise ValueError("need 0 < min_step <= initial_step < 1")
        if self.corrector_tolerance <= 0:
            raise ValueError("corrector_tolerance must be positive")


class ParameterSystem:
    """A square polynomial system in unknowns x, depending on parameters.

    Backed either by explicit MPoly equations (unknowns first, parameters
    after) or by a dedicated evaluator such as the torsion-scheme pipeline.
    """

    def __init__(self, *, n_unknowns: int, parameter_point: Sequence[complex],
                 equations: Optional[tuple] = None,
                 evaluator: Optional[object] = None):
        if (equations is None) == (evaluator is None):
            raise ValueError("exactly one of equations/evaluator required")
        self.n_unknowns = n_unknowns
        self.parameter_point = tuple(complex(p) for p in parameter_point)
        self.equations = tuple(equations) if equations is not None else None
        self.evaluator = evaluator
        if equations is not None:
            n_par = len(self.parameter_point)
            for eq in equations:
                if eq.arity != n_unknowns + n_par:
                    raise ValueError("equation arity != unknowns + parameters")
            if len(equations) != n_unknowns:
                raise ValueError("system must be square")
            self._partials = tuple(
                tuple(eq.partial(i) for i in range(n_unknowns))
                for eq in equations
            )

    def with_parameters(self, point: Sequence[complex]) -> "ParameterSystem":
        if self.equations is not None:
            out = ParameterSystem(
                n_unknowns=self.n_unknowns, parameter_point=point,
                equations=self.equations)
            out._partials = self._partials
            return out
        return ParameterSystem(
            n_unknowns=self.n_unknowns, parameter_point=point,
            evaluator=self.evaluator)

    # ---- batched numpy evaluation ----

    def eval_batch(self, X: np.ndarray, params: np.ndarray):
        """X: (k, N) complex; params: (p,) or (p, N).

        Returns (values (n, N), jacobian (n, k, N)).
        """
        if self.evaluator is not None:
            return self.evaluator.eval_batch(X, params)
        k, N = X.shape
        if params.ndim == 1:
            pars = [np.full(N, pv, dtype=complex) for pv in params]
        else:
            pars = [params[i] for i in range(params.shape[0])]
        point = [X[i] for i in range(k)] + pars
        vals = np.empty((len(self.equations), N), dtype=complex)
        jac = np.empty((len(self.equations), k, N), dtype=complex)
        for i, eq in enumerate(self.equations):
            vals[i] = _mpoly_eval_np(eq, point, N)
            for j in range(k):
                jac[i, j] = _mpoly_eval_np(self._partials[i][j], point, N)
        return vals, jac

    # ---- scalar mpmath evaluation ----

    def eval_scalar(self, x: Sequence, params: Sequence):
        """x, params: mpmath numbers. Returns (values list, jac k x k list)."""
        if self.evaluator is not None:
            return self.evaluator.eval_scalar(x, params)
        point = list(x) + list(params)
        vals = [eq.evaluate(point) for eq in self.equations]
        jac = [[p.evaluate(point) for p in row] for row in self._partials]
        return vals, jac

    def degrees(self) -> list[int]:
        """Total degrees in the unknowns (for Bezout counts)."""
        if self.equations is None:
            raise ValueError("degrees available only for MPoly-backed systems")
        out = []
        for eq in self.equations:
            d = 0
            for e in eq.terms:
                d = max(d, sum(e[: self.n_unknowns]))
            out.append(d)
        return out


def _mpoly_eval_np(poly: MPoly, point: list, N: int) -> np.ndarray:
    acc = np.zeros(N, dtype=complex)
    for e, c in poly.terms.items():
        term = np.full(N, complex(c), dtype=complex)
        for xi, kk in zip(point, e):
            if kk:
                term = term * xi**kk
        acc += term
    return acc


def mpoly_parameter_system(equations, n_unknowns: int,
                           parameter_point: Sequence[complex] = ()) -> ParameterSystem:
    return ParameterSystem(n_unknowns=n_unknowns,
                           parameter_point=parameter_point,
                           equations=tuple(equations))


# --------------------------------------------------------------------------
# the torsion-scheme pipeline (unknowns b1..b11, parameters a0..a14)
# --------------------------------------------------------------------------


def _padd(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        if i < len(a) and i < len(b):
            out.append(a[i] + b[i])
        elif i < len(a):
            out.append(a[i])
        else:
            out.append(b[i])
    return out


def _pmul(a, b):
    out = [None] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            t = ai * bj
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return out


def _scheme_s234(c0, c1, c2, c3, A, B):
    """s2, s3, s4 from the y-reduction, over any coefficient ring.

    Inputs are ascending x-coefficient lists (c3 a bare ring element); the
    identically-cancelling slots (x^4 of s2, x^5 of s3, forced by the
    bf = -a3/a11 normalization) are dropped structurally.
    """
    B2 = _pmul(B, B)
    s2 = _padd(c1, [c3 * t for t in _padd(A, B2)])
    s2 = _padd(s2, _pmul(c2, B))
    assert len(s2) == 5
    s2 = s2[:4]
    s3 = _padd(c0, [c3 * t for t in _pmul(A, B)])
    s3 = _padd(s3, _pmul(c2, A))
    assert len(s3) == 6
    s3 = s3[:5]
    s4 = _pmul(A, _pmul(s2, s2))
    s4 = _padd(s4, [-t for t in _pmul(B, _pmul(s2, s3))])
    s4 = _padd(s4, [-t for t in _pmul(s3, s3)])
    assert len(s4) == 10
    return s2, s3, s4


def _curve_ylists(a):
    """Ascending x-coefficient lists of f(x,y,1) by y-power (a6 = a10 = 0)."""
    c3 = a[11]
    c2 = [a[12], a[7], a[3]]
    c1 = [a[13], a[8], a[4], a[1]]
    c0 = [a[14], a[9], a[5], a[2], a[0]]
    return c0, c1, c2, c3


class _SchemeEvaluator:
    """Evaluate the eleven torsion-scheme equations and their b-Jacobian.

    One generic code path over jets.  The curve enters through its fifteen
    coefficients; the reduction y^2 := s1 is pre-expanded, with the two
    coefficient slots that cancel identically (x^4 of s2, x^5 of s3)
    dropped structurally rather than computed and subtracted.
    """

    n_unknowns = 11

    def _equations(self, b: list, a: list, zero, one):
        # b: 11 jets; a: 15 plain scalars (batched arrays or mpmath numbers)
        bf = -(a[3] / a[11])
        c0, c1, c2, c3 = _curve_ylists(a)
        A = [b[1], b[3], b[2], b[0]]    # b2 + b4 x + b3 x^2 + b1 x^3
        B = [b[5], b[4], Jet.constant(bf, 11, zero)]   # b6 + b5 x + bf x^2
        c3j = Jet.constant(c3, 11, zero)
        c2j = [Jet.constant(t, 11, zero) for t in c2]
        c1j = [Jet.constant(t, 11, zero) for t in c1]
        c0j = [Jet.constant(t, 11, zero) for t in c0]

        s2, s3, s4 = _scheme_s234(c0j, c1j, c2j, c3j, A, B)

        g = [b[9], b[8], b[7], Jet.constant(one, 11, zero)]
        cube = _pmul(g, _pmul(g, g))
        eqs = [s4[i] - b[6] * cube[i] for i in range(10)]

        det = self._sylvester_det(s2, s3, zero, one)
        eqs.append(b[10] * det + one)
        return eqs

    def _sylvester_det(self, s2, s3, zero, one):
        raise NotImplementedError

    def _sylvester_rows(self, s2, s3, zero):
        zj = Jet(zero, [zero] * 11)
        s2d = list(reversed(s2))
        s3d = list(reversed(s3))
        rows = []
        for i in range(4):
            rows.append([zj] * i + s2d + [zj] * (3 - i))
        for i in range(3):
            rows.append([zj] * i + s3d + [zj] * (2 - i))
        return rows


class _SchemeEvaluatorBatch(_SchemeEvaluator):
    """numpy backend: values are (N,) complex arrays."""

    def eval_batch(self, X: np.ndarray, params: np.ndarray):
        k, N = X.shape
        zero = np.zeros(N, dtype=complex)
        one = np.ones(N, dtype=complex)
        b = _jet_vars([X[i] for i in range(k)], zero, one)
        if params.ndim == 1:
            a = [np.full(N, pv, dtype=complex) for pv in params]
        else:
            a = [params[i] for i in range(params.shape[0])]
        eqs = self._equations(b, a, zero, one)
        vals = np.stack([e.val for e in eqs])
        jac = np.stack([np.stack(e.grad) for e in eqs])
        return vals, jac

    def _sylvester_det(self, s2, s3, zero, one):
        rows = self._sylvester_rows(s2, s3, zero)
        N = zero.shape[0]
        M = np.empty((N, 7, 7), dtype=complex)
        for i in range(7):
            for j in range(7):
                M[:, i, j] = rows[i][j].val
        det = np.linalg.det(M)
        Minv = np.linalg.inv(M)
        grad = []
        for g in range(11):
            dM = np.empty((N, 7, 7), dtype=complex)
            for i in range(7):
                for j in range(7):
                    dM[:, i, j] = rows[i][j].grad[g]
            # d det = det * tr(M^-1 dM)
            grad.append(det * np.einsum("nij,nji->n", Minv, dM))
        return Jet(det, grad)


class _SchemeEvaluatorScalar(_SchemeEvaluator):
    """mpmath backend: values are mpc scalars (used by newton_refine)."""

    def eval_scalar(self, x: Sequence, params: Sequence):
        zero = mpmath.mpc(0)
        one = mpmath.mpc(1)
        b = _jet_vars([mpmath.mpc(v) for v in x], zero, one)
        a = [mpmath.mpc(p) for p in params]
        eqs = self._equations(b, a, zero, one)
        vals = [e.val for e in eqs]
        jac = [[e.grad[j] for j in range(11)] for e in eqs]
        return vals, jac

    def _sylvester_det(self, s2, s3, zero, one):
        rows = self._sylvester_rows(s2, s3, zero)
        zj = Jet(zero, [zero] * 11)
        return det_minor_expansion(
            rows, zero=zj, is_zero=lambda t: t.val == 0 and all(g == 0 for g in t.grad)
        )


class _SchemeSystemEvaluator:
    """Dispatching evaluator: numpy batches and mpmath scalars."""

    n_unknowns = 11

    def __init__(self):
        self._batch = _SchemeEvaluatorBatch()
        self._scalar = _SchemeEvaluatorScalar()

    def eval_batch(self, X, params):
        return self._batch.eval_batch(X, params)

    def eval_scalar(self, x, params):
        return self._scalar.eval_scalar(x, params)


def scheme_parameter_system(curve_or_coeffs) -> ParameterSystem:
    """The 11-equation torsion system with the curve coefficients as parameters.

    Accepts a PlaneQuartic (normalized) or a plain 15-vector of complex
    coefficients with a6 = a10 = 0.
    """
    if isinstance(curve_or_coeffs, PlaneQuartic):
        if not curve_or_coeffs.is_normalized:
            raise ValueError("curve must be normalized")
        point = [complex(v) for v in curve_or_coeffs.a]
    else:
        point = [complex(v) for v in curve_or_coeffs]
        if len(point) != 15:
            raise ValueError("need 15 curve coefficients")
    if point[6] != 0 or point[10] != 0:
        raise ValueError("parameter point must satisfy a6 = a10 = 0")
    if point[11] == 0:
        raise ValueError("a11 must be nonzero")
    return ParameterSystem(
        n_unknowns=11, parameter_point=point,
        evaluator=_SchemeSystemEvaluator())


# --------------------------------------------------------------------------
# solution sets
# --------------------------------------------------------------------------


@dataclass
class SolutionSet:
    solutions: list = field(default_factory=list)
    dedup_tolerance: float = 1e-8
    seed: int = 0

    def _close(self, u: Sequence, v: Sequence) -> bool:
        scale = max(1.0, max(abs(complex(t)) for t in u))
        return all(abs(complex(a) - complex(b)) <= self.dedup_tolerance * scale
                   for a, b in zip(u, v))

    def add(self, vec: Sequence[complex], residual: float,
            digits: int = 16) -> bool:
        vec = tuple(complex(v) for v in vec)
        for s in self.solutions:
            if self._close(vec, s.beta):
                return False
        self.solutions.append(SchemeSolution(
            beta=vec, residual=float(residual), precision_digits=digits))
        return True

    def canonical_sort(self):
        self.solutions.sort(
            key=lambda s: tuple((z.real, z.imag) for z in map(complex, s.beta)))

    def conjugate_closure(self, check: Callable[[Sequence[complex]], float],
                          tolerance: float):
        """Add the conjugate of every solution whose conjugate also solves."""
        for s in list(self.solutions):
            conj = tuple(complex(z).conjugate() for z in s.beta)
            r = check(conj)
            if r < tolerance:
                self.add(conj, r, s.precision_digits)
        self.canonical_sort()

    def __len__(self):
        return len(self.solutions)


# --------------------------------------------------------------------------
# homotopy evaluation
# --------------------------------------------------------------------------


class _Homotopy:
    """H(x, t) between two systems.

    If both systems share their equations (same object), the parameter
    point is interpolated: H(x,t) = E(x; (1-t) p0 + t p1).  Otherwise the
    convex gamma-twisted combination (1-t) gamma S(x) + t T(x) is used.
    """

    def __init__(self, sys_start: ParameterSystem, sys_target: ParameterSystem,
                 gamma: complex):
        self.start = sys_start
        self.target = sys_target
        self.gamma = complex(gamma)
        self.parametric = (
            sys_start.evaluator is not None
            and sys_start.evaluator is sys_target.evaluator
        ) or (
            sys_start.equations is not None
            and sys_start.equations == sys_target.equations
        )
        self.p0 = np.array(sys_start.parameter_point, dtype=complex)
        self.p1 = np.array(sys_target.parameter_point, dtype=complex)

    def eval(self, X: np.ndarray, t):
        """t is a scalar or a per-column vector of shape (N,)."""
        if self.parametric:
            tv = np.asarray(t, dtype=float)
            if tv.ndim == 0:
                pt = self.p0 + float(tv) * (self.p1 - self.p0)
            else:
                pt = self.p0[:, None] + tv[None, :] * (self.p1 - self.p0)[:, None]
            return self.start.eval_batch(X, pt)
        v0, j0 = self.start.eval_batch(X, self.p0)
        v1, j1 = self.target.eval_batch(X, self.p1)
        g, tv = self.gamma, np.asarray(t)
        return ((1 - tv) * g * v0 + tv * v1, (1 - tv) * g * j0 + tv * j1)

    def dt(self, X: np.ndarray, t, h: float = 1e-6, v_at_t=None):
        """dH/dt by finite difference (clamped near the ends).

        With v_at_t (the already-computed H(X, t)) a one-sided difference
        reuses it and saves an evaluation; otherwise central differences.
        """
        tv = np.asarray(t, dtype=float)
        if v_at_t is not None:
            hi = np.where(tv + h <= 1.0, tv + h, tv - h)
            vhi, _ = self.eval(X, hi)
            return (vhi - v_at_t) / (hi - tv)
        lo = np.clip(tv - h, 0.0, 1.0)
        hi = np.clip(tv + h, 0.0, 1.0)
        vlo, _ = self.eval(X, lo)
        vhi, _ = self.eval(X, hi)
        return (vhi - vlo) / (hi - lo)


def _solve_stacked(J: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Solve the stacked systems J[i] x = F[i]; NaN rows where singular."""
    try:
        return np.linalg.solve(J, F[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full_like(F, np.nan)
        for i in range(J.shape[0]):
            try:
                out[i] = np.linalg.solve(J[i], F[i])
            except np.linalg.LinAlgError:
                pass
        return out


def _newton_correct(hom: _Homotopy, X: np.ndarray, t,
                    cfg: TrackerConfig):
    """A few Newton steps at fixed t. Returns (X, converged mask)."""
    for _ in range(cfg.max_corrector_iters):
        vals, jac = hom.eval(X, t)
        with np.errstate(invalid="ignore"):
            res = np.nan_to_num(np.max(np.abs(vals), axis=0), nan=np.inf)
        ok = res < cfg.corrector_tolerance
        if ok.all():
            return X, ok
        J = np.moveaxis(jac, 2, 0)          # (N, n, k)
        F = np.moveaxis(vals, 1, 0)         # (N, n)
        dX = _solve_stacked(J, F)           # (N, k)
        X = X - dX.T
    vals, _ = hom.eval(X, t)
    with np.errstate(invalid="ignore"):
        res = np.nan_to_num(np.max(np.abs(vals), axis=0), nan=np.inf)
    return X, res < cfg.corrector_tolerance


def _track_adaptive(hom: _Homotopy, X: np.ndarray, cfg: TrackerConfig,
                    t0: float = 0.0):
    """Adaptive predictor-corrector on one (k, 1) column from t0 to 1.

    Returns the endpoint column, or None on path failure (divergence or
    step underflow).
    """
    t = t0
    step = cfg.initial_step
    successes = 0
    for _ in range(cfg.max_steps):
        if t >= 1.0:
            break
        dt = min(step, 1.0 - t)
        # Euler predictor on the Davidenko ODE: J dx/dt = -dH/dt
        vals, jac = hom.eval(X, t)
        J = np.moveaxis(jac, 2, 0)
        Ht = np.moveaxis(hom.dt(X, t, v_at_t=vals), 1, 0)
        try:
            dX = np.linalg.solve(J, -Ht[..., None])[..., 0]
        except np.linalg.LinAlgError:
            return None
        Xp = X + dX.T * dt
        Xc, ok = _newton_correct(hom, Xp, t + dt, cfg)
        if ok.all() and np.max(np.abs(Xc)) < 1e8:
            X, t = Xc, t + dt
            successes += 1
            if successes >= 4:
                step = min(step * 2, cfg.initial_step * 8)
                successes = 0
        else:
            successes = 0
            step /= 2
            if step < cfg.min_step:
                return None
        if np.max(np.abs(X)) > 1e8:
            return None
    else:
        return None
    return X


def track_path(sys_start: ParameterSystem, sys_target: ParameterSystem,
               start: Sequence[complex],
               cfg: Optional[TrackerConfig] = None):
    """Track one solution of sys_start to a solution of sys_target.

    Returns the endpoint vector, or None on path failure (divergence or
    step underflow).
    """
    cfg = cfg or TrackerConfig()
    hom = _Homotopy(sys_start, sys_target, cfg.gamma)
    X = np.array([[complex(v)] for v in start], dtype=complex)

    vals, _ = hom.eval(X, 0.0)
    if np.max(np.abs(vals)) > cfg.corrector_tolerance * 10:
        X, ok = _newton_correct(hom, X, 0.0, cfg)
        if not ok.all():
            raise ValueError("start vector does not solve the start system")

    out = _track_adaptive(hom, X, cfg)
    return None if out is None else tuple(out[:, 0])


def _track_batch(hom: _Homotopy, X: np.ndarray, cfg: TrackerConfig):
    """Adaptive tracking of many paths at once.

    Live paths advance together in shared predictor/corrector sweeps, but
    each carries its own t and step size: a corrector failure halves only
    that path's step, four clean moves in a row double it again.  A path
    dies when its step underflows min_step or its points blow past 1e8.
    Returns (X_end, ok mask).
    """
    k, N = X.shape
    Xc = np.array(X, dtype=complex)
    t = np.zeros(N)
    step = np.full(N, cfg.initial_step)
    streak = np.zeros(N, dtype=np.int64)
    dead = np.zeros(N, dtype=bool)
    cap = cfg.initial_step * 8
    for _ in range(cfg.max_steps):
        act = np.nonzero(~dead & (t < 1.0))[0]
        if act.size == 0:
            break
        sub = Xc[:, act]
        ta = t[act]
        dt = np.minimum(step[act], 1.0 - ta)
        tn = np.where(step[act] >= 1.0 - ta, 1.0, ta + dt)
        vals, jac = hom.eval(sub, ta)
        J = np.moveaxis(jac, 2, 0)
        Ht = np.moveaxis(hom.dt(sub, ta, v_at_t=vals), 1, 0)
        dX = _solve_stacked(J, -Ht)
        pred = sub + dX.T * dt
        corr, ok = _newton_correct(hom, pred, tn, cfg)
        with np.errstate(invalid="ignore"):
            bounded = np.nan_to_num(np.max(np.abs(corr), axis=0),
                                    nan=np.inf) <= 1e8
        ok = ok & bounded
        good = act[ok]
        Xc[:, good] = corr[:, ok]
        t[good] = tn[ok]
        streak[good] += 1
        grow = good[streak[good] >= 4]
        step[grow] = np.minimum(step[grow] * 2.0, cap)
        streak[grow] = 0
        bad = act[~ok]
        step[bad] *= 0.5
        streak[bad] = 0
        dead[bad] |= step[bad] < cfg.min_step
    return Xc, ~dead & (t >= 1.0)


# --------------------------------------------------------------------------
# total-degree continuation
# --------------------------------------------------------------------------

_BEZOUT_GUARD = 10**5


def total_degree_solve(system: ParameterSystem,
                       cfg: Optional[TrackerConfig] = None,
                       threads: int = 1,
                       rng_seed: int = 0,
                       retry_failed: bool = True) -> SolutionSet:
    """Solve a small square system by total-degree continuation.

    The start system is gamma-twisted prod(x_i^{d_i} - 1); every Bezout
    path is tracked and finite endpoints are collected.  Successes plus
    failures always account for the full Bezout number.  retry_failed
    re-runs lost paths one at a time before giving up on them.
    """
    cfg = cfg or TrackerConfig()
    degs = system.degrees()
    bez = 1
    for d in degs:
        bez *= max(d, 1)
    if bez > _BEZOUT_GUARD:
        raise ValueError(
            "Bezout number %d exceeds the guard (%d); use monodromy_solve"
            % (bez, _BEZOUT_GUARD))

    k = system.n_unknowns
    n_par = len(system.parameter_point)

    # track against coefficient-normalized equations so the corrector
    # tolerance is meaningful regardless of the input's scale
    scaled = []
    for eq in system.equations:
        m = max(abs(complex(c)) for c in eq.terms.values()) or 1.0
        scaled.append(eq.map_coefficients(lambda c, m=m: complex(c) / m))
    target = ParameterSystem(n_unknowns=k,
                             parameter_point=system.parameter_point,
                             equations=tuple(scaled))
    start_eqs = []
    for i, d in enumerate(degs):
        e = MPoly(k + n_par)
        mono = [0] * (k + n_par)
        mono[i] = max(d, 1)
        e = e + MPoly(k + n_par, {tuple(mono): Fraction(1)})
        e = e + MPoly.constant(k + n_par, Fraction(-1))
        start_eqs.append(e)
    sys_start = ParameterSystem(
        n_unknowns=k, parameter_point=system.parameter_point,
        equations=tuple(start_eqs))

    # start solutions: products of roots of unity
    radii = [np.exp(2j * np.pi * np.arange(max(d, 1)) / max(d, 1)) for d in degs]
    starts = np.empty((k, bez), dtype=complex)
    rep = 1
    for i, r in enumerate(radii):
        reps_after = bez // (rep * len(r))
        starts[i] = np.tile(np.repeat(r, reps_after), rep)
        rep *= len(r)

    hom = _Homotopy(sys_start, target, cfg.gamma)
    Xe, ok = _track_batch(hom, starts, cfg)
    if retry_failed:
        # a solo rerun takes a slightly different corrector trajectory
        # than the shared batch and occasionally rescues a lost path
        for i in np.nonzero(~ok)[0]:
            out = _track_adaptive(hom, starts[:, i:i + 1].copy(), cfg)
            if out is not None:
                Xe[:, i] = out[:, 0]
                ok[i] = True

    out = SolutionSet(dedup_tolerance=1e-8, seed=rng_seed)

    def _residual(vec) -> float:
        arr = np.array([[complex(v)] for v in vec], dtype=complex)
        vals, _ = target.eval_batch(arr, np.array(system.parameter_point))
        return float(np.max(np.abs(vals)))

    finite = 0
    for j in np.nonzero(ok)[0]:
        vec = tuple(Xe[:, j])
        if max(abs(v) for v in vec) > 1e8:
            continue
        finite += 1
        out.add(vec, _residual(vec))
    out.path_successes = finite
    out.path_failures = int(bez - finite)
    out.conjugate_closure(_residual, cfg.corrector_tolerance * 100)
    out.canonical_sort()
    return out


# --------------------------------------------------------------------------
# seed pairs for the torsion scheme
# --------------------------------------------------------------------------


class _DegenerateSeedDraw(Exception):
    """Raised when a random seed draw is degenerate; caller retries."""


_QUARTIC_EXPS = [(4, 0), (3, 1), (3, 0), (2, 2), (2, 1), (2, 0), (1, 3),
                 (1, 2), (1, 1), (1, 0), (0, 4), (0, 3), (0, 2), (0, 1),
                 (0, 0)]


def _contact_rows(x0, y0, b, bf):
    """Three linear conditions on the 15 quartic coefficients: f, f', f''
    of x -> f(x, y(x)) vanish at x0, where y(x) is the local branch of the
    cubic -y^2 + A + B y through (x0, y0)."""
    b1, b2, b3, b4, b5, b6 = b
    Ax = b4 + 2 * b3 * x0 + 3 * b1 * x0**2
    Bx = b5 + 2 * bf * x0
    Axx = 2 * b3 + 6 * b1 * x0
    Bxx = 2 * bf
    hy = 2 * y0 - (b6 + b5 * x0 + bf * x0**2)
    if abs(hy) < 1e-6:
        raise _DegenerateSeedDraw("branch point (vertical tangent)")
    yp = (Ax + Bx * y0) / hy
    ypp = (Axx + Bxx * y0 + 2 * Bx * yp - 2 * yp * yp) / hy
    r0, r1, r2 = [], [], []
    for (i, j) in _QUARTIC_EXPS:
        m = x0**i * y0**j
        mx = i * x0 ** (i - 1) * y0**j if i else 0.0
        my = j * x0**i * y0 ** (j - 1) if j else 0.0
        mxx = i * (i - 1) * x0 ** (i - 2) * y0**j if i > 1 else 0.0
        mxy = i * j * x0 ** (i - 1) * y0 ** (j - 1) if i and j else 0.0
        myy = j * (j - 1) * x0**i * y0 ** (j - 2) if j > 1 else 0.0
        r0.append(m)
        r1.append(mx + my * yp)
        r2.append(mxx + 2 * mxy * yp + myy * yp * yp + my * ypp)
    return [r0, r1, r2]


def _deflate_linear(coeffs, root):
    """Divide an ascending coefficient list by (x - root); remainder dropped.

    Works over any ring whose elements support + and scaling by the complex
    number `root` (used with MPoly coefficients during seed construction).
    """
    n = len(coeffs) - 1
    out = [None] * n
    acc = coeffs[n]
    for k in range(n - 1, -1, -1):
        out[k] = acc
        acc = coeffs[k] + acc.scale(root) if hasattr(acc, "scale") \
            else coeffs[k] + acc * root
    return out


def _beta_from_data(a_vec, b, bf, g_roots):
    """Complete the eleven-coordinate solution vector for the seed curve."""
    r1, r2, w = g_roots
    b8 = -(r1 + r2 + w)
    b9 = r1 * r2 + r1 * w + r2 * w
    b10 = -r1 * r2 * w
    c0, c1, c2, c3 = _curve_ylists([complex(v) for v in a_vec])
    A = [b[1], b[3], b[2], b[0]]
    B = [b[5], b[4], bf]
    s2, s3, s4 = _scheme_s234(c0, c1, c2, c3, A, B)
    b7 = s4[9]
    syl = np.zeros((7, 7), dtype=complex)
    s2d = list(reversed(s2))
    s3d = list(reversed(s3))
    for i in range(4):
        syl[i, i:i + 4] = s2d
    for i in range(3):
        syl[4 + i, i:i + 5] = s3d
    det = np.linalg.det(syl)
    if abs(det) < 1e-10 or abs(b7) < 1e-10:
        raise _DegenerateSeedDraw("resultant or leading coefficient vanished")
    return np.array([b[0], b[1], b[2], b[3], b[4], b[5],
                     b7, b8, b9, b10, -1.0 / det], dtype=complex)


def _seed_attempt(rng):
    """One random draw of the seed construction.

    Draw a random cubic -y^2 + A(x) + B(x) y and two random points on it;
    quartics with triple contact there plus the normalization a6 = a10 = 0,
    a3 + bf a11 = 0 form (modulo the degenerate cubic-times-line family) a
    net of dimension 3.  A member having a third triple contact is found
    by forcing the deflated intersection cubic to be a perfect cube - two
    polynomial conditions in the two chart coordinates of the net, solved
    by total-degree continuation.
    """
    b = tuple(rng.standard_normal(6) + 1j * rng.standard_normal(6))
    bf = complex(rng.standard_normal() + 1j * rng.standard_normal())
    b1, b2, b3, b4, b5, b6 = b

    # two prescribed contact points on random branches
    pts = []
    for _ in range(2):
        x0 = complex(rng.standard_normal() + 1j * rng.standard_normal())
        Aval = b2 + b4 * x0 + b3 * x0**2 + b1 * x0**3
        Bval = b6 + b5 * x0 + bf * x0**2
        sign = 1 if rng.integers(2) else -1
        y0 = (Bval + sign * np.sqrt(complex(Bval * Bval + 4 * Aval))) / 2
        pts.append((x0, y0))
    (r1, y1), (r2, y2) = pts
    if abs(r1 - r2) < 1e-3:
        raise _DegenerateSeedDraw("contact points collide")

    rows = _contact_rows(r1, y1, b, bf) + _contact_rows(r2, y2, b, bf)
    for fixed in (6, 10):
        r = [0.0] * 15
        r[fixed] = 1.0
        rows.append(r)
    r = [0.0] * 15
    r[3] = 1.0
    r[11] = bf
    rows.append(r)

    M = np.array(rows, dtype=complex)
    _, sv, Vh = np.linalg.svd(M)
    if sv[-1] < 1e-6 * sv[0]:
        raise _DegenerateSeedDraw("contact conditions rank-deficient")
    kern = Vh[9:].conj()                   # 6-dimensional kernel

    # quotient out the cubic-times-line quartics h*x, h*y, h*1
    degs = []
    for which in range(3):
        coeffs = {}
        hmons = {(0, 2): -1.0, (3, 0): b1, (2, 0): b3, (1, 0): b4,
                 (0, 0): b2, (2, 1): bf, (1, 1): b5, (0, 1): b6}
        for (i, j), c in hmons.items():
            if which == 0:
                i += 1
            elif which == 1:
                j += 1
            coeffs[(i, j)] = coeffs.get((i, j), 0.0) + c
        degs.append([coeffs.get(e, 0.0) for e in _QUARTIC_EXPS])
    D = np.array(degs, dtype=complex)
    Q, _ = np.linalg.qr(D.T)               # orthonormal degenerate basis
    proj = kern - (kern @ Q.conj()) @ Q.T
    _, psv, pVh = np.linalg.svd(proj)
    if psv[2] < 1e-8 * psv[0]:
        raise _DegenerateSeedDraw("no honest contact quartics in the kernel")
    F = pVh[:3]                            # rows span kernel mod degenerates

    # s4 over the net F1 + l2 F2 + l3 F3: x-coefficients are MPoly in (l2,l3)
    lam = [MPoly.constant(2, 1), MPoly.variable(2, 0), MPoly.variable(2, 1)]
    s2_parts, s3_parts = [], []
    for k in range(3):
        c0, c1, c2, c3 = _curve_ylists([complex(v) for v in F[k]])
        A = [b2, b4, b3, b1]
        B = [b6, b5, bf]
        s2k, s3k, _ = _scheme_s234(c0, c1, c2, c3, A, B)
        s2_parts.append(s2k)
        s3_parts.append(s3k)
    s2l = [sum((lam[k].scale(s2_parts[k][i]) for k in range(3)),
               MPoly.zero(2)) for i in range(4)]
    s3l = [sum((lam[k].scale(s3_parts[k][i]) for k in range(3)),
               MPoly.zero(2)) for i in range(5)]
    Am = [MPoly.constant(2, v) for v in (b2, b4, b3, b1)]
    Bm = [MPoly.constant(2, v) for v in (b6, b5, bf)]
    s4l = _pmul(Am, _pmul(s2l, s2l))
    s4l = _padd(s4l, [-t for t in _pmul(Bm, _pmul(s2l, s3l))])
    s4l = _padd(s4l, [-t for t in _pmul(s3l, s3l)])

    # deflate the two known triple roots
    q = s4l
    for root in (r1, r1, r1, r2, r2, r2):
        q = _deflate_linear(q, root)
    c0q, c1q, c2q, c3q = q                 # cubic in x, coefficients in (l2,l3)

    # perfect-cube conditions on the residual cubic
    three = MPoly.constant(2, 3)
    e1 = three * c1q * c3q - c2q * c2q
    e2 = MPoly.constant(2, 27) * c0q * c3q * c3q - c2q * c2q * c2q
    lam_sys = mpoly_parameter_system([e1, e2], 2, [])
    cfg = TrackerConfig(corrector_tolerance=1e-12, max_steps=400)
    lam_sols = total_degree_solve(lam_sys, cfg)

    for s in lam_sols.solutions:
        l2, l3 = (complex(v) for v in s.beta)
        c3v = complex(c3q.evaluate([l2, l3]))
        c2v = complex(c2q.evaluate([l2, l3]))
        if abs(c3v) < 1e-8:
            continue
        w = -c2v / (3 * c3v)
        if min(abs(w - r1), abs(w - r2)) < 1e-6:
            continue
        a_vec = F[0] + l2 * F[1] + l3 * F[2]
        if abs(a_vec[11]) < 1e-10:
            continue
        a_vec = a_vec / a_vec[11] * (-1.0)
        a_vec[6] = 0.0
        a_vec[10] = 0.0
        try:
            beta = _beta_from_data(a_vec, b, bf, (r1, r2, w))
        except _DegenerateSeedDraw:
            continue
        system = scheme_parameter_system(a_vec)
        params = np.array(system.parameter_point)
        hom = _Homotopy(system, system, 1.0)
        Xc, ok = _newton_correct(hom, beta[:, None], 0.0,
                                 TrackerConfig(corrector_tolerance=1e-13,
                                               max_corrector_iters=6))
        if not ok.all():
            continue
        vals, _ = system.eval_batch(Xc, params)
        if float(np.max(np.abs(vals))) < 1e-12:
            return system, tuple(Xc[:, 0])
    raise _DegenerateSeedDraw("no perfect-cube member produced a valid seed")


def seed_pair(curve: PlaneQuartic, rng_seed: int = 0, max_tries: int = 20):
    """A verified (system, solution) start pair for monodromy.

    The parameter point is a random complex curve in the normalized family
    (not the input curve - that is monodromy's target); the solution is an
    eleven-coordinate vector satisfying the scheme equations to 1e-12.
    Degenerate random draws are retried up to max_tries.
    """
    if not curve.is_normalized:
        raise ValueError("curve must be normalized")
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_tries):
        try:
            return _seed_attempt(rng)
        except _DegenerateSeedDraw:
            continue
    raise ValueError("seed_pair: no valid seed in %d attempts" % max_tries)


# --------------------------------------------------------------------------
# monodromy
# --------------------------------------------------------------------------


def _random_parameter_point(P: ParameterSystem, rng,
                            scale: float = 1.0) -> np.ndarray:
    """A random parameter vector compatible with the system's family.

    For the torsion scheme the point stays inside the normalized family
    (a6 = a10 = 0, a11 away from zero); generic systems get an
    unconstrained complex vector.
    """
    n = len(P.parameter_point)
    p = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * scale
    if isinstance(P.evaluator, _SchemeSystemEvaluator):
        p[6] = 0.0
        p[10] = 0.0
        if abs(p[11]) < 0.3:
            p[11] += 1.0
    return p


def monodromy_solve(P: ParameterSystem, seed_data, target_params,
                    cfg: Optional[TrackerConfig] = None,
                    target_count: int = 728,
                    required_count: int = 243,
                    stall_batches: int = 200,
                    rng_seed: int = 0,
                    threads: int = 1) -> SolutionSet:
    """Populate the solution set by random monodromy loops, then carry every
    solution to target_params by one parameter homotopy.

    A loop is a random triangle in parameter space.  New endpoints enrich
    the set; the loop budget stalls out after `stall_batches` consecutive
    batches without growth.  Below `required_count` solutions the shortfall
    is an error; between required and target a warning is recorded.
    """
    cfg = cfg or TrackerConfig()
    params0, start = seed_data
    params0 = np.array(params0, dtype=complex)
    rng = np.random.default_rng(rng_seed)

    base = P.with_parameters(params0)

    def _residual_at(vec, params) -> float:
        arr = np.array([[complex(v)] for v in vec], dtype=complex)
        vals, _ = base.with_parameters(params).eval_batch(arr, np.array(params))
        return float(np.max(np.abs(vals)))

    sols = SolutionSet(dedup_tolerance=1e-8, seed=rng_seed)
    r0 = _residual_at(start, params0)
    if r0 > cfg.corrector_tolerance * 100:
        raise ValueError("seed does not solve the system at its parameters")
    sols.add(start, r0)

    stall = 0
    while len(sols) < target_count and stall < stall_batches:
        q1 = _random_parameter_point(base, rng)
        q2 = _random_parameter_point(base, rng)
        X = np.array([list(map(complex, s.beta)) for s in sols.solutions],
                     dtype=complex).T
        legs = [(params0, q1), (q1, q2), (q2, params0)]
        for pa, pb in legs:
            if X.shape[1] == 0:
                break
            hom = _Homotopy(base.with_parameters(pa),
                            base.with_parameters(pb), cfg.gamma)
            # paths lost in a random loop are cheap; just drop them
            X, leg_ok = _track_batch(hom, X, cfg)
            X = X[:, leg_ok]
        new = 0
        if X.shape[1]:
            vals, _ = base.eval_batch(X, params0)
            res = np.max(np.abs(vals), axis=0)
            for j in range(X.shape[1]):
                if res[j] < cfg.corrector_tolerance * 100 and \
                        sols.add(tuple(X[:, j]), float(res[j])):
                    new += 1
        stall = 0 if new else stall + 1

    if len(sols) < required_count:
        raise ValueError(
            "monodromy stalled at %d solutions (< required %d)"
            % (len(sols), required_count))
    if len(sols) < target_count:
        warnings.warn(
            "monodromy accepted %d of %d solutions after stalling"
            % (len(sols), target_count))

    # parameter homotopy of the whole set to the target parameters
    target_params = np.array(target_params, dtype=complex)
    hom = _Homotopy(base.with_parameters(params0),
                    base.with_parameters(target_params), cfg.gamma)
    X = np.array([list(map(complex, s.beta)) for s in sols.solutions],
                 dtype=complex).T
    Xe, ok = _track_batch(hom, X, cfg)

    out = SolutionSet(dedup_tolerance=1e-8, seed=rng_seed)
    keep = np.nonzero(ok)[0]
    if keep.size:
        sub = Xe[:, keep]
        vals, _ = base.eval_batch(sub, target_params)
        res = np.max(np.abs(vals), axis=0)
        for i in range(keep.size):
            if res[i] < cfg.corrector_tolerance * 100:
                out.add(tuple(sub[:, i]), float(res[i]))
    out.conjugate_closure(lambda v: _residual_at(v, target_params),
                          cfg.corrector_tolerance * 100)
    out.canonical_sort()
    return out


# --------------------------------------------------------------------------
# refinement
# --------------------------------------------------------------------------


def newton_refine(system: ParameterSystem, sol: Sequence[complex],
                  target_digits: int,
                  residual_history: Optional[list] = None) -> list[MPComplex]:
    """Refine an approximate solution to target_digits working digits.

    Classical Newton with the working precision doubled each iteration
    (16 -> 32 -> 64 -> ...), so convergence stays quadratic all the way.
    An input already at the target residual is returned unchanged; a
    numerically singular Jacobian or 100 iterations without convergence
    raise.  If residual_history is a list, the successive residual maxima
    are appended to it.
    """
    if target_digits < 16:
        raise ValueError("target_digits must be at least 16")
    digits = 16
    x = [mpmath.mpc(v) for v in sol]
    params = [mpmath.mpc(p) for p in system.parameter_point]
    goal = mpmath.mpf(10) ** (-(target_digits - 5))

    with mpmath.workdps(target_digits + 10):
        vals, _ = system.eval_scalar(x, params)
        r = max(abs(v) for v in vals)
        if residual_history is not None:
            residual_history.append(r)
        if r > mpmath.mpf("1e-8"):
            raise ValueError("solution outside the Newton basin (residual %s)"
                             % mpmath.nstr(r, 5))
        if r < goal:
            return [MPComplex.from_mpc(z, target_digits) for z in x]

    for _ in range(100):
        digits = min(digits * 2, target_digits + 10)
        with mpmath.workdps(digits + 10):
            vals, jac = system.eval_scalar(x, params)
            J = mpmath.matrix(jac)
            F = mpmath.matrix(vals)
            try:
                dx = mpmath.lu_solve(J, -F)
            except ZeroDivisionError:
                raise ValueError("Jacobian numerically singular") from None
            x = [x[i] + dx[i] for i in range(len(x))]
            vals, _ = system.eval_scalar(x, params)
            r = max(abs(v) for v in vals)
            if residual_history is not None:
                residual_history.append(r)
            if r < goal:
                return [MPComplex.from_mpc(z, target_digits) for z in x]
    raise ValueError("newton_refine did not converge in 100 iterations")


# --------------------------------------------------------------------------
# solution file format
# --------------------------------------------------------------------------


def solutions_to_text(S: SolutionSet, digits: int = 16) -> str:
    lines = ["digits: %d" % digits, "count: %d" % len(S.solutions),
             "seed: %d" % S.seed]
    for s in S.solutions:
        parts = []
        for z in s.beta:
            z = complex(z)
            parts.append(repr(z.real))
            parts.append(repr(z.imag))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def solutions_from_text(text: str) -> SolutionSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if (not lines[0].startswith("digits:")
            or not lines[1].startswith("count:")
            or not lines[2].startswith("seed:")):
        raise ValueError("malformed solution file header")
    digits = int(lines[0].split(":")[1])
    count = int(lines[1].split(":")[1])
    seed = int(lines[2].split(":")[1])
    out = SolutionSet(seed=seed)
    for ln in lines[3:3 + count]:
        toks = ln.split()
        if len(toks) % 2:
            raise ValueError("odd number of coordinates in solution line")
        vec = [complex(float(toks[2 * i]), float(toks[2 * i + 1]))
               for i in range(len(toks) // 2)]
        out.solutions.append(SchemeSolution(
            beta=tuple(vec), residual=0.0, precision_digits=digits))
    if len(out.solutions) != count:
        raise ValueError("solution count mismatch")
    return out
