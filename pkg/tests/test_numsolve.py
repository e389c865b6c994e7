import os
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quartic_torsion.curves import PlaneQuartic
from quartic_torsion.exactpoly import MPoly
from quartic_torsion.numsolve import (
    MPComplex,
    ParameterSystem,
    SolutionSet,
    TrackerConfig,
    monodromy_solve,
    newton_refine,
    scheme_parameter_system,
    seed_pair,
    solutions_from_text,
    solutions_to_text,
    total_degree_solve,
    track_path,
)
from quartic_torsion.scheme import derive_scheme

FERMAT_NORMALIZED = PlaneQuartic(
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 0, -4, 0)
)


def _upoly1(coeffs):
    """Univariate helper: coeffs ascending -> MPoly in one variable."""
    return MPoly(1, {(k,): Fraction(c) for k, c in enumerate(coeffs) if c})


def _system1(coeffs):
    return ParameterSystem(n_unknowns=1, equations=[_upoly1(coeffs)],
                           parameter_point=())


X2_MINUS_1 = _system1([-1, 0, 1])
X2_MINUS_4 = _system1([-4, 0, 1])
X2_PLUS_1 = _system1([1, 0, 1])


# --------------------------------------------------------------------------
# single-path tracking
# --------------------------------------------------------------------------


def test_track_constant_path():
    out = track_path(X2_MINUS_1, X2_MINUS_1, (1.0,))
    assert out is not None
    assert abs(out[0] - 1.0) < 1e-8


def test_track_root_one_to_two():
    out = track_path(X2_MINUS_1, X2_MINUS_4, (1.0,))
    assert out is not None
    assert abs(out[0] - 2.0) < 1e-8


def test_track_negative_root_stays_on_its_sheet():
    out = track_path(X2_MINUS_1, X2_MINUS_4, (-1.0,))
    assert out is not None
    assert abs(out[0] + 2.0) < 1e-8


def test_gamma_one_hits_real_singularity():
    # with gamma = 1 the straight-line homotopy from x^2-1 to x^2+1
    # passes through the double root at t = 1/2 and the path is lost
    cfg = TrackerConfig(gamma=1.0)
    assert track_path(X2_MINUS_1, X2_PLUS_1, (1.0,), cfg) is None


def test_generic_gamma_avoids_the_singularity():
    out = track_path(X2_MINUS_1, X2_PLUS_1, (1.0,))
    assert out is not None
    assert min(abs(out[0] - 1j), abs(out[0] + 1j)) < 1e-8


def test_track_rejects_non_solution_start():
    with pytest.raises(ValueError, match="start vector"):
        track_path(X2_MINUS_1, X2_MINUS_4, (17.0,))


def test_tracker_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(initial_step=0.5, min_step=0.9)
    with pytest.raises(ValueError):
        TrackerConfig(corrector_tolerance=0.0)


# --------------------------------------------------------------------------
# total-degree continuation
# --------------------------------------------------------------------------


def test_total_degree_quadratic():
    out = total_degree_solve(X2_MINUS_1)
    roots = sorted(round(complex(s.beta[0]).real, 9) for s in out.solutions)
    assert roots == [-1.0, 1.0]
    assert out.path_successes + out.path_failures == 2
    assert out.path_failures == 0


def test_total_degree_circle_meets_line():
    e1 = MPoly(2, {(2, 0): Fraction(1), (0, 2): Fraction(1),
                   (0, 0): Fraction(-2)})
    e2 = MPoly(2, {(1, 0): Fraction(1), (0, 1): Fraction(-1)})
    system = ParameterSystem(n_unknowns=2, equations=[e1, e2],
                             parameter_point=())
    out = total_degree_solve(system)
    pts = sorted(tuple(round(complex(v).real, 6) for v in s.beta)
                 for s in out.solutions)
    assert pts == [(-1.0, -1.0), (1.0, 1.0)]
    assert out.path_successes + out.path_failures == 2


def test_total_degree_hyperbola_meets_line():
    e1 = MPoly(2, {(1, 1): Fraction(1), (0, 0): Fraction(-1)})
    e2 = MPoly(2, {(1, 0): Fraction(1), (0, 1): Fraction(1)})
    system = ParameterSystem(n_unknowns=2, equations=[e1, e2],
                             parameter_point=())
    out = total_degree_solve(system)
    assert len(out.solutions) == 2
    for s in out.solutions:
        x, y = map(complex, s.beta)
        assert abs(x * y - 1) < 1e-8 and abs(x + y) < 1e-8


def test_total_degree_empty_variety_reports_all_paths_lost():
    # two parallel hyperbolas never meet; every Bezout path diverges
    e1 = MPoly(2, {(1, 1): Fraction(1), (0, 0): Fraction(-1)})
    e2 = MPoly(2, {(1, 1): Fraction(1), (0, 0): Fraction(-2)})
    system = ParameterSystem(n_unknowns=2, equations=[e1, e2],
                             parameter_point=())
    out = total_degree_solve(system)
    assert len(out.solutions) == 0
    assert out.path_successes == 0
    assert out.path_failures == 4


def test_total_degree_is_deterministic():
    a = total_degree_solve(X2_MINUS_4)
    b = total_degree_solve(X2_MINUS_4)
    va = [complex(s.beta[0]) for s in a.solutions]
    vb = [complex(s.beta[0]) for s in b.solutions]
    assert va == vb


def test_bezout_guard():
    eqs = [MPoly(4, {tuple(40 if j == i else 0 for j in range(4)): Fraction(1),
                     (0, 0, 0, 0): Fraction(-1)}) for i in range(4)]
    system = ParameterSystem(n_unknowns=4, equations=eqs, parameter_point=())
    with pytest.raises(ValueError, match="monodromy_solve"):
        total_degree_solve(system)


# --------------------------------------------------------------------------
# scheme parameter system
# --------------------------------------------------------------------------


def test_scheme_system_requires_normalized_family():
    with pytest.raises(ValueError, match="a6 = a10 = 0"):
        scheme_parameter_system([1.0] * 15)
    bad = [1.0] * 15
    bad[6] = bad[10] = 0.0
    bad[11] = 0.0
    with pytest.raises(ValueError, match="a11"):
        scheme_parameter_system(bad)
    with pytest.raises(ValueError, match="15"):
        scheme_parameter_system([1.0, 2.0])


def test_scheme_evaluator_matches_symbolic_equations():
    # the fast batch evaluator must agree with the exact scheme equations
    S = derive_scheme(FERMAT_NORMALIZED)
    P = scheme_parameter_system(FERMAT_NORMALIZED)
    rng = np.random.default_rng(7)
    X = (rng.standard_normal((11, 5)) + 1j * rng.standard_normal((11, 5)))
    vals, jac = P.eval_batch(X, np.array(P.parameter_point))
    for col in range(5):
        pt = [complex(v) for v in X[:, col]]
        for i, eq in enumerate(S.equations):
            want = complex(eq.evaluate(pt))
            assert abs(vals[i, col] - want) <= 1e-9 * max(1.0, abs(want))


def test_scheme_jacobian_matches_finite_differences():
    P = scheme_parameter_system(FERMAT_NORMALIZED)
    rng = np.random.default_rng(3)
    X = (rng.standard_normal((11, 1)) + 1j * rng.standard_normal((11, 1)))
    params = np.array(P.parameter_point)
    _, jac = P.eval_batch(X, params)
    h = 1e-7
    for j in range(11):
        Xp = X.copy()
        Xp[j, 0] += h
        vp, _ = P.eval_batch(Xp, params)
        Xm = X.copy()
        Xm[j, 0] -= h
        vm, _ = P.eval_batch(Xm, params)
        fd = (vp[:, 0] - vm[:, 0]) / (2 * h)
        scale = np.maximum(1.0, np.abs(jac[:, j, 0]))
        assert np.all(np.abs(jac[:, j, 0] - fd) < 1e-4 * scale)


# --------------------------------------------------------------------------
# seeds
# --------------------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_seed_pair_solves_its_own_system(seed):
    system, sol = seed_pair(FERMAT_NORMALIZED, rng_seed=seed)
    X = np.array([[complex(v)] for v in sol], dtype=complex)
    vals, _ = system.eval_batch(X, np.array(system.parameter_point))
    assert float(np.max(np.abs(vals))) < 1e-12
    assert system.parameter_point[6] == 0
    assert system.parameter_point[10] == 0


def test_seed_pair_requires_normalized_curve():
    crooked = PlaneQuartic((1, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, -1, 0, -4, 0))
    with pytest.raises(ValueError, match="normalized"):
        seed_pair(crooked)


def test_seed_pair_is_deterministic():
    s1, v1 = seed_pair(FERMAT_NORMALIZED, rng_seed=5)
    s2, v2 = seed_pair(FERMAT_NORMALIZED, rng_seed=5)
    assert s1.parameter_point == s2.parameter_point
    assert v1 == v2


# --------------------------------------------------------------------------
# monodromy
# --------------------------------------------------------------------------

X2_MINUS_P = ParameterSystem(
    n_unknowns=1,
    equations=[MPoly(2, {(2, 0): Fraction(1), (0, 1): Fraction(-1)})],
    parameter_point=(2.0,))


def test_monodromy_finds_both_sheets():
    seed = ((2.0,), (np.sqrt(2.0),))
    out = monodromy_solve(X2_MINUS_P, seed, target_params=(9.0,),
                          target_count=2, required_count=2, stall_batches=25)
    roots = sorted(round(complex(s.beta[0]).real, 9) for s in out.solutions)
    assert roots == [-3.0, 3.0]


def test_monodromy_rejects_bad_seed():
    with pytest.raises(ValueError, match="seed"):
        monodromy_solve(X2_MINUS_P, ((2.0,), (1.9,)), target_params=(9.0,),
                        target_count=2, required_count=2)


def test_monodromy_shortfall_is_an_error():
    seed = ((2.0,), (np.sqrt(2.0),))
    with pytest.raises(ValueError, match="stalled"):
        monodromy_solve(X2_MINUS_P, seed, target_params=(9.0,),
                        target_count=5, required_count=5, stall_batches=3)


def test_monodromy_partial_set_warns():
    seed = ((2.0,), (np.sqrt(2.0),))
    with pytest.warns(UserWarning, match="after stalling"):
        out = monodromy_solve(X2_MINUS_P, seed, target_params=(4.0,),
                              target_count=5, required_count=2,
                              stall_batches=3)
    assert len(out.solutions) == 2


# --------------------------------------------------------------------------
# refinement
# --------------------------------------------------------------------------


def test_newton_refine_sqrt2_to_200_digits():
    sys2 = _system1([-2, 0, 1])
    out = newton_refine(sys2, (float(np.sqrt(2.0)),), 200)
    assert out[0].working_digits == 200
    with mpmath.workdps(210):
        err = abs(out[0].to_mpc() - mpmath.sqrt(2))
        assert err < mpmath.mpf(10) ** -195


def test_newton_refine_no_op_when_already_converged():
    sys2 = _system1([-2, 0, 1])
    with mpmath.workdps(40):
        x0 = mpmath.sqrt(2)
    hist = []
    out = newton_refine(sys2, (x0,), 16, residual_history=hist)
    assert len(hist) == 1
    assert abs(out[0].to_mpc() - x0) < 1e-15


def test_newton_refine_quadratic_convergence():
    sys3 = _system1([-2, 0, 0, 1])
    hist = []
    newton_refine(sys3, (2.0 ** (1.0 / 3.0),), 300, residual_history=hist)
    # residual exponents should roughly double step over step
    exps = [-mpmath.log10(r) for r in hist if r > 0]
    ratios = [float(b / a) for a, b in zip(exps, exps[1:]) if a > 3]
    assert any(r > 1.7 for r in ratios)


def test_newton_refine_rejects_far_input():
    sys2 = _system1([-2, 0, 1])
    with pytest.raises(ValueError, match="basin"):
        newton_refine(sys2, (8.0,), 50)


def test_newton_refine_rejects_low_target():
    sys2 = _system1([-2, 0, 1])
    with pytest.raises(ValueError, match="at least 16"):
        newton_refine(sys2, (1.4142,), 8)


def test_mpcomplex_precision_is_explicit():
    with pytest.raises(ValueError, match="at least 16"):
        MPComplex(1.0, 0.0, 8)
    with mpmath.workdps(60):
        z = mpmath.mpc(mpmath.sqrt(2), mpmath.mpf(1) / 3)
        w = MPComplex.from_mpc(z, 60)
        assert w.working_digits == 60
        assert abs(w.to_mpc() - z) == 0


# --------------------------------------------------------------------------
# solution sets
# --------------------------------------------------------------------------


def test_solution_set_dedups_close_vectors():
    S = SolutionSet(dedup_tolerance=1e-8)
    assert S.add((1.0, 2.0), 0.0)
    assert not S.add((1.0 + 1e-10, 2.0), 0.0)
    assert S.add((1.0 + 1e-5, 2.0), 0.0)
    assert len(S) == 2


def test_solution_set_conjugate_closure():
    S = SolutionSet(dedup_tolerance=1e-8)
    S.add((1j,), 0.0)
    S.conjugate_closure(lambda v: abs(complex(v[0]) ** 2 + 1), 1e-8)
    vals = sorted(complex(s.beta[0]).imag for s in S.solutions)
    assert vals == [-1.0, 1.0]


def test_solution_set_canonical_sort_is_total():
    S = SolutionSet()
    S.add((2.0, 0.0), 0.0)
    S.add((1.0, 5.0), 0.0)
    S.add((1.0, -1.0), 0.0)
    S.canonical_sort()
    firsts = [complex(s.beta[0]).real for s in S.solutions]
    assert firsts == sorted(firsts)


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                   allow_infinity=False),
                min_size=1, max_size=6))
@settings(max_examples=50, deadline=None)
def test_solution_file_roundtrip(vec):
    S = SolutionSet(seed=3)
    S.add(tuple(vec), 0.0)
    T = solutions_from_text(solutions_to_text(S))
    assert len(T) == 1
    assert T.seed == 3
    for a, b in zip(T.solutions[0].beta, vec):
        assert a == complex(b)


def test_solution_file_rejects_bad_header():
    with pytest.raises(ValueError, match="header"):
        solutions_from_text("digits: 16\nwrong: 1\nseed: 0\n")


def test_solution_file_rejects_odd_coordinates():
    text = "digits: 16\ncount: 1\nseed: 0\n1.0 0.0 2.0\n"
    with pytest.raises(ValueError, match="odd"):
        solutions_from_text(text)


# --------------------------------------------------------------------------
# the full torsion run (slow; enabled by QT_RUN_LONG=1)
# --------------------------------------------------------------------------


@pytest.mark.skipif(os.environ.get("QT_RUN_LONG") != "1",
                    reason="set QT_RUN_LONG=1 to run the full monodromy")
def test_fermat_torsion_monodromy_reaches_728():
    P = scheme_parameter_system(FERMAT_NORMALIZED)
    system, sol = seed_pair(FERMAT_NORMALIZED, rng_seed=0)
    out = monodromy_solve(P, (system.parameter_point, sol),
                          target_params=P.parameter_point)
    assert len(out.solutions) == 728
    assert max(s.residual for s in out.solutions) < 1e-8
    # conjugation-closed: the set maps to itself under conjugation
    keys = {tuple((round(complex(z).real, 6), round(complex(z).imag, 6))
                  for z in s.beta) for s in out.solutions}
    conj = {tuple((re, -im) for re, im in k) for k in keys}
    assert keys == conj
