"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(via the conftest hook).  Tolerances are pinned here and nowhere else.

test_c10b implements two sub-clauses that are not reproducible from the
stated configuration (see the decisions ledger for the full analysis); it
is expected to fail and is kept faithful rather than weakened.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from atwood.diagnostics import (
    dalembert,
    exponent_estimate,
    log_derivative_coeffs,
    pade,
    pole_residues,
    series_to_coeffs,
)
from atwood.exactnum import CoefficientPoly, GR_ONE, GR_ZERO, GaussianRational
from atwood.exactsol import TrigParams, bridge_constants
from atwood.kowalevski import (
    admissible_pairs,
    covector_test,
    determinant_closed_form,
    expand,
    kowalevski_matrix,
    leading_balance,
    w3_closed_form,
)
from atwood.model import (
    CartesianState,
    MachineParams,
    energy,
    eom_residual,
    integrate_complex,
    is_zero_series,
    second_invariant_sq,
    second_invariant_sq_closed_form,
)
from atwood.poisson import (
    closed_form_brackets,
    closed_form_table,
    hamiltonian_brackets,
    jacobi_check,
    solve_brackets,
)

from test_kowalevski import expected_34_coeffs, expected_integrable_coeffs


@pytest.fixture(scope="module")
def integrable_bal():
    return next(b for b in leading_balance(3) if b.family == "integrable")


@pytest.fixture(scope="module")
def kr34_bal():
    return next(b for b in leading_balance(14) if b.family == "q2")


@pytest.fixture(scope="module")
def generic_integrable_400(integrable_bal):
    """Exact integrable series at generic rational constants, N=400."""
    params = integrable_bal.machine_params()
    return expand(integrable_bal, params, 400, sigma={"b1": "1", "c1": "1", "d1": "1"})


def test_c01_coefficient_fidelity_integrable(integrable_bal):
    """expand(integrable, N=10) reproduces every published coefficient as an
    exact symbolic identity; checked at three rational (g, m) pairs."""
    for g, m in ((Fraction(1), Fraction(1)), (Fraction(2), Fraction(3)), (Fraction(7, 5), Fraction(1, 2))):
        params = integrable_bal.machine_params(m=m, g=g)
        sol = expand(integrable_bal, params, 10)
        a_exp, b_exp = expected_integrable_coeffs(params)
        for j in range(5):
            assert sol.x_plus.coeffs[j] == a_exp[j]
            assert sol.x_minus.coeffs[j] == b_exp[j]


def test_c02_coefficient_fidelity_34(kr34_bal):
    """expand(k=3, r=4, N=8) reproduces the published table exactly,
    including the zero t^(1/3) term and the c2-bearing t^(4/3) terms."""
    start = time.monotonic()
    for g, m in ((Fraction(1), Fraction(1)), (Fraction(3), Fraction(2))):
        params = kr34_bal.machine_params(m=m, g=g)
        sol = expand(kr34_bal, params, 8)
        a_exp, b_exp = expected_34_coeffs(params)
        for j in range(5):
            assert sol.x_plus.coeffs[j] == a_exp[j]
            assert sol.x_minus.coeffs[j] == b_exp[j]
        assert sol.x_plus.coeffs[1].is_zero()
        assert not sol.x_plus.coeffs[4].derivative("c2").is_zero()
        assert not sol.x_minus.coeffs[4].derivative("c2").is_zero()
    assert time.monotonic() - start < 5.0


def test_c03_determinant_identities(integrable_bal):
    """Cofactor determinant equals the closed form for 1 <= s <= 3r over 10
    random admissible pairs and the integrable family, exactly."""
    rng = random.Random(101)
    pairs = rng.sample(admissible_pairs(23), 10)
    for k, r, ratio in pairs:
        (bal,) = [b for b in leading_balance(ratio) if b.family == "q2"]
        params = bal.machine_params(m=Fraction(2, 3), g=Fraction(7, 4))
        for s in range(1, 3 * r + 1):
            km = kowalevski_matrix(s, bal, params)
            assert km.determinant() == determinant_closed_form(s, bal, params)
    params = integrable_bal.machine_params()
    for s in range(1, 13):
        km = kowalevski_matrix(s, integrable_bal, params)
        assert km.determinant() == determinant_closed_form(s, integrable_bal, params)


def test_c04_invariant_formulas(integrable_bal, kr34_bal):
    """Energy and squared second invariant reproduce the published closed
    forms exactly; trig-bridged constants give H2^2 = 0 and E = E_in."""
    params3 = integrable_bal.machine_params()
    sol3 = expand(integrable_bal, params3, 16)
    names = sol3.x_plus.zero.names
    b1 = CoefficientPoly.variable(names, "b1")
    c1 = CoefficientPoly.variable(names, "c1")
    d1 = CoefficientPoly.variable(names, "d1")
    e_expected = -(d1 * d1) * (CoefficientPoly.const(names, 1) + b1 * c1 * 32) / (
        b1 * b1
    ) * Fraction(1, 8)
    assert energy(sol3, params3) == e_expected
    assert second_invariant_sq(sol3, params3) == second_invariant_sq_closed_form()

    params34 = kr34_bal.machine_params()
    sol34 = expand(kr34_bal, params34, 16)
    names = sol34.x_plus.zero.names
    c1 = CoefficientPoly.variable(names, "c1")
    c2 = CoefficientPoly.variable(names, "c2")
    d1 = CoefficientPoly.variable(names, "d1")
    h43 = (d1 * d1) * (c1**4 * Fraction(5 * 13412, 91854) - c2 * Fraction(5 * 19683, 91854))
    assert energy(sol34, params34) == h43

    tp = TrigParams(K=2, E=0.5, g=1.0)
    b1f, c1f, d1f = bridge_constants(tp)
    sig = {"b1": b1f, "c1": c1f, "d1": d1f}
    h2_bridged = second_invariant_sq_closed_form().eval_complex(sig)
    assert abs(h2_bridged) < 1e-12
    e_bridged = energy(sol3, params3).eval_complex(sig)
    assert abs(e_bridged - tp.E) < 1e-12


def test_c05_residual_vanishing(integrable_bal, kr34_bal):
    """eom_residual and the constraint identity vanish exactly through order
    N - 2k at N = 60, both families, symbolic constants, within 60 s."""
    start = time.monotonic()
    for bal in (integrable_bal, kr34_bal):
        params = bal.machine_params()
        sol = expand(bal, params, 60)
        bound = 60 - 2 * bal.k
        for res in eom_residual(sol, params):
            keep = min(len(res.coeffs), bound)
            assert all(c.is_zero() for c in res.coeffs[:keep])
            assert is_zero_series(res)  # in fact every computed order vanishes
        constraint = sol.z * sol.z - sol.x_plus * sol.x_minus
        assert all(c.is_zero() for c in constraint.coeffs)
    assert time.monotonic() - start < 60.0


def test_c06_mass_ratio_scan():
    """admissible_pairs(25) contains (3,4)->14 and (19,26)->15;
    leading_balance(3) gives p = -1/2, q = 3/2."""
    pairs = admissible_pairs(25)
    assert (3, 4, Fraction(14)) in pairs
    assert (19, 26, Fraction(15)) in pairs
    (bal,) = leading_balance(3)
    assert bal.p == Fraction(-1, 2) and bal.q == Fraction(3, 2)


def test_c07_covector():
    """U.K(r) = 0 exactly for k in {3,5,7,9}; W(3) matches its closed form
    exactly; W(4) carries the (k-3) factor, the stated denominator and a
    degree-6 polynomial factor."""
    for k in (3, 5, 7, 9):
        rep = covector_test(k)
        assert all(p.is_zero() for p in rep.uk_products)
        assert rep.w_at_r_zero
        if k >= 5:
            params = MachineParams(m=1, M=Fraction(4 * (2 * k + 1), k - 1), g=1)
            assert dict(rep.w)[3] == w3_closed_form(k, params)
    # W(4) structure: the scalar of c1^4 d1^2, divided by the published
    # prefactor and (k-3), interpolates to a polynomial of degree exactly 6
    samples = []
    for k in (5, 7, 9, 11, 13, 15, 17, 19):
        params = MachineParams(m=1, M=Fraction(4 * (2 * k + 1), k - 1), g=1)
        rep = covector_test(k, params=params)
        w4 = dict(rep.w)[4]
        ((exps, scalar),) = list(w4.terms.items())
        assert exps == (4, 0, 2) and scalar.re == 0
        denom = 96 * (k - 1) ** 2 * k**8 * (k + 2) ** 2 * (k + 3)
        pref = Fraction((k + 1) * (2 * k + 1) * (3 * k + 1) ** 4, denom)
        samples.append((k, scalar.im / pref / (k - 3)))
    rep3 = covector_test(3, params=MachineParams(m=1, M=14, g=1))
    assert dict(rep3.w)[4].is_zero()  # the (k-3) factor at k = 3

    def newton_eval(samples, x):
        xs = [Fraction(s[0]) for s in samples]
        coefs = [Fraction(s[1]) for s in samples]
        for j in range(1, len(xs)):
            for i in range(len(xs) - 1, j - 1, -1):
                coefs[i] = (coefs[i] - coefs[i - 1]) / (xs[i] - xs[i - j])
        total = coefs[-1]
        for i in range(len(xs) - 2, -1, -1):
            total = total * (x - xs[i]) + coefs[i]
        return total

    for k, val in samples[7:]:
        assert newton_eval(samples[:7], k) == val  # degree <= 6 fits all
    assert newton_eval(samples[:6], samples[6][0]) != samples[6][1]  # not 5


def test_c08_dalembert_bridged(integrable_bal):
    """Tail ratio estimate of the trig-bridged series (K=2, E=1/2) equals
    |t_inf|^(-1/2) within 1e-3 at N=400, within 120 s.

    Applies to x_plus, x_minus and z; lambda has a nearer string-winding
    pole on this special orbit (see ledger) and is excluded."""
    start = time.monotonic()
    tp = TrigParams(K=2, E=0.5, g=1.0)
    b1, c1, d1 = bridge_constants(tp, mp_dps=60)
    params = integrable_bal.machine_params()
    sol = expand(
        integrable_bal, params, 400,
        sigma={"b1": b1, "c1": c1, "d1": d1}, mp_dps=60,
    )
    target = abs(tp.t_inf) ** -0.5
    for name in ("x_plus", "x_minus", "z"):
        seq = dalembert(series_to_coeffs(getattr(sol, name)))
        assert abs(seq.limit - target) < 1e-3, name
    assert time.monotonic() - start < 120.0


def test_c09_exponent_table(generic_integrable_400):
    """exponent_estimate recovers the singular-exponent table
    {x_plus: 3/2, x_minus: -1/2, z: 1/2, lambda: -2} within 0.05 at N=400."""
    sol = generic_integrable_400
    expected = {"x_plus": 1.5, "x_minus": -0.5, "z": 0.5, "lam": -2.0}
    for name, target in expected.items():
        est = exponent_estimate(series_to_coeffs(getattr(sol, name)))
        assert abs(est.exponent - target) < 0.05, (name, est.exponent)


@pytest.fixture(scope="module")
def pade_34_report(kr34_bal):
    params = kr34_bal.machine_params()
    start = time.monotonic()
    sol = expand(kr34_bal, params, 140, sigma={"c1": "1", "c2": "2", "d1": "1"})
    # N = 119: Taylor coefficients of the log-derivative through z^119
    coeffs = log_derivative_coeffs(sol.x_plus, n=120)
    ap = pade(coeffs, 59)
    report = pole_residues(ap, exponent_candidates=[-4 / 3, 2.0])
    elapsed = time.monotonic() - start
    return sol, report, elapsed


def test_c10a_pade_residues(pade_34_report):
    """(3,4) with c1=1, c2=2, d1=1, M=59, N=119: the -4/3 residue cluster
    within 0.05, the +2 cluster identified, nearest pole consistent with the
    ratio test, within 30 s."""
    sol, report, elapsed = pade_34_report
    assert elapsed < 30.0
    true_poles = report.true_poles()
    assert len(true_poles) >= 8
    near = [e for e in true_poles if abs(e.pole) < 1.2]
    minus_cluster = [e for e in near if e.nearest_exponent == -4 / 3]
    plus_cluster = [e for e in near if e.nearest_exponent == 2.0]
    assert len(minus_cluster) >= 2
    assert all(e.exponent_deviation < 0.05 for e in minus_cluster)
    assert len(plus_cluster) >= 4
    # the ratio test and the nearest Pade pole agree on the radius
    seq = dalembert(series_to_coeffs(sol.x_plus))
    nearest = min(abs(e.pole) for e in true_poles)
    assert abs(nearest - 1.0 / seq.limit) < 1e-3


def test_c10b_pade_paper_quoted_values(pade_34_report):
    """Faithful form of the remaining criterion clauses: every true-pole
    residue within 0.05 of {-4/3, 2}, and >= 6 of the paper's 8 quoted pole
    positions matched within 0.02.

    Not attainable from the stated configuration: the quoted display
    belongs to a run whose d1 is not stated in the paper and is provably
    not 1 (no d1 reproduces the constellation).  See the decisions ledger.
    """
    _, report, _ = pade_34_report
    near = [e for e in report.true_poles() if abs(e.pole) < 1.2]
    worst_dev = max(e.exponent_deviation for e in near)
    paper = [
        -0.812 - 0.618j, 0.33 - 1.04j, 0.95 + 0.012j, 0.637 + 0.83j,
        0.192 + 0.703j, -0.175 + 0.84j, -0.629 + 0.545j, -1.45 + 0.0586j,
    ]
    poles = [e.pole for e in report.entries]
    matched = sum(1 for p in paper if min(abs(q - p) for q in poles) < 0.02)
    assert worst_dev < 0.05 and matched >= 6, (
        f"worst residue deviation {worst_dev:.3f} (need < 0.05); "
        f"{matched}/8 quoted positions within 0.02 (need >= 6); "
        "see notes/decisions.md: the quoted display corresponds to an "
        "undisclosed d1 != 1"
    )


def test_c11_poisson_brackets(integrable_bal, kr34_bal):
    """solve_brackets reproduces both published tables exactly at three
    random rational assignments; {H, t0} = 1 and {H, .} = 0 otherwise；
    Jacobi residual exactly zero."""
    rng = random.Random(7)

    def rand_sigma(names):
        return {
            n: str(Fraction(rng.randint(1, 9), rng.randint(1, 6)) * rng.choice([1, -1]))
            for n in names
        }

    for bal, family in ((integrable_bal, "integrable"), (kr34_bal, "q2")):
        params = bal.machine_params()
        sol = expand(bal, params, 16)
        names = sol.x_plus.zero.names
        coords = ("t0",) + tuple(names)
        forms = closed_form_brackets(family, params)
        for _ in range(3):
            sigma = rand_sigma(names)
            table = solve_brackets(sol, params, sigma, n_orders=14)
            closed = closed_form_table(family, params, sigma)
            for pair, value in table.values.items():
                assert value == closed[pair]
            hb = hamiltonian_brackets(sol, table, params)
            assert hb["t0"] == GR_ONE
            assert all(hb[n] == GR_ZERO for n in names)
            assert jacobi_check(forms, coords, [sigma]) == 0


def test_c12_cross_oracle(integrable_bal, kr34_bal):
    """series_eval and integrate_complex agree to 1e-8 over a factor-2 span
    inside the convergence disk, both families."""
    # (3, 4) family at exact rational constants
    params = kr34_bal.machine_params()
    sol = expand(kr34_bal, params, 140, sigma={"c1": "1", "c2": "2", "d1": "1"})
    seq = dalembert(series_to_coeffs(sol.x_plus))
    t_hat = (1.0 / seq.limit) ** 3  # z-plane radius -> t-plane radius
    runs = [(sol, params, 0.05 * t_hat)]
    # integrable family at trig-bridged constants
    tp = TrigParams(K=2, E=0.5, g=1.0)
    b1, c1, d1 = bridge_constants(tp, mp_dps=40)
    params3 = integrable_bal.machine_params()
    sol3 = expand(
        integrable_bal, params3, 150,
        sigma={"b1": b1, "c1": c1, "d1": d1}, mp_dps=40,
    )
    runs.append((sol3, params3, 0.05 * abs(tp.t_inf)))
    for sol_i, params_i, t0 in runs:
        state = CartesianState(
            x_plus=sol_i.x_plus.eval(t0),
            x_minus=sol_i.x_minus.eval(t0),
            z=sol_i.z.eval(t0),
            v_plus=sol_i.x_plus.differentiate().eval(t0),
            v_minus=sol_i.x_minus.differentiate().eval(t0),
            v_z=sol_i.z.differentiate().eval(t0),
        )
        traj = integrate_complex(state, params_i, (t0, 2 * t0), rtol=1e-11, atol=1e-13)
        assert traj.complete
        for i in range(len(traj.t)):
            t = traj.t[i]
            dev = max(
                abs(sol_i.x_plus.eval(t) - traj.states[i, 0]),
                abs(sol_i.x_minus.eval(t) - traj.states[i, 1]),
                abs(sol_i.z.eval(t) - traj.states[i, 2]),
            )
            assert dev < 1e-8
