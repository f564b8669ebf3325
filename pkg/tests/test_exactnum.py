import random
from fractions import Fraction

import pytest

from atwood.exactnum import (
    GR_I,
    GR_ONE,
    GR_ZERO,
    CoefficientPoly,
    GaussianRational,
    PuiseuxSeries,
    gr_arith,
    parse_gaussian,
    series_eval,
    series_mul,
)


def rand_gr(rng, span=6):
    return GaussianRational(
        Fraction(rng.randint(-span, span), rng.randint(1, span)),
        Fraction(rng.randint(-span, span), rng.randint(1, span)),
    )


class TestGaussianRational:
    def test_printed_products(self):
        one_plus = GaussianRational(1, 1)
        one_minus = GaussianRational(1, -1)
        assert gr_arith(one_plus, one_minus, "mul") == GaussianRational(2)
        assert gr_arith(GaussianRational("3/4"), GaussianRational("1/4"), "add") == GR_ONE
        # leading x_minus coefficient of the (3,4) family and its reciprocal
        a = GaussianRational(0, "-9/10")
        b = GaussianRational(0, "10/9")
        assert gr_arith(a, b, "mul") == GR_ONE

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            gr_arith(GR_ONE, GR_ZERO, "div")

    def test_field_axioms_random(self):
        rng = random.Random(7)
        for _ in range(200):
            a, b, c = (rand_gr(rng) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert a * (b + c) == a * b + a * c
            assert a * b == b * a
            if not a.is_zero():
                assert a * (GR_ONE / a) == GR_ONE
                assert a**-2 == GR_ONE / (a * a)

    def test_canonical_form(self):
        v = GaussianRational(Fraction(4, 8), Fraction(-2, -4))
        assert v.re.numerator == 1 and v.re.denominator == 2
        assert v.im.numerator == 1 and v.im.denominator == 2

    def test_parse(self):
        assert parse_gaussian("3/4") == GaussianRational("3/4")
        assert parse_gaussian("-9/10i") == GaussianRational(0, "-9/10")
        assert parse_gaussian("1/2-1/3i") == GaussianRational("1/2", "-1/3")
        assert parse_gaussian("i") == GR_I
        assert parse_gaussian("-2") == GaussianRational(-2)
        with pytest.raises(ValueError):
            parse_gaussian("3/4 bogus")


NAMES = ("b1", "c1", "d1")


def rand_poly(rng, n_terms=3):
    terms = {}
    for _ in range(n_terms):
        exps = tuple(rng.randint(-2, 3) for _ in NAMES)
        terms[exps] = rand_gr(rng, 4)
    return CoefficientPoly(NAMES, terms)


class TestCoefficientPoly:
    def test_ring_laws_random(self):
        rng = random.Random(11)
        for _ in range(60):
            p, q, r = (rand_poly(rng) for _ in range(3))
            assert p * q == q * p
            assert p * (q + r) == p * q + p * r
            assert (p + q) + r == p + (q + r)

    def test_no_zero_terms_stored(self):
        p = CoefficientPoly.variable(NAMES, "b1")
        assert not (p - p).terms

    def test_eval_homomorphism(self):
        rng = random.Random(13)
        sigma = {"b1": rand_gr(rng), "c1": rand_gr(rng), "d1": GaussianRational(2, 1)}
        for _ in range(40):
            p, q = rand_poly(rng), rand_poly(rng)
            assert (p * q).eval_exact(sigma) == p.eval_exact(sigma) * q.eval_exact(sigma)

    def test_monomial_division(self):
        p = CoefficientPoly.variable(NAMES, "b1") * CoefficientPoly.variable(NAMES, "d1")
        d = CoefficientPoly.monomial(NAMES, (1, 0, 0), GaussianRational(2))
        assert p / d == CoefficientPoly.monomial(NAMES, (0, 0, 1), GaussianRational("1/2"))
        with pytest.raises(ValueError):
            p / (p + CoefficientPoly.const(NAMES, 1))

    def test_derivative_and_substitute(self):
        b1 = CoefficientPoly.variable(NAMES, "b1")
        c1 = CoefficientPoly.variable(NAMES, "c1")
        p = b1 * b1 * c1 + c1 * 3
        assert p.derivative("b1") == b1 * c1 * 2
        # substitute c1 -> b1^2 and check by evaluation
        q = p.substitute("c1", b1 * b1)
        sig = {"b1": GaussianRational(2), "c1": GaussianRational(99), "d1": GR_ONE}
        sig2 = dict(sig, c1=GaussianRational(4))
        assert q.eval_exact(sig) == p.eval_exact(sig2)


def gr_series(k, leading, values):
    return PuiseuxSeries(k, leading, [GaussianRational(v) if not isinstance(v, GaussianRational) else v for v in values], GR_ZERO)


class TestPuiseuxSeries:
    def test_monomial_product(self):
        a = gr_series(2, -1, [1])  # t^(-1/2)
        b = gr_series(2, 3, [1])  # t^(3/2)
        prod = series_mul(a, b)
        assert prod.leading == 2 and prod.k == 2
        assert prod.coeffs[0] == GR_ONE
        assert abs(prod.eval(4.0) - 4.0) < 1e-14

    def test_zero_series(self):
        a = gr_series(2, -1, [1, 2, 3])
        z = PuiseuxSeries(2, 0, [], GR_ZERO, complete=True)
        assert series_mul(a, z).is_zero()
        assert (a + z.scale(1)).coeffs == a.coeffs

    def test_mismatched_k(self):
        with pytest.raises(ValueError):
            series_mul(gr_series(2, 0, [1]), gr_series(3, 0, [1]))

    def test_constraint_product_34(self, kr34_solution):
        # x_plus * x_minus equals z^2 coefficientwise; z^2 recomputed
        # independently from the z series alone
        sol, _ = kr34_solution
        lhs = series_mul(sol.x_plus, sol.x_minus, 6)
        rhs = series_mul(sol.z, sol.z, 6)
        assert lhs == rhs

    def test_eval_constant_and_principal_branch(self):
        const = PuiseuxSeries.constant(2, GaussianRational(5), GR_ZERO)
        assert series_eval(const, None, 17.0) == 5.0 + 0j
        s = gr_series(2, 3, [1])
        assert abs(series_eval(s, None, 4.0) - 8.0) < 1e-14
        # principal branch: t = -1 gives (e^{i pi/2})^3 = -i
        assert abs(series_eval(s, None, -1.0) - (-1j)) < 1e-14

    def test_eval_errors(self):
        s = gr_series(2, -1, [1])
        with pytest.raises(ZeroDivisionError):
            s.eval(0.0)
        with pytest.raises(ValueError):
            s.eval(10.0, radius_guard=1.0)

    def test_eval_commutes_with_substitution(self, integrable_solution):
        sol, _ = integrable_solution
        sigma = {
            "b1": GaussianRational(2, 1),
            "c1": GaussianRational("1/3"),
            "d1": GaussianRational(1, -2),
        }
        t = 0.03 + 0.01j
        direct = sol.x_minus.eval(t, sigma=sigma)
        substituted = sol.x_minus.substitute(sigma).eval(t)
        assert abs(direct - substituted) < 1e-12
        # exact in the coefficient field: substitute then compare coefficients
        num = sol.x_minus.substitute(sigma)
        for j, c in enumerate(num.coeffs):
            assert c == sol.x_minus.coeffs[j].eval_exact(sigma)

    def test_derivative(self):
        s = gr_series(2, 3, [2, 0, 4])  # 2 t^{3/2} + 4 t^{5/2}
        d = s.differentiate()
        assert d.leading == 1
        assert d.coeffs[0] == GaussianRational(3)  # 2 * 3/2
        assert d.coeffs[2] == GaussianRational(10)  # 4 * 5/2

    def test_inversion(self):
        s = gr_series(2, -1, [1, 2, 3, 4, 5])
        inv = s.invert()
        prod = series_mul(s, inv)
        assert prod.leading == 0
        assert prod.coeffs[0] == GR_ONE
        assert all(c.is_zero() for c in prod.coeffs[1:])

    def test_json_round_trip(self, kr34_solution):
        sol, _ = kr34_solution
        for series in (sol.x_plus, sol.lam):
            data = series.to_json_dict()
            back = PuiseuxSeries.from_json_dict(data)
            assert back == series

    def test_trig_calibrated_eval_matches_closed_form(self):
        # series evaluation at t_inf/10 against the independent closed form
        from atwood.exactsol import TrigParams, U_of_t, bridge_constants, trig_state
        from atwood.kowalevski import expand, leading_balance

        tp = TrigParams(K=2, E=0.5, g=1.0)
        b1, c1, d1 = bridge_constants(tp)
        bal = next(b for b in leading_balance(3) if b.family == "integrable")
        sol = expand(bal, bal.machine_params(), 60, sigma={"b1": b1, "c1": c1, "d1": d1})
        t = tp.t_inf / 10
        state, _ = trig_state(tp, U_of_t(tp, t))
        assert abs(sol.x_minus.eval(t) - state.x_minus) < 1e-10
        assert abs(sol.x_plus.eval(t) - state.x_plus) < 1e-10
