"""Structural classifier tests."""

import pytest

from clawkit.structure import (EquationError, PreconditionViolated,
                               equation_from_strings, k_invariant_vanishes,
                               n_invariant_vanishes, structural_report,
                               validate_equation)
from conftest import P


class TestValidateEquation:
    def test_kdv_valid(self):
        eq = equation_from_strings("1", "u*p1")
        assert eq.f == P("1")

    def test_f_zero_rejected(self):
        with pytest.raises(EquationError):
            validate_equation(P("0"), P("p1"))

    def test_g_p3_rejected(self):
        with pytest.raises(EquationError):
            validate_equation(P("1"), P("p3"))

    def test_f_p2_rejected(self):
        with pytest.raises(EquationError):
            validate_equation(P("p2"), P("0"))

    def test_t_rejected(self):
        with pytest.raises(EquationError):
            validate_equation(P("1"), P("t*p1"))
        with pytest.raises(EquationError):
            validate_equation(P("t"), P("p1"))

    def test_rhs(self):
        eq = equation_from_strings("p1", "u")
        assert eq.rhs() == P("p1*p3 + u")


class TestDivergenceFormTest:
    def test_kdv(self):
        assert k_invariant_vanishes(equation_from_strings("1", "u*p1"))

    def test_quadratic_q_fails(self):
        assert not k_invariant_vanishes(equation_from_strings("1", "p2^2"))

    def test_matched_quadratic_passes(self):
        # g_qq = 2 = 2 f_p for f = p1.
        assert k_invariant_vanishes(equation_from_strings("p1", "p2^2"))

    def test_divergence_form_always_passes(self):
        # u_t = (f q)_x + g~ q + h~ expanded for several f.
        from clawkit.jets import JetContext, total_x
        ctx = JetContext()
        for f_text in ("1", "p1", "u^2 + x", "p1^-3"):
            f = P(f_text)
            g = total_x(f * P("p2"), ctx) - f * P("p3") + P("u*p2 + x*p1")
            eq = validate_equation(f, g)
            assert k_invariant_vanishes(eq)

    def test_x_shift_invariance(self):
        shift = {"x": P("x + 7")}
        for f_text, g_text in (("1", "u*p1"), ("p1", "p2^2"), ("1", "x*p2^2")):
            eq = equation_from_strings(f_text, g_text)
            shifted = validate_equation(eq.f.substitute(shift),
                                        eq.g.substitute(shift))
            assert k_invariant_vanishes(eq) == k_invariant_vanishes(shifted)


class TestSecondaryTest:
    def test_constant_f(self):
        assert n_invariant_vanishes(equation_from_strings("1", "u*p1"))

    def test_inverse_cube_passes(self):
        # The only power law f = p1^a with 4 a^2 = 3 a (a - 1) is a = -3;
        # g = -3 p1^-4 p2^2 keeps the divergence-form test satisfied.
        eq = validate_equation(P("p1^-3"), P("-3*p1^-4*p2^2"))
        assert n_invariant_vanishes(eq)

    def test_linear_f_fails(self):
        eq = validate_equation(P("p1"), P("p2^2"))
        assert not n_invariant_vanishes(eq)

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            n_invariant_vanishes(equation_from_strings("1", "p2^2"))


class TestStructuralReport:
    def test_kdv_report(self):
        rep = structural_report(equation_from_strings("1", "u*p1"))
        assert rep.to_dict() == {
            "k_vanishes": True,
            "n_vanishes": True,
            "g_quadratic_in_q": True,
            "normal_form_detected": "u_xxx + g(x,u,p)",
            "predicted_obstructions": [],
        }

    def test_cubic_q(self):
        rep = structural_report(equation_from_strings("1", "p2^3"))
        assert not rep.g_quadratic_in_q
        assert rep.n_vanishes is None
        assert len(rep.predicted_obstructions) == 2

    def test_quadratic_q(self):
        rep = structural_report(equation_from_strings("1", "p2^2"))
        assert not rep.k_vanishes
        assert rep.g_quadratic_in_q
        assert rep.predicted_obstructions == ["no weight -1 laws"]

    def test_normal_form_requires_f_one(self):
        rep = structural_report(validate_equation(P("p1"), P("p2^2")))
        assert rep.normal_form_detected is None
        rep = structural_report(equation_from_strings("1", "u*p2"))
        assert rep.normal_form_detected is None
