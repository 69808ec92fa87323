import json
from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from heckeconv import builder
from heckeconv.analytic import (
    FourierSeries, LocalFactorSpec, MissingPrime, NonIntegralLeadingPower,
    PrecisionUnreachable, check_invariance, cusp_constant_term, delta, eisenstein_chi3,
    eta_quotient, euler_expand, f11, fricke_ratio, hecke_eigen_check, parse_form,
    primes_upto, sample_points, slash_eval,
)
from heckeconv.cusps import CuspSpec
from heckeconv.linalg import IDENTITY, canonicalize, eval_matrix_expr, fricke


def naive_eta(exps, K):
    """prod_d prod_n (1 - q^(dn))^r_d by schoolbook multiplication, shifted by q."""
    poly = [1] + [0] * K
    for d, r in exps.items():
        for n in range(1, K // d + 1):
            for _ in range(r):
                new = poly[:]
                for i in range(K + 1 - d * n):
                    new[i + d * n] -= poly[i]
                poly = new
    return [0] + poly[:K]


@pytest.fixture(scope="module")
def F11():
    return f11(1000)


@pytest.fixture(scope="module")
def D():
    return delta(1000)


class TestSeries:
    def test_delta(self):
        d = delta(5)
        assert d.weight == 12 and d.level == 1
        assert [d[n] for n in range(1, 6)] == [1, -24, 252, -1472, 4830]

    def test_f11_examples(self):
        f = f11(11)
        assert f.weight == 2 and f.level == 11
        assert (f[2], f[3], f[4], f[5], f[9], f[11]) == (-2, -1, 2, 1, -2, 1)

    def test_against_schoolbook_product(self):
        assert f11(60).coeffs == naive_eta({1: 2, 11: 2}, 60)
        assert delta(30).coeffs == naive_eta({1: 24}, 30)

    def test_leading_power(self):
        with pytest.raises(NonIntegralLeadingPower):
            eta_quotient({1: 1}, 1)

    def test_eisenstein(self):
        e = eisenstein_chi3(10)
        assert (e[1], e[2], e[3], e[4]) == (1, -3, 0, 7)
        assert e.weight == 2 and e.level == 9

    def test_json_round_trip(self):
        f = FourierSeries(2, 9, [0, 1, Fraction(-1, 2), 3], "x")
        text = f.to_json()
        g = FourierSeries.from_json(text)
        assert g.coeffs == f.coeffs and g.to_json() == text
        assert json.loads(text)["K"] == 3

    def test_parse_form(self):
        assert parse_form("eta:1^2,11^2", 20).coeffs == f11(20).coeffs
        assert parse_form("eis-chi3", 5).level == 9
        assert parse_form("delta", 5).weight == 12


class TestEuler:
    def test_reproduces_eta_product(self):
        f = f11(200)
        ap = {p: f[p] for p in primes_upto(200) if p != 11}
        g = euler_expand(LocalFactorSpec(11, 2, ap), 200)
        assert g.coeffs == f.coeffs

    def test_level_rules(self):
        f = f11(200)
        assert f[11] == 1  # 11^(k/2 - 1)
        assert all(f[11 * m] == f[m] for m in range(1, 19))
        assert f[4] == f[2] ** 2 - 2
        spec = LocalFactorSpec(8, 2, {p: 1 for p in primes_upto(20) if p != 2})
        g = euler_expand(spec, 20)
        assert g[2] == g[4] == g[8] == g[16] == 0

    def test_missing_prime(self):
        with pytest.raises(MissingPrime):
            euler_expand(LocalFactorSpec(11, 2, {2: -2}), 10)

    def test_spec_json(self):
        s = LocalFactorSpec(11, 2, {2: -2, 3: -1})
        assert LocalFactorSpec.from_json(s.to_json()) == s


class TestSlash:
    def test_identity(self, D):
        v, tail = slash_eval(D, IDENTITY, 1j)
        expected = sum(D[n] * np.exp(-2 * np.pi * n) for n in range(1, 40))
        assert abs(v - expected) < 1e-15 and tail < 1e-8

    def test_fricke_fixed_point(self, F11):
        z = 1j / sqrt(11)
        v, _ = slash_eval(F11, fricke(11), z)
        w, _ = slash_eval(F11, IDENTITY, z)
        assert abs(v + w) < 1e-12

    @pytest.mark.parametrize("z", [0.1 + 0.35j, -0.2 + 0.3j, 0.05 + 0.4j])
    def test_fricke_sign(self, F11, z):
        assert abs(fricke_ratio(F11, z) + 1) < 1e-8

    def test_precision_guard(self, F11):
        with pytest.raises(PrecisionUnreachable):
            slash_eval(F11, canonicalize(3, 1, 11, 4), complex(0.5, 0.001))

    def test_sample_points_admissible(self):
        g = eval_matrix_expr("M(3)", 11)
        pts = sample_points(g)
        assert len(pts) == 5
        assert all(min(z.imag, ((g.a * z + g.b) / (g.c * z + g.d)).imag) >= 0.08 for z in pts)
        # Im z * Im gz <= 1/c^2, so |c| = 17 admits no point at the 0.08 floor
        with pytest.raises(PrecisionUnreachable):
            sample_points(eval_matrix_expr("M(6)", 17))


class TestInvariance:
    @pytest.mark.parametrize("expr", builder.GENERATORS[11])
    def test_f11_generators(self, F11, expr):
        rep = check_invariance(F11, eval_matrix_expr(expr, 11))
        assert rep.passed, rep.max_residual

    def test_f11_not_level_one(self, F11):
        g = canonicalize(1, 0, 1, 1)
        rep = check_invariance(F11, g, sample_points(g, 5))
        assert not rep.passed

    def test_delta_level_one(self, D):
        g = canonicalize(0, -1, 1, 0)
        assert check_invariance(D, g, sample_points(g, 3)).passed

    @pytest.mark.parametrize("expr", builder.GENERATORS[9])
    def test_eisenstein_gamma0_9(self, expr):
        rep = check_invariance(eisenstein_chi3(1000), eval_matrix_expr(expr, 9), tol=1e-6)
        assert rep.passed


class TestHecke:
    def test_f11(self, F11):
        for p, lam in ((2, -2), (3, -1), (5, 1), (7, -2)):
            rep = hecke_eigen_check(F11, p)
            assert abs(rep.estimate - lam) < 1e-8 and rep.passed

    def test_delta_normalization(self, D):
        rep = hecke_eigen_check(D, 2)
        assert rep.expected == Fraction(-3, 4)
        assert abs(rep.estimate + 0.75) < 1e-8 and rep.passed

    def test_bad_prime(self, F11):
        with pytest.raises(ValueError):
            hecke_eigen_check(F11, 11)
        with pytest.raises(ValueError):
            hecke_eigen_check(F11, 4)


class TestCusps:
    def test_delta_infinity(self, D):
        assert abs(cusp_constant_term(D, CuspSpec.infinity(1)).estimate) < 1e-8

    @pytest.mark.parametrize("cusp", [CuspSpec.infinity(11), CuspSpec.zero(11)])
    def test_f11_vanishes(self, F11, cusp):
        assert abs(cusp_constant_term(F11, cusp).estimate) < 1e-6

    def test_eisenstein_does_not_vanish(self):
        rep = cusp_constant_term(eisenstein_chi3(1000), CuspSpec.one_over(9, 3))
        assert abs(rep.estimate) > 0.01

    def test_sample_floor(self, F11):
        with pytest.raises(ValueError):
            cusp_constant_term(F11, CuspSpec.zero(11), samples=4)
