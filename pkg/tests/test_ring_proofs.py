from fractions import Fraction

import pytest

from heckeconv import builder
from heckeconv.builder import ScriptBuilder, build_level, lemma2, translation_multiplier
from heckeconv.expr import parse_elem
from heckeconv.linalg import (
    IDENTITY, P_MATRIX, canonicalize, diag, fricke, mul, parse_matrix, power, translation,
)
from heckeconv.proofs import (
    ELLIPTIC_RULE, EVEN_WEIGHT, CertificateMismatch, Combine, Hyp, InconsistentLevel,
    ScriptSyntaxError, SideConditionFailed, UnknownRelationId, Weil, format_script,
    new_session, parse_script, run_script,
)
from heckeconv.ring import (
    NotPrime, RingElem, R_sum, atkin_U, hecke_T, hecke_T_power, is_prime, translation_sum,
)
from heckeconv.symscalar import EPS, alpha

from helpers import sample_gamma0

ONE = RingElem.scalar(1)
P = RingElem.of(P_MATRIX)


def E(m):
    return RingElem.of(parse_matrix(m) if isinstance(m, str) else m)


class TestRing:
    def test_T2_squared(self):
        assert hecke_T(2) * hecke_T(2) == hecke_T_power(2, 2) + ONE + P

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_Tp_squared(self, p):
        tail = sum((RingElem.of(power(P_MATRIX, j)) for j in range(p)), RingElem())
        assert hecke_T(p) * hecke_T(p) == hecke_T_power(p, 2) + tail

    def test_ring_identities(self):
        assert (ONE - P) * (ONE + P) == ONE - P * P
        half = RingElem.of(translation(Fraction(1, 2)))
        assert half * half == P

    def test_definitions(self):
        assert hecke_T(2) == E("[2,0;0,1]") + E("[1,0;0,2]") + E("[1,1;0,2]")
        assert R_sum(2) == E("[2,1;0,2]")
        assert atkin_U(2) == ONE + E("[2,1;0,2]")
        with pytest.raises(NotPrime):
            hecke_T(4)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_Tp_times_diag(self, p):
        lhs = hecke_T(p) * RingElem.of(diag(p))
        assert lhs == R_sum(p) + RingElem.of(diag(p * p)) + ONE

    def test_R_is_translation_sum_times_scalar(self):
        # [[n,a],[0,n]] is the class of beta(a/n)
        assert R_sum(5) == translation_sum(5, [1, 2, 3, 4])

    @pytest.mark.parametrize("m1, m2", [(2, 3), (3, 5), (5, 2), (4, 7)])
    def test_commutation_holds_modulo_P_only(self, m1, m2):
        d = RingElem.of(diag(m1))
        diff = d * R_sum(m2) - R_sum(m2) * d
        assert diff  # not an identity in the group ring
        u, rest = translation_multiplier(diff)
        assert rest.is_zero()
        assert (P - 1) * u == diff

    def test_hecke_scalars_collapse(self):
        assert RingElem.of(canonicalize(3, 0, 0, 3)) == ONE
        x = RingElem.of(fricke(7)) * RingElem.of(fricke(7))
        assert x == ONE

    def test_is_prime(self):
        assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


class TestExactSuite:
    def test_beta_H99(self):
        lhs = mul(translation(Fraction(1, 3)), fricke(99))
        rhs = mul(mul(fricke(11), canonicalize(3, -1, -11, 4)), translation(Fraction(1, 3)))
        assert lhs == rhs == canonicalize(33, -1, 99, 0)

    @pytest.mark.parametrize("N", [6, 10, 14])
    def test_H2N(self, N):
        assert fricke(2 * N) == mul(fricke(N), diag(2))

    @pytest.mark.parametrize("N", [5, 8, 11, 14, 17, 23])
    def test_useful_calculation(self, N, rng):
        h = fricke(N)
        for m in sample_gamma0(N, 50, rng):
            a, b, c, d = m.a, m.b, m.c // N, m.d
            assert mul(mul(h, m), h) == canonicalize(d, -c, -b * N, a)


class TestStore:
    def test_seed_counts(self):
        assert len(new_session(11, [Hyp("P"), Hyp("H"), Hyp("T", 2), Hyp("T", 3)])) == 4
        store = new_session(8, [Hyp("P"), Hyp("H"), Hyp("Uq", 2, "zero")])
        assert len(store) == 3
        # U_2 = 0 is literally B + 1
        assert store["U2"].element == E("[2,1;0,2]") + ONE
        assert len(new_session(6, [Hyp("Uq", 3, "id")])) == 1

    @pytest.mark.parametrize("N, hyp", [
        (6, Hyp("Uq", 2, "zero")), (8, Hyp("Uq", 2, "id")), (10, Hyp("T", 5)),
        (7, Hyp("T", 4)), (5, Hyp("G", matrix=canonicalize(1, 0, 1, 1))),
    ])
    def test_inconsistent(self, N, hyp):
        with pytest.raises(InconsistentLevel):
            new_session(N, [hyp])

    def test_hypothesis_elements(self):
        store = new_session(11, [Hyp("P"), Hyp("H"), Hyp("T", 2)])
        assert store["P"].element == P - 1
        assert store["H"].element == RingElem.of(fricke(11)) - EPS
        assert store["T2"].element == hecke_T(2) - alpha(2)
        assert EVEN_WEIGHT in store.assumptions

    def test_unknown_id(self):
        store = new_session(5, [Hyp("P")])
        with pytest.raises(UnknownRelationId):
            store.apply_step(Combine(P - 1, (("Q", ONE),)))

    def test_combine_mismatch_reports_residual(self):
        store = new_session(5, [Hyp("P")])
        target = (P - 1) * P
        store.apply_step(Combine(target, (("P", P),)))
        with pytest.raises(CertificateMismatch) as err:
            store.apply_step(Combine(target, (("P", ONE),)))
        assert err.value.residual == target - (P - 1)
        assert err.value.step == 3  # the hypothesis is step 1
        assert "residual" in str(err.value)

    def test_weil_rule(self):
        gamma = canonicalize(3, -1, -11, 4)
        eps = parse_matrix("[1,-2/3;11/2,-8/3]")
        store = new_session(11, [Hyp("G", matrix=gamma, name="g")])
        target = (ONE - RingElem.of(gamma)) * (ONE - RingElem.of(eps))
        rid = store.apply_step(Combine(target, (("g", RingElem.of(eps) - 1),)))
        out = store.apply_step(Weil(gamma, eps, rid))
        assert store[out].element == ONE - RingElem.of(gamma)
        assert ELLIPTIC_RULE in store.assumptions
        assert store.audit(out).is_zero()

    def test_weil_side_conditions(self):
        gamma = canonicalize(3, -1, -11, 4)
        store = new_session(11, [Hyp("G", matrix=gamma, name="g")])
        s = parse_matrix("[0,-1;1,0]")
        target = (ONE - RingElem.of(gamma)) * (ONE - RingElem.of(s))
        rid = store.apply_step(Combine(target, (("g", RingElem.of(s) - 1),)))
        with pytest.raises(SideConditionFailed):
            store.apply_step(Weil(gamma, s, rid))
        eps = parse_matrix("[1,-2/3;11/2,-8/3]")
        with pytest.raises(CertificateMismatch):
            store.apply_step(Weil(gamma, eps, rid))

    def test_conj_needs_H(self):
        store = new_session(7, [Hyp("P")])
        from heckeconv.proofs import Conj
        with pytest.raises(SideConditionFailed):
            store.apply_step(Conj("P"))


class TestDerivedRelations:
    def test_lemma2_at_5(self):
        sb = ScriptBuilder(5)
        rid = lemma2(sb)
        m2 = canonicalize(2, 1, 5, 3)
        assert sb.store[rid].element == RingElem.of(m2) - 1
        assert sb.store.audit(rid).is_zero()
        report, _ = run_script(parse_script(format_script(sb.script)))
        assert report.ok

    @pytest.mark.parametrize("N", [6, 10])
    def test_lemma3_chain(self, N):
        from heckeconv.linalg import a_matrix
        sb = build_level(N)
        assert sb.store["A"].element == RingElem.of(a_matrix(N)) + ONE


class TestScripts:
    @pytest.mark.parametrize("N", builder.LEVELS)
    def test_builtin_matches_builder(self, N):
        assert builder.builtin_script_text(N) == builder.render_level(N)

    def test_generator_table_current(self):
        from importlib.resources import files
        shipped = files("heckeconv").joinpath("data", "generators.txt").read_text("utf-8")
        assert shipped == builder.render_generators()

    @pytest.mark.parametrize("N", builder.LEVELS)
    def test_builtin_replay_and_audit(self, N):
        report, store = run_script(parse_script(builder.builtin_script_text(N)))
        assert report.ok
        assert all(r["terms"] == 0 for r in report.residuals)
        for m in store.assertions:
            assert store.audit(store.proves_invariance(m)).is_zero()

    def test_round_trip(self):
        text = builder.builtin_script_text(14)
        assert format_script(parse_script(text)) == text

    def test_script_errors_carry_location(self):
        text = "session N=5\nhyp P\nstep combine target=1*[1,1;0,1] - 1 cert= P*(2) as x\n"
        with pytest.raises(CertificateMismatch) as err:
            run_script(parse_script(text))
        assert err.value.line == 3 and err.value.step == 2
        with pytest.raises(ScriptSyntaxError) as err:
            parse_script("session N=5\nhyp Z\n")
        assert err.value.line == 2
        with pytest.raises(ScriptSyntaxError):
            parse_script("hyp P\n")

    def test_element_parser(self):
        x = parse_elem("(1 - alpha_3)*[3,0;0,1] + eps*[1,0;0,1]")
        assert x.coefficient(diag(3)) == 1 - alpha(3)
        assert x.coefficient(IDENTITY) == EPS
