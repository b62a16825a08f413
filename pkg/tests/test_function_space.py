import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conjgen.errors import DegenerateCandidateError, EvaluationError
from conjgen.function_space import (
    BasisFunction,
    CandidateConjecture,
    Dataset,
    FeatureBasis,
    apply_group_action,
    basis_from_dict,
    basis_to_dict,
    candidate_from_record,
    candidate_to_record,
    canonical_difference,
    canonical_key,
    eval_candidate,
    feature_matrix,
    feature_matrix_exact,
    max_hook_argument,
    parse_candidate,
    render,
    snap_candidate,
    snap_rational,
    symmetric_features,
)
from conjgen.group_algebra import ConjugatedParams, mat_from_abc

from conftest import hl_basis


class TestSymmetricFeatures:
    def test_examples(self):
        assert symmetric_features((2, 3), 2) == (5, 6)
        assert symmetric_features((1, 2, 3), 3) == (6, 11, 6)
        assert symmetric_features((7,), 1) == (7,)

    def test_degree_above_arity_rejected(self):
        with pytest.raises(ValueError):
            symmetric_features((1, 2), 3)

    @settings(max_examples=50, deadline=None)
    @given(st.permutations([2.0, 5.0, 11.0]))
    def test_permutation_invariant(self, xs):
        assert symmetric_features(tuple(xs), 3) == pytest.approx(
            symmetric_features((2.0, 5.0, 11.0), 3)
        )


class TestBasisValidation:
    def test_degree_bounds_enforced(self, table_small):
        entry = BasisFunction(combine="sym", exponents=((2, 2),))  # degree 4
        with pytest.raises(ValueError):
            FeatureBasis((entry,), d1=2, d2=1, variables=("a", "b"))

    def test_outer_power_bound(self):
        entry = BasisFunction(combine="sym", outer="power", power=3)
        with pytest.raises(ValueError):
            FeatureBasis((entry,), d1=1, d2=2, variables=("x",))

    def test_duplicate_entries_rejected(self, table_small):
        e = BasisFunction(combine="sym", hook="pi")
        with pytest.raises(ValueError):
            FeatureBasis((e, e), d1=1, d2=1, variables=("a", "b"), pi=table_small)

    def test_hook_requires_table(self):
        e = BasisFunction(combine="sym", hook="pi")
        with pytest.raises(ValueError):
            FeatureBasis((e,), d1=1, d2=1, variables=("a", "b"))

    def test_index_above_arity_rejected(self):
        e = BasisFunction(combine="sym", exponents=((3, 1),))
        with pytest.raises(ValueError):
            FeatureBasis((e,), d1=3, d2=1, variables=("a", "b"))

    def test_log_domain_checked_at_build(self, table_small):
        e = BasisFunction(combine="sym", outer="log")
        rows = np.array([[1.0, 2.0], [-3.0, 1.0]])
        ds = Dataset(("a", "b"), rows, (True, True))
        with pytest.raises(EvaluationError):
            FeatureBasis.build((e,), 1, 1, ("a", "b"), dataset=ds)


class TestEvalCandidate:
    def test_pi_basis_example(self, table_small):
        entries = (
            BasisFunction(combine="sym", exponents=((1, 1),), hook="pi"),
            BasisFunction(combine="sym", exponents=((2, 1),), hook="pi"),
        )
        basis = FeatureBasis(entries, d1=2, d2=1, variables=("a", "b"), pi=table_small)
        c = CandidateConjecture(basis, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert eval_candidate(c, (2, 3)) == (3.0, 3.0)  # pi(5), pi(6)

    def test_equal_thetas_give_equal_sides(self, basis_200):
        theta = np.array([0.5, -1.0, 2.0])
        c = CandidateConjecture(basis_200, theta, theta.copy())
        f, g = eval_candidate(c, (10, 20))
        assert f == g

    def test_zero_theta_f_gives_zero(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.zeros(3), np.array([1.0, 0.0, 0.0])
        )
        assert eval_candidate(c, (5, 7))[0] == 0.0

    def test_log_violation_names_entry_and_point(self, table_small):
        entries = (BasisFunction(combine="sym", outer="log"),)
        basis = FeatureBasis(entries, d1=1, d2=1, variables=("x",))
        c = CandidateConjecture(basis, np.array([1.0]), np.array([2.0]))
        with pytest.raises(EvaluationError) as err:
            eval_candidate(c, (-4.0,))
        assert "ln(x)" in str(err.value)
        assert err.value.point == (-4.0,)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 60), st.integers(2, 60))
    def test_permutation_invariance(self, table_small, a, b):
        basis = hl_basis(table_small)
        c = CandidateConjecture(
            basis, np.array([0.3, -0.2, 1.0]), np.array([1.0, 0.5, 0.0])
        )
        assert eval_candidate(c, (a, b)) == eval_candidate(c, (b, a))

    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(-2, 2), st.floats(-2, 2),
        st.integers(2, 50), st.integers(2, 50),
    )
    def test_linearity_in_theta(self, table_small, alpha, beta, a, b):
        basis = hl_basis(table_small)
        t1 = np.array([1.0, 0.0, -1.0])
        t2 = np.array([0.0, 2.0, 1.0])
        mixed = CandidateConjecture(basis, alpha * t1 + beta * t2, np.ones(3))
        c1 = CandidateConjecture(basis, t1, np.ones(3))
        c2 = CandidateConjecture(basis, t2, np.ones(3))
        f_mixed, _ = eval_candidate(mixed, (a, b))
        f1, _ = eval_candidate(c1, (a, b))
        f2, _ = eval_candidate(c2, (a, b))
        assert f_mixed == pytest.approx(alpha * f1 + beta * f2, abs=1e-10)


class TestCanonicalDifference:
    def test_sign_convention_example(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        )
        assert np.array_equal(canonical_difference(c), [1.0, -1.0, 0.0])

    def test_dilation_invariance(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.array([1.0, 0.0, 0.5]), np.array([0.0, 1.0, 0.0])
        )
        scaled = apply_group_action(c, 7.0 * np.eye(2))
        assert canonical_difference(scaled) == pytest.approx(
            canonical_difference(c), abs=1e-12
        )

    def test_h_element_invariance(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.array([1.0, 0.0, 0.5]), np.array([0.0, 1.0, 0.0])
        )
        h = np.array([[2.0, 2.0], [1.0, 3.0]])
        assert canonical_difference(apply_group_action(c, h)) == pytest.approx(
            canonical_difference(c), abs=1e-10
        )

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.2, 3.0).flatmap(lambda x: st.sampled_from([x, -x])),
        st.floats(0.2, 3.0),
        st.floats(-3.0, 3.0),
    )
    def test_general_group_action_dedup(self, basis_200, a, b, c):
        cand = CandidateConjecture(
            basis_200, np.array([0.9, -0.3, 0.0]), np.array([0.1, 0.8, -0.2])
        )
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        moved = apply_group_action(cand, elem.entries)
        assert canonical_difference(moved) == pytest.approx(
            canonical_difference(cand), abs=1e-10
        )

    def test_zero_difference_degenerate(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])
        )
        with pytest.raises(DegenerateCandidateError):
            canonical_difference(c)

    def test_exact_key_is_rational(self, basis_200):
        c = CandidateConjecture(
            basis_200,
            np.array([0.5, 0.0, 0.0]),
            np.array([0.0, 0.5, 0.0]),
            exact_f=(Fraction(1, 2), Fraction(0), Fraction(0)),
            exact_g=(Fraction(0), Fraction(1, 2), Fraction(0)),
        )
        assert canonical_key(c) == "1,-1,0"


class TestSnapRational:
    def test_table_motivated_example(self):
        snapped, dist = snap_rational([0.4166667], 12)
        assert snapped == (Fraction(5, 12),)
        assert dist < 1e-6

    def test_half(self):
        assert snap_rational([0.5], 2)[0] == (Fraction(1, 2),)

    def test_scan_example(self):
        snapped, dist = snap_rational([0.120225], 12)
        assert snapped == (Fraction(1, 8),)
        assert dist == pytest.approx(0.004775, abs=1e-9)

    def test_bad_denominator(self):
        with pytest.raises(ValueError):
            snap_rational([0.5], 0)


class TestRenderParse:
    def test_hl_orientation(self, table_small):
        basis = FeatureBasis(
            (
                BasisFunction(combine="var-sum", hook="pi"),
                BasisFunction(combine="sym", exponents=((1, 1),), hook="pi"),
            ),
            d1=1, d2=1, variables=("a", "b"), pi=table_small,
        )
        c = CandidateConjecture(
            basis, np.array([0.0, 1.0]), np.array([1.0, 0.0]),
            relation="non-strict",
            exact_f=(Fraction(0), Fraction(1)),
            exact_g=(Fraction(1), Fraction(0)),
        )
        assert render(c) == "π(a+b) ≤ π(a)+π(b)"

    def test_zero_side_degenerate(self, basis_200):
        c = CandidateConjecture(
            basis_200, np.array([1.0, 0.0, 0.0]), np.zeros(3)
        )
        with pytest.raises(DegenerateCandidateError):
            render(c)

    def test_coefficient_two_verbatim(self, table_small):
        basis = FeatureBasis(
            (
                BasisFunction(combine="sym", exponents=((1, 1),), hook="pi"),
                BasisFunction(combine="const"),
            ),
            d1=1, d2=1, variables=("a", "b"), pi=table_small,
        )
        c = CandidateConjecture(
            basis, np.array([2.0, 0.0]), np.array([0.0, 9.0]),
            exact_f=(Fraction(2), Fraction(0)),
            exact_g=(Fraction(0), Fraction(9)),
        )
        text = render(c)
        assert "2·π(a+b)" in text
        assert text == "2·π(a+b) < 9"

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=12),
                 min_size=3, max_size=3),
        st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=12),
                 min_size=3, max_size=3),
    )
    def test_roundtrip_identity(self, table_small, ef, eg):
        if not any(ef) or not any(eg):
            return
        basis = hl_basis(table_small)
        c = CandidateConjecture(
            basis,
            np.array([float(x) for x in ef]),
            np.array([float(x) for x in eg]),
            relation="strict",
            exact_f=tuple(ef),
            exact_g=tuple(eg),
        )
        back = parse_candidate(render(c), basis)
        assert back.exact_f == c.exact_f
        assert back.exact_g == c.exact_g
        assert back.relation == c.relation
        assert render(back) == render(c)

    def test_negative_composite_coefficient_parenthesized(self, table_small):
        basis = hl_basis(table_small)
        c = CandidateConjecture(
            basis,
            np.array([-1.0, 0.0, 0.0]),
            np.array([0.0, 1.0, 0.0]),
            exact_f=(Fraction(-1), Fraction(0), Fraction(0)),
            exact_g=(Fraction(0), Fraction(1), Fraction(0)),
        )
        text = render(c)
        assert text.startswith("-(π(a)+π(b))")
        assert parse_candidate(text, basis).exact_f == c.exact_f


class TestSerialization:
    def test_basis_roundtrip(self, table_small):
        basis = hl_basis(table_small, basis_id="demo")
        doc = basis_to_dict(basis)
        back = basis_from_dict(json.loads(json.dumps(doc)), pi=table_small)
        assert back.labels() == basis.labels()
        assert back.basis_id == "demo"
        assert back == basis

    def test_candidate_record_roundtrip(self, basis_200):
        c = snap_candidate(
            CandidateConjecture(
                basis_200, np.array([0.41, 0.0, 0.0]), np.array([0.0, 0.52, 0.0])
            ),
            max_denominator=12,
        )
        rec = candidate_to_record(c)
        assert set(rec) == {
            "basis_id", "theta_f", "theta_g", "relation", "canonical_key", "text"
        }
        back = candidate_from_record(json.loads(json.dumps(rec)), basis_200)
        assert back.exact_f == c.exact_f
        assert back.exact_g == c.exact_g
        assert canonical_key(back) == rec["canonical_key"]


class TestExactFeatures:
    def test_integer_path_available(self, table_small):
        basis = hl_basis(table_small)
        ds = Dataset(("a", "b"), np.array([[2.0, 3.0], [4.0, 5.0]]), (True, True))
        phi = feature_matrix_exact(basis, ds)
        assert phi is not None and phi.dtype == np.int64
        assert np.array_equal(phi[0], [3, 3, 3])  # pi(2)+pi(3), pi(6), pi(5)

    def test_log_disables_integer_path(self, table_small):
        basis = FeatureBasis(
            (BasisFunction(combine="sym", outer="log"),),
            d1=1, d2=1, variables=("x",),
        )
        ds = Dataset(("x",), np.array([[2.0], [3.0]]), (True,))
        assert feature_matrix_exact(basis, ds) is None

    def test_max_hook_argument(self, table_small):
        basis = hl_basis(table_small)
        assert max_hook_argument(basis, [200, 200]) == 40000.0

    def test_feature_matrix_values(self, table_small):
        basis = hl_basis(table_small)
        phi = feature_matrix(basis, np.array([[2.0, 3.0]]))
        assert phi.tolist() == [[3.0, 3.0, 3.0]]  # 1+2, pi(6), pi(5)
