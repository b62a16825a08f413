import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conjgen.errors import NotInGroupError
from conjgen.group_algebra import (
    ConjugatedParams,
    DilationParam,
    FunctionPair,
    GroupElement,
    HParams,
    abc_from_mat,
    act,
    decompose_TH,
    fixed_point_witness,
    is_in_G,
    is_in_H,
    is_in_J1,
    is_in_J2,
    is_in_T,
    mat_from_abc,
    mat_from_dilation,
    mat_from_h,
    pair_norm,
    smooth_p_grid,
    write_p_grid_csv,
)

nonzero_a = st.floats(0.2, 3.0).flatmap(
    lambda x: st.sampled_from([x, -x])
)
pos_b = st.floats(0.2, 3.0)
any_c = st.floats(-3.0, 3.0)


class TestMatFromAbc:
    def test_identity_case(self):
        m = mat_from_abc(ConjugatedParams(0.5, 0.5, 0.0))
        assert np.allclose(m.entries, np.eye(2))

    def test_expansion_examples(self):
        m = mat_from_abc(ConjugatedParams(1.0, 0.5, 0.0))
        assert np.allclose(m.entries, [[1.5, 0.5], [0.5, 1.5]])
        m = mat_from_abc(ConjugatedParams(1.0, 1.0, 1.0))
        assert np.allclose(m.entries, [[1.0, 1.0], [-1.0, 3.0]])

    def test_rejects_bad_parameters(self):
        with pytest.raises(NotInGroupError):
            ConjugatedParams(0.0, 1.0, 0.0)
        with pytest.raises(NotInGroupError):
            ConjugatedParams(1.0, -1.0, 0.0)
        with pytest.raises(NotInGroupError):
            ConjugatedParams(1.0, 0.0, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(nonzero_a, pos_b, any_c)
    def test_matches_triple_product(self, a, b, c):
        left = np.array([[1.0, -1.0], [1.0, 1.0]])
        mid = np.array([[a, c], [0.0, b]])
        right = np.array([[1.0, 1.0], [-1.0, 1.0]])
        m = mat_from_abc(ConjugatedParams(a, b, c))
        assert np.allclose(m.entries, left @ mid @ right)


class TestAbcFromMat:
    def test_identity(self):
        p = abc_from_mat(GroupElement.from_matrix(np.eye(2)))
        assert (p.a, p.b, p.c) == (0.5, 0.5, 0.0)

    def test_simple_member(self):
        p = abc_from_mat(GroupElement.from_matrix([[1.5, 0.5], [0.5, 1.5]]))
        assert (p.a, p.b, p.c) == pytest.approx((1.0, 0.5, 0.0), abs=1e-14)

    def test_swap_matrix_rejected(self):
        with pytest.raises(NotInGroupError):
            abc_from_mat(GroupElement.from_matrix([[0.0, 1.0], [1.0, 0.0]]))

    @settings(max_examples=150, deadline=None)
    @given(nonzero_a, pos_b, any_c)
    def test_roundtrip_within_1e12(self, a, b, c):
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        p = abc_from_mat(elem)
        rebuilt = mat_from_abc(p)
        assert np.max(np.abs(rebuilt.entries - elem.entries)) < 1e-12


class TestMembership:
    def test_h_example_with_det_trace_identity(self):
        e = GroupElement.from_matrix([[2.0, 2.0], [1.0, 3.0]])
        assert is_in_H(e)
        assert 1.0 + e.det == pytest.approx(np.trace(e.entries))

    def test_scalar_matrix_memberships(self):
        e = GroupElement.from_matrix([[3.0, 0.0], [0.0, 3.0]])
        assert is_in_T(e) and is_in_G(e) and is_in_J1(e)
        assert not is_in_J2(e)
        p = abc_from_mat(e)
        assert (p.a, p.b, p.c) == pytest.approx((1.5, 1.5, 0.0))

    def test_reflection_in_none(self):
        e = GroupElement.from_matrix([[1.0, 0.0], [0.0, -1.0]])
        assert not (is_in_T(e) or is_in_H(e) or is_in_G(e)
                    or is_in_J1(e) or is_in_J2(e))

    def test_singular_matrix_rejected_at_construction(self):
        with pytest.raises(NotInGroupError):
            GroupElement.from_matrix([[1.0, 2.0], [2.0, 4.0]])


class TestDecomposition:
    @pytest.mark.parametrize(
        "matrix,lam,p,q",
        [
            (np.eye(2), 1.0, 1.0, 1.0),
            ([[1.5, 0.5], [0.5, 1.5]], 1.0, 1.5, 1.5),
            ([[1.0, 1.0], [-1.0, 3.0]], 2.0, 0.5, 1.5),
        ],
    )
    def test_examples(self, matrix, lam, p, q):
        dil, h = decompose_TH(GroupElement.from_matrix(matrix))
        assert dil.scale == pytest.approx(lam, abs=1e-14)
        assert (h.p, h.q) == pytest.approx((p, q), abs=1e-14)

    def test_not_in_g_error(self):
        with pytest.raises(NotInGroupError):
            decompose_TH(GroupElement.from_matrix([[0.0, 1.0], [1.0, 0.0]]))

    @settings(max_examples=150, deadline=None)
    @given(nonzero_a, pos_b, any_c)
    def test_product_reproduces_and_unique(self, a, b, c):
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        dil, h = decompose_TH(elem)
        rebuilt = mat_from_dilation(dil) @ mat_from_h(h)
        assert np.max(np.abs(rebuilt.entries - elem.entries)) < 1e-12
        dil2, h2 = decompose_TH(rebuilt)
        assert abs(dil2.scale - dil.scale) < 1e-12
        assert abs(h2.p - h.p) < 1e-12 and abs(h2.q - h.q) < 1e-12


class TestAction:
    def test_identity_leaves_pair(self):
        pair = FunctionPair.from_values([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
        out = act(GroupElement.from_matrix(np.eye(2)), pair)
        assert np.array_equal(out.f, pair.f) and np.array_equal(out.g, pair.g)

    def test_dilation_doubles_difference(self):
        x = np.array([0.0, 1.0, 2.0])
        pair = FunctionPair.from_values(x, x + 1.0)
        out = act(GroupElement.from_matrix(2.0 * np.eye(2)), pair)
        assert np.allclose(out.f, 2 * x)
        assert np.allclose(out.g, 2 * x + 2)
        assert np.allclose(out.difference(), 2.0 * pair.difference())

    def test_h_preserves_difference(self):
        e = GroupElement.from_matrix([[2.0, 2.0], [1.0, 3.0]])
        pair = FunctionPair.from_values([0.3, -1.0, 4.0], [0.6, 0.0, 4.5])
        out = act(e, pair)
        assert np.allclose(out.difference(), pair.difference(), atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(nonzero_a, pos_b, any_c)
    def test_g_scales_difference_by_2b(self, a, b, c):
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        f = np.linspace(-1, 1, 5)
        pair = FunctionPair.from_values(f, f + 0.7)
        out = act(elem, pair)
        assert out.in_cone()
        assert np.max(np.abs(out.difference() - 2 * b * pair.difference())) < 1e-10

    def test_minus_identity_breaks_cone(self):
        pair = FunctionPair.from_values([0.0], [1.0])
        out = act(GroupElement.from_matrix(-np.eye(2)), pair)
        assert not out.in_cone()


class TestFixedPointWitness:
    def test_witness_example(self):
        elem = mat_from_abc(ConjugatedParams(1.0, 0.5, 1.0))
        pair = fixed_point_witness(elem, num_samples=4)
        assert np.allclose(pair.f, -1.5) and np.allclose(pair.g, -0.5)
        moved = act(elem, pair)
        assert np.max(np.abs(moved.f - pair.f)) < 1e-12
        assert np.max(np.abs(moved.g - pair.g)) < 1e-12
        assert np.allclose(pair.difference(), 1.0)

    def test_none_when_2a_is_1(self):
        assert fixed_point_witness(mat_from_abc(ConjugatedParams(0.5, 0.5, 1.0))) is None

    def test_none_when_2b_not_1(self):
        assert fixed_point_witness(mat_from_abc(ConjugatedParams(1.0, 1.0, 0.0))) is None

    def test_identity_rejected(self):
        with pytest.raises(ValueError):
            fixed_point_witness(GroupElement.from_matrix(np.eye(2)))


class TestPairNorm:
    def test_zero_pair(self):
        assert pair_norm(FunctionPair.from_values([0.0, 0.0], [0.0, 0.0])) == 0.0

    def test_sup_example(self):
        x = np.array([-1.0, 0.0, 2.0])
        assert pair_norm(FunctionPair.from_values(x, -x)) == 4.0

    def test_homogeneity(self):
        pair = FunctionPair.from_values([1.0, -2.0], [0.5, 3.0])
        scaled = FunctionPair.from_values(2.5 * pair.f, 2.5 * pair.g)
        assert pair_norm(scaled) == pytest.approx(2.5 * pair_norm(pair))

    def test_empty_samples_error(self):
        with pytest.raises(ValueError):
            pair_norm(FunctionPair.from_values([], []))


class TestSmoothPGrid:
    def test_sharp_limits(self):
        grid = {(round(a), round(b)): p for a, b, p in
                smooth_p_grid((-1, 1), (-1, 1), 3, sharpness=1000.0)}
        assert grid[(1, 1)] == pytest.approx(0.0, abs=1e-6)
        assert grid[(0, 1)] == pytest.approx(1.0, abs=1e-6)
        assert grid[(1, -1)] == pytest.approx(2.0, abs=1e-6)

    def test_row_major_in_a_then_b(self):
        grid = smooth_p_grid((0, 1), (10, 11), 2, sharpness=1.0)
        assert np.array_equal(grid[:, 0], [0, 0, 1, 1])
        assert np.array_equal(grid[:, 1], [10, 11, 10, 11])

    def test_validation(self):
        with pytest.raises(ValueError):
            smooth_p_grid((0, 1), (0, 1), 1, 1.0)
        with pytest.raises(ValueError):
            smooth_p_grid((0, 1), (0, 1), 4, 0.0)

    def test_csv_header(self, tmp_path):
        path = tmp_path / "grid.csv"
        write_p_grid_csv(path, smooth_p_grid((0, 1), (0, 1), 2, 1.0))
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b,p"
        assert len(lines) == 5


class TestSubgroupStructure:
    def test_t_intersect_j2_is_identity(self):
        # dilations other than the identity have a = b = lambda/2 != 1/2
        for lam in (0.5, 2.0, 3.7):
            elem = mat_from_dilation(DilationParam(lam))
            assert is_in_J2(elem) == (lam == 1.0)

    def test_t_inside_j1(self):
        for lam in (0.5, 1.0, 2.0):
            assert is_in_J1(mat_from_dilation(DilationParam(lam)))

    def test_h_does_not_act_freely(self):
        # an upper-triangular-style member fixes (f, 0); its abc has 2b = 1
        q = 3.0
        elem = GroupElement.from_matrix([[1.0, q - 1.0], [0.0, q]])
        assert is_in_H(elem)
        params = abc_from_mat(elem)
        assert 2 * params.b == pytest.approx(1.0)
        assert fixed_point_witness(elem) is not None

    def test_hparams_validation(self):
        with pytest.raises(NotInGroupError):
            HParams(0.5, 0.5)
        with pytest.raises(NotInGroupError):
            DilationParam(0.0)
