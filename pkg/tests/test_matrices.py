import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cotlar.errors import ArgumentError, DimensionError, DomainError
from cotlar.matrices import (
    FAMILIES,
    build_matrix,
    decompose_hilbert,
    euclidean_norm,
    matrix_from_json,
    matrix_to_json,
    riesz_multiplier_defect,
    verify_structure,
)

vectors4 = hnp.arrays(float, 4, elements=st.floats(-1e3, 1e3))


def test_small_matrices_explicit():
    assert build_matrix("H2").tolist() == [[0, 1], [-1, 0]]
    assert build_matrix("A0").tolist() == [[1, 0], [0, -1]]
    assert build_matrix("B0").tolist() == [[0, -1], [-1, 0]]
    assert build_matrix("AB_pair_A", [1, 2], 3).tolist() == [[1, 0, 0], [0, -1, 0], [0, 0, 0]]
    assert build_matrix("AB_pair_B", [1, 2], 3).tolist() == [[0, -1, 0], [-1, 0, 0], [0, 0, 0]]
    assert build_matrix("H4_j", [1]).tolist() == [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    assert build_matrix("H4_j", [2]).tolist() == [[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]]
    assert build_matrix("H4_j", [3]).tolist() == [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]


@pytest.mark.parametrize("n", range(1, 17))
def test_h2n_is_cotlar_with_unit_norm(n):
    rep = verify_structure(build_matrix("H2n", dim=2 * n))
    assert rep.cotlar and rep.skew and rep.square_is_minus_identity
    assert abs(rep.euclidean_norm - 1.0) <= 1e-10


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_h2n_quadratic_form_and_isometry(n, seed):
    a = build_matrix("H2n", dim=2 * n)
    v = np.random.default_rng(seed).standard_normal(2 * n)
    assert abs(a @ v @ v) <= 1e-12 * (v @ v)
    assert abs(np.linalg.norm(a @ v) - np.linalg.norm(v)) <= 1e-10


def test_h4_family():
    h4 = [build_matrix("H4_j", [j]) for j in (1, 2, 3)]
    for i in range(3):
        assert verify_structure(h4[i]).cotlar
        for j in range(3):
            if i != j:
                assert verify_structure(h4[i], h4[j]).mutual_orthogonality
    assert np.array_equal(h4[0], build_matrix("Rj", [1], 4) + build_matrix("Rjk_tilde", [2, 3], 4))


def test_printed_sign_of_h4_3_inner_block_breaks_orthogonality():
    # flipping the inner block keeps the Cotlar property but not orthogonality to H4^1
    other = build_matrix("H4_j", [3]).copy()
    other[1, 2], other[2, 1] = -other[1, 2], -other[2, 1]
    assert verify_structure(other).cotlar
    assert not verify_structure(build_matrix("H4_j", [1]), other).mutual_orthogonality


@given(vectors4)
def test_h4_pairwise_orthogonal_images(v):
    h4 = [build_matrix("H4_j", [j]) for j in (1, 2, 3)]
    scale = max(1.0, float(v @ v))
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs((h4[i] @ v) @ (h4[j] @ v)) <= 1e-12 * scale


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_decompose_hilbert_sums_to_h2n(n):
    assert np.array_equal(sum(decompose_hilbert(n)), build_matrix("H2n", dim=2 * n))


def test_ab_pairs_conformal():
    for d in range(2, 9):
        for j in range(1, d):
            for k in range(j + 1, d + 1):
                a, b = build_matrix("AB_pair_A", [j, k], d), build_matrix("AB_pair_B", [j, k], d)
                rep = verify_structure(a, b)
                assert rep.conformal_pair
                assert abs(rep.euclidean_norm - 1) < 1e-10 and abs(rep.partner_norm - 1) < 1e-10


@given(st.integers(3, 9), st.data())
def test_half_decompositions(dim, data):
    j = data.draw(st.integers(1, dim - 1))
    k = data.draw(st.integers(1, dim - 1).filter(lambda x: x != j))
    assert np.array_equal(build_matrix("Rj", [j], dim), build_matrix("Rj_half1", [j], dim) + build_matrix("Rj_half2", [j], dim))
    assert np.array_equal(build_matrix("Rjk", [j, k], dim),
                          build_matrix("Rjk_half1", [j, k], dim) + build_matrix("Rjk_half2", [j, k], dim))


def test_a0_b0_pair():
    a0, b0 = build_matrix("A0"), build_matrix("B0")
    assert verify_structure(a0, b0).conformal_pair
    assert abs(euclidean_norm(a0 + 1j * b0) - 2.0) <= 1e-10
    assert verify_structure(np.eye(2), build_matrix("H2")).conformal_pair


def test_cm_blocks():
    c = build_matrix("C_full", dim=6)
    assert np.array_equal(c, sum(build_matrix("Cm", [m], 6) for m in (1, 2, 3)))
    assert np.array_equal(c[:2, :2], build_matrix("A0") + 1j * build_matrix("B0"))
    assert verify_structure(c.real, c.imag).conformal_pair


@given(hnp.arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_euclidean_norm_matches_svd(a):
    assert euclidean_norm(a, rtol=1e-14) == pytest.approx(np.linalg.norm(a, 2), rel=1e-6, abs=1e-12)


def test_verify_structure_rejects_non_skew():
    rep = verify_structure(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert not rep.skew and not rep.cotlar
    skew = np.array([[0.0, 2.0], [-2.0, 0.0]])
    rep = verify_structure(skew)
    assert rep.skew and not rep.cotlar


def test_riesz_defect():
    assert riesz_multiplier_defect(1, [0.3], [0.7]) == 0
    assert riesz_multiplier_defect(1, [0.3], [-0.7]) == 0
    assert abs(riesz_multiplier_defect(1, [0.3, 1.1], [-0.8, 0.4])) > 1e-3
    with pytest.raises(DomainError):
        riesz_multiplier_defect(1, [1.0, 0.0], [-1.0, 0.0])
    with pytest.raises(ArgumentError):
        riesz_multiplier_defect(3, [1.0, 0.0], [1.0, 0.0])


@pytest.mark.parametrize("family", FAMILIES)
def test_json_roundtrip(family):
    params = {"H4_j": [2], "Rj": [1], "Rj_half1": [1], "Rj_half2": [1], "Cm": [1]}.get(family)
    if params is None:
        params = [1, 2] if family.startswith(("Rjk", "AB_")) else []
    dim = {"H2": None, "H4_j": None, "A0": None, "B0": None}.get(family, 4)
    a = build_matrix(family, params, dim)
    assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)


def test_build_errors():
    with pytest.raises(ArgumentError):
        build_matrix("H8")
    with pytest.raises(DimensionError):
        build_matrix("H2n", dim=3)
    with pytest.raises(DimensionError):
        build_matrix("H2", dim=3)
    with pytest.raises(ArgumentError):
        build_matrix("H4_j", [4])
    with pytest.raises(ArgumentError):
        build_matrix("Rjk", [2, 2], 4)
    with pytest.raises(ArgumentError):
        build_matrix("Rj", [4], 4)
    with pytest.raises(ArgumentError):
        verify_structure(np.zeros((2, 3)))
