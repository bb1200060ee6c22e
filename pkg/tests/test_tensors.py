"""Tensor algebra tests against independent index-arithmetic oracles."""

import itertools

import numpy as np
import pytest

from tensoranom.tensors import (
    ModeUnfolding,
    axpy,
    fold,
    fold_matrix,
    frobenius_norm,
    hadamard,
    inner,
    inverse_permutation,
    l1_norm,
    lp_norm,
    mode_product,
    permute_modes,
    unfold,
)


def unfold_oracle(x: np.ndarray, mode: int) -> np.ndarray:
    """Column-by-column enumeration of the mode-n unfolding.

    Columns run lexicographically over the remaining modes in increasing mode
    order, lowest remaining mode most significant.  Written directly from the
    index arithmetic, no reshapes.
    """
    axis = mode - 1
    rest = [i for i in range(x.ndim) if i != axis]
    rest_sizes = [x.shape[i] for i in rest]
    n_cols = int(np.prod(rest_sizes)) if rest_sizes else 1
    out = np.empty((x.shape[axis], n_cols))
    for col, combo in enumerate(itertools.product(*[range(s) for s in rest_sizes])):
        for r in range(x.shape[axis]):
            idx = [0] * x.ndim
            idx[axis] = r
            for pos, val in zip(rest, combo):
                idx[pos] = val
            out[r, col] = x[tuple(idx)]
    return out


def test_unfold_shape_224():
    x = np.arange(8.0).reshape(2, 2, 2)
    assert unfold(x, 1).matrix.shape == (2, 4)


def test_unfold_234_frozen_values():
    # shape (2,3,4) filled 1..24, mode-2 unfolding, frozen from the enumerator
    x = np.arange(1.0, 25.0).reshape(2, 3, 4)
    expected = np.array(
        [
            [1, 2, 3, 4, 13, 14, 15, 16],
            [5, 6, 7, 8, 17, 18, 19, 20],
            [9, 10, 11, 12, 21, 22, 23, 24],
        ],
        dtype=float,
    )
    np.testing.assert_array_equal(unfold(x, 2).matrix, expected)
    np.testing.assert_array_equal(unfold_oracle(x, 2), expected)


@pytest.mark.parametrize("shape", [(3,), (2, 5), (2, 3, 4), (3, 4, 2, 5), (2, 2, 3, 2, 2)])
def test_unfold_matches_enumerator(shape):
    rng = np.random.default_rng(42)
    x = rng.standard_normal(shape)
    for mode in range(1, len(shape) + 1):
        np.testing.assert_array_equal(unfold(x, mode).matrix, unfold_oracle(x, mode))


@pytest.mark.parametrize("shape", [(4,), (3, 4), (3, 4, 2, 5), (2, 1, 3, 1, 2)])
def test_fold_unfold_round_trip(shape):
    rng = np.random.default_rng(7)
    x = rng.standard_normal(shape)
    for mode in range(1, len(shape) + 1):
        np.testing.assert_array_equal(fold(unfold(x, mode)), x)


def test_fold_scalarish():
    m = ModeUnfolding(mode=1, shape=(1, 1), matrix=np.array([[3.5]]))
    np.testing.assert_array_equal(fold(m), np.array([[3.5]]))


def test_unfold_mode_out_of_range():
    x = np.zeros((2, 2))
    with pytest.raises(ValueError):
        unfold(x, 0)
    with pytest.raises(ValueError):
        unfold(x, 3)


def test_fold_inconsistent_shape():
    m = unfold(np.zeros((2, 3)), 1)
    with pytest.raises(ValueError):
        fold(m, (3, 3))


def test_mode1_unfolding_column_blocks_are_time_slices():
    # columns (b-1)*T3 .. b*T3 of the mode-1 unfolding equal the slice i_2 = b
    rng = np.random.default_rng(3)
    x = rng.standard_normal((4, 3, 2, 5))
    t3 = 2 * 5
    mat = unfold(x, 1).matrix
    for b in range(3):
        np.testing.assert_array_equal(
            mat[:, b * t3 : (b + 1) * t3], x[:, b].reshape(4, t3)
        )


def test_mode_product_identity_and_zero():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4, 2))
    for mode in range(1, 4):
        np.testing.assert_array_equal(mode_product(x, np.eye(x.shape[mode - 1]), mode), x)
    z = mode_product(x, np.zeros((5, 4)), 2)
    assert z.shape == (3, 5, 2)
    np.testing.assert_array_equal(z, np.zeros((3, 5, 2)))


def test_mode_product_matches_matrix_multiply():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((3, 4))  # matrix as a 2-mode tensor
    u = rng.standard_normal((2, 3))
    np.testing.assert_allclose(mode_product(x, u, 1), u @ x, atol=1e-14)


def test_mode_product_equals_fold_of_unfolding_product():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((3, 4, 2, 5))
    for mode in range(1, 5):
        u = rng.standard_normal((6, x.shape[mode - 1]))
        new_shape = list(x.shape)
        new_shape[mode - 1] = 6
        via_unfold = fold_matrix(u @ unfold(x, mode).matrix, mode, new_shape)
        np.testing.assert_allclose(mode_product(x, u, mode), via_unfold, atol=1e-12)


def test_mode_product_dimension_mismatch():
    with pytest.raises(ValueError):
        mode_product(np.zeros((3, 4)), np.zeros((2, 5)), 1)


def test_norms_trivial():
    z = np.zeros((3, 4))
    for p in (1.0, 2.0, 3.5):
        assert lp_norm(z, p) == 0.0
    ones = np.ones((2, 3, 4))
    assert lp_norm(ones, 2) == pytest.approx(np.sqrt(24))
    assert frobenius_norm(ones) == pytest.approx(np.sqrt(24))
    assert l1_norm(ones) == 24.0


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(ValueError):
        lp_norm(np.ones(3), 0.5)


def test_frobenius_equals_singular_value_energy():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((4, 3, 5))
    for mode in range(1, 4):
        sv = np.linalg.svd(unfold(x, mode).matrix, compute_uv=False)
        assert frobenius_norm(x) ** 2 == pytest.approx(np.sum(sv**2), rel=1e-12)


def test_inner_hadamard_axpy():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 4, 2))
    b = rng.standard_normal((3, 4, 2))
    assert inner(a, a) == pytest.approx(frobenius_norm(a) ** 2, rel=1e-13)
    assert inner(a, b) == pytest.approx(float(a.ravel() @ b.ravel()), rel=1e-13)
    np.testing.assert_array_equal(hadamard(a, np.ones_like(a)), a)
    np.testing.assert_allclose(axpy(2.5, a, b), 2.5 * a + b, atol=1e-14)
    with pytest.raises(ValueError):
        inner(a, np.zeros((2, 2)))


def test_permute_modes_identity_and_inverse():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((2, 3, 4))
    np.testing.assert_array_equal(permute_modes(x, (1, 2, 3)), x)
    order = (3, 1, 2)
    np.testing.assert_array_equal(
        permute_modes(permute_modes(x, order), inverse_permutation(order)), x
    )


def test_permute_modes_index_oracle():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((2, 3, 4))
    y = permute_modes(x, (3, 1, 2))
    assert y.shape == (4, 2, 3)
    for i in range(2):
        for j in range(3):
            for k in range(4):
                assert y[k, i, j] == x[i, j, k]


def test_permute_modes_rejects_non_permutation():
    with pytest.raises(ValueError):
        permute_modes(np.zeros((2, 2)), (1, 1))


def test_frobenius_invariant_under_permute_and_fold():
    rng = np.random.default_rng(12)
    x = rng.standard_normal((3, 2, 4, 2))
    assert frobenius_norm(permute_modes(x, (4, 2, 1, 3))) == pytest.approx(
        frobenius_norm(x), rel=1e-14
    )
    for mode in range(1, 5):
        assert frobenius_norm(unfold(x, mode).matrix) == pytest.approx(
            frobenius_norm(x), rel=1e-14
        )


def test_unfold_of_mode_product_is_matrix_product():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((3, 4, 5))
    u = rng.standard_normal((6, 4))
    left = unfold(mode_product(x, u, 2), 2).matrix
    right = u @ unfold(x, 2).matrix
    np.testing.assert_allclose(left, right, atol=1e-12)
