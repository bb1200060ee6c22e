"""Dense N-mode tensor operations: unfolding, folding, mode products, norms.

Tensors are plain ``numpy.ndarray`` values in float64, stored C-contiguously
(lexicographic order, mode 1 most significant).  Modes are numbered 1..N
throughout, matching the usual tensor-algebra convention.

Unfolding convention: the mode-n unfolding has the mode-n fibers as columns,
with the remaining modes enumerated in increasing mode order and the lowest
remaining mode most significant.  Under C-order storage this makes the mode-1
unfolding a zero-copy reshape, and the columns ``(b-1)*T3 .. b*T3`` of the
mode-1 unfolding are exactly the slice ``i_2 = b`` of the tensor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_tensor(values, shape=None) -> np.ndarray:
    """Coerce ``values`` to a float64 C-contiguous tensor, reshaping if asked."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if shape is not None:
        arr = arr.reshape(tuple(shape))
    if arr.ndim < 1:
        arr = arr.reshape(1)
    return arr


def _check_mode(x: np.ndarray, mode: int) -> None:
    if not 1 <= mode <= x.ndim:
        raise ValueError(f"mode {mode} out of range for a {x.ndim}-mode tensor")


@dataclass(frozen=True)
class ModeUnfolding:
    """A mode-n unfolding together with the metadata needed to fold it back."""

    mode: int
    shape: tuple[int, ...]
    matrix: np.ndarray


def unfold(x: np.ndarray, mode: int) -> ModeUnfolding:
    """Unfold ``x`` along ``mode`` (1-based).

    Row r of the result is indexed by i_mode = r; columns run over the
    remaining modes in increasing order, lowest remaining mode most
    significant.
    """
    _check_mode(x, mode)
    mat = np.moveaxis(x, mode - 1, 0).reshape(x.shape[mode - 1], -1)
    return ModeUnfolding(mode=mode, shape=tuple(x.shape), matrix=mat)


def fold(m: ModeUnfolding, shape=None) -> np.ndarray:
    """Exact inverse of :func:`unfold`."""
    shape = tuple(shape) if shape is not None else m.shape
    mode = m.mode
    if not 1 <= mode <= len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    lead = shape[mode - 1]
    rest = tuple(s for i, s in enumerate(shape) if i != mode - 1)
    if m.matrix.shape != (lead, int(np.prod(rest, dtype=np.int64)) if rest else 1):
        raise ValueError(
            f"matrix shape {m.matrix.shape} inconsistent with mode {mode} of shape {shape}"
        )
    return np.moveaxis(m.matrix.reshape((lead,) + rest), 0, mode - 1)


def fold_matrix(matrix: np.ndarray, mode: int, shape) -> np.ndarray:
    """Fold a bare matrix given the target tensor ``shape``."""
    return fold(ModeUnfolding(mode=mode, shape=tuple(shape), matrix=matrix))


def mode_product(x: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n product ``x ×_mode u``; replaces I_mode by the row count of u."""
    _check_mode(x, mode)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != x.shape[mode - 1]:
        raise ValueError(
            f"matrix of shape {u.shape} cannot multiply mode {mode} of size {x.shape[mode - 1]}"
        )
    return np.moveaxis(np.tensordot(u, x, axes=(1, mode - 1)), 0, mode - 1)


def frobenius_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(x).ravel()))


def l1_norm(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x)))


def lp_norm(x: np.ndarray, p: float) -> float:
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius inner product (sum of elementwise products)."""
    _check_same_shape(a, b)
    return float(np.dot(np.asarray(a).ravel(), np.asarray(b).ravel()))


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return a * b


def axpy(alpha: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``alpha * a + b``."""
    _check_same_shape(a, b)
    return alpha * a + b


def permute_modes(x: np.ndarray, order) -> np.ndarray:
    """Reorder modes so the result's k-th mode is ``order[k]`` (1-based).

    ``permute_modes(x, inverse_permutation(order))`` restores ``x``.
    """
    order = tuple(order)
    if sorted(order) != list(range(1, x.ndim + 1)):
        raise ValueError(f"{order} is not a permutation of modes 1..{x.ndim}")
    return np.transpose(x, axes=[o - 1 for o in order])


def inverse_permutation(order) -> tuple[int, ...]:
    """Inverse of a 1-based mode permutation."""
    order = tuple(order)
    inv = [0] * len(order)
    for pos, o in enumerate(order):
        inv[o - 1] = pos + 1
    return tuple(inv)
