"""Proximal operators for the ADMM sub-steps.

``soft_threshold`` is the elementwise l1 prox; ``svt`` (singular value
thresholding) is the nuclear-norm prox on matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Shrunk singular values below this are treated as exact zeros so that the
# reported rank is deterministic across BLAS backends.
RANK_EPS = 1e-12


def soft_threshold(x: np.ndarray, lam: float) -> np.ndarray:
    """sign(x) * max(|x| - lam, 0), elementwise."""
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


@dataclass(frozen=True)
class SvtResult:
    matrix: np.ndarray
    retained_rank: int
    singular_values_before: np.ndarray


def svt(m: np.ndarray, tau: float) -> SvtResult:
    """Soft-threshold the singular values of ``m`` by ``tau``."""
    if tau < 0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError("svt input contains non-finite entries")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    shrunk = np.maximum(s - tau, 0.0)
    shrunk[shrunk < RANK_EPS] = 0.0
    rank = int(np.count_nonzero(shrunk))
    out = (u[:, :rank] * shrunk[:rank]) @ vt[:rank] if rank else np.zeros_like(m)
    return SvtResult(matrix=out, retained_rank=rank, singular_values_before=s)
