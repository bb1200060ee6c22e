"""Statistical anomaly scoring of the estimated sparse tensor.

Each entry is modeled as Gaussian with moments pooled over the entry's k-hop
spatial neighborhood across all time blocks, weighted by spatiotemporal
similarity to the center node.  The negative log-likelihood is the anomaly
score; entries above the upper-alpha quantile are flagged.  The ABS baseline
scores by plain magnitude with the same thresholding.

Scoring internally permutes the tensor so the location mode comes first and
the time mode second; results are permuted back.  For a permuted tensor of
shape (I_1, I_2, I_3, ..., I_N), the mode-1 unfolding splits into I_2 column
blocks of width T_3 = I_3 * ... * I_N, block b being the slice i_2 = b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import SpatialGraph, k_hop_neighborhood
from .tensors import inverse_permutation, permute_modes, unfold

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ScoringConfig:
    spatial_graph: SpatialGraph
    k_hop: int = 1
    tau: float | None = None  # None: per-block median row distance
    alpha: float = 0.05
    sigma_floor: float = 1e-8
    location_mode: int = 1
    time_mode: int = 2
    block_local: bool = False

    def validate(self, shape: tuple[int, ...]) -> None:
        n = len(shape)
        if self.k_hop < 0:
            raise ValueError("k_hop must be >= 0")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")
        for name, mode in (("location_mode", self.location_mode), ("time_mode", self.time_mode)):
            if not 1 <= mode <= n:
                raise ValueError(f"{name}={mode} out of range for {n} modes")
        if self.location_mode == self.time_mode:
            raise ValueError("location_mode and time_mode must differ")
        if self.spatial_graph.n_nodes != shape[self.location_mode - 1]:
            raise ValueError(
                f"graph has {self.spatial_graph.n_nodes} nodes but mode "
                f"{self.location_mode} has size {shape[self.location_mode - 1]}"
            )


@dataclass
class NeighborhoodBlock:
    """One (center node, time block) window of the location-mode unfolding.

    ``matrix`` rows follow the k-hop neighborhood order (center first);
    ``augmented`` appends the immediate temporal neighbor blocks: none for
    the first block, the left neighbor only for the last, both otherwise.
    """

    center: int
    block_index: int  # 1-based
    nodes: list[int]
    matrix: np.ndarray
    augmented: np.ndarray
    weights: np.ndarray | None = None


def scoring_permutation(n_modes: int, location_mode: int, time_mode: int) -> tuple[int, ...]:
    """Mode order placing location first and time second, the rest in their
    original relative order."""
    rest = [m for m in range(1, n_modes + 1) if m not in (location_mode, time_mode)]
    return (location_mode, time_mode, *rest)


def extract_blocks(s_hat: np.ndarray, cfg: ScoringConfig) -> list[NeighborhoodBlock]:
    """All neighborhood blocks of ``s_hat`` (already permuted: location is
    mode 1, time is mode 2)."""
    if s_hat.ndim < 2:
        raise ValueError("scoring needs at least location and time modes")
    if cfg.spatial_graph.n_nodes != s_hat.shape[0]:
        raise ValueError(
            f"graph has {cfg.spatial_graph.n_nodes} nodes but mode 1 has size {s_hat.shape[0]}"
        )
    n_locations, n_blocks = s_hat.shape[0], s_hat.shape[1]
    t3 = int(np.prod(s_hat.shape[2:], dtype=np.int64)) if s_hat.ndim > 2 else 1
    flat = unfold(s_hat, 1).matrix  # zero-copy under C order

    blocks: list[NeighborhoodBlock] = []
    for s in range(n_locations):
        nodes = k_hop_neighborhood(cfg.spatial_graph, s, cfg.k_hop)
        rows = flat[nodes]
        for b in range(1, n_blocks + 1):
            window = rows[:, (b - 1) * t3 : b * t3]
            if n_blocks == 1 or b == 1:
                aug = window
            elif b == n_blocks:
                aug = rows[:, (b - 2) * t3 : b * t3]
            else:
                aug = rows[:, (b - 2) * t3 : (b + 1) * t3]
            blocks.append(
                NeighborhoodBlock(
                    center=s, block_index=b, nodes=nodes, matrix=window, augmented=aug
                )
            )
    return blocks


def block_weights(block: NeighborhoodBlock, tau: float) -> np.ndarray:
    """Gaussian similarity of each augmented row to the center row."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    diff = block.augmented - block.augmented[0]
    d2 = np.sum(diff * diff, axis=1)
    return np.exp(-d2 / (2.0 * tau * tau))


def _block_tau(block: NeighborhoodBlock, fallback: float) -> float:
    """Median pairwise row distance within the augmented block; ``fallback``
    when the block has a single row or the median degenerates to zero."""
    rows = block.augmented
    n = rows.shape[0]
    if n < 2:
        return fallback
    dists = [
        float(np.linalg.norm(rows[i] - rows[j])) for i in range(n) for j in range(i + 1, n)
    ]
    med = float(np.median(dists))
    return med if med > 0 else fallback


def _global_tau(blocks: list[NeighborhoodBlock]) -> float:
    dists: list[float] = []
    for block in blocks:
        rows = block.augmented
        for i in range(rows.shape[0]):
            for j in range(i + 1, rows.shape[0]):
                dists.append(float(np.linalg.norm(rows[i] - rows[j])))
    if not dists:
        return 1.0
    med = float(np.median(dists))
    return med if med > 0 else 1.0


def location_moments(
    blocks: list[NeighborhoodBlock],
    weights: list[np.ndarray],
    sigma_floor: float,
) -> tuple[float, float]:
    """Weighted mean and variance pooled over the given blocks; the variance
    is clamped below at ``sigma_floor**2``."""
    if not blocks:
        raise ValueError("at least one block is required")
    t3 = blocks[0].matrix.shape[1]
    first = second = wsum = 0.0
    for block, w in zip(blocks, weights):
        first += float(w @ block.matrix.sum(axis=1))
        second += float(w @ (block.matrix * block.matrix).sum(axis=1))
        wsum += float(np.sum(np.abs(w)))
    scale = t3 * wsum
    mu = first / scale
    var = second / scale - mu * mu
    return mu, max(var, sigma_floor * sigma_floor)


@dataclass
class ScoreField:
    """Per-entry anomaly scores with the quantile threshold and flags.

    ``mu`` and ``sigma`` (NLL only) are indexed in the permuted orientation:
    location first, time second.  For the default pooled model they have one
    entry per location; with ``block_local`` one entry per (location, block).
    """

    scores: np.ndarray
    method: str
    gamma: float
    flags: np.ndarray
    mu: np.ndarray | None = None
    sigma: np.ndarray | None = None

    def sidecar(self, cfg: ScoringConfig | None = None, alpha: float | None = None) -> dict:
        meta = {"method": self.method, "gamma": self.gamma}
        if cfg is not None:
            meta.update(
                {
                    "alpha": cfg.alpha,
                    "k_hop": cfg.k_hop,
                    "tau": cfg.tau,
                    "sigma_floor": cfg.sigma_floor,
                }
            )
        elif alpha is not None:
            meta["alpha"] = alpha
        return meta


def threshold(scores: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
    """Upper-alpha quantile cut: gamma is the ceil(alpha*T)-th largest score
    and every score >= gamma is flagged."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    flat = np.asarray(scores, dtype=np.float64).ravel()
    if flat.size == 0:
        raise ValueError("cannot threshold an empty score set")
    rank = math.ceil(alpha * flat.size)
    gamma = float(np.sort(flat)[::-1][rank - 1])
    return gamma, scores >= gamma


def nll_scores(s_hat: np.ndarray, cfg: ScoringConfig) -> ScoreField:
    """Gaussian negative log-likelihood scores of every entry of ``s_hat``."""
    cfg.validate(s_hat.shape)
    order = scoring_permutation(s_hat.ndim, cfg.location_mode, cfg.time_mode)
    work = permute_modes(s_hat, order) if s_hat.ndim > 1 else s_hat.reshape(-1, 1)

    blocks = extract_blocks(work, cfg)
    fallback = cfg.tau if cfg.tau is not None else _global_tau(blocks)
    for block in blocks:
        tau = cfg.tau if cfg.tau is not None else _block_tau(block, fallback)
        block.weights = block_weights(block, tau)

    n_locations, n_blocks = work.shape[0], work.shape[1]
    per_loc = [blocks[s * n_blocks : (s + 1) * n_blocks] for s in range(n_locations)]
    scores_p = np.empty_like(work)
    if cfg.block_local:
        mu = np.empty((n_locations, n_blocks))
        sigma = np.empty((n_locations, n_blocks))
        for s in range(n_locations):
            for b, block in enumerate(per_loc[s]):
                m, var = location_moments([block], [block.weights], cfg.sigma_floor)
                mu[s, b] = m
                sigma[s, b] = math.sqrt(var)
                idx = (s, b) + (slice(None),) * (work.ndim - 2)
                z = (work[idx] - m) / sigma[s, b]
                scores_p[idx] = math.log(sigma[s, b]) + 0.5 * LOG_2PI + 0.5 * z * z
    else:
        mu = np.empty(n_locations)
        sigma = np.empty(n_locations)
        for s in range(n_locations):
            chunk = per_loc[s]
            m, var = location_moments(chunk, [b.weights for b in chunk], cfg.sigma_floor)
            mu[s] = m
            sigma[s] = math.sqrt(var)
            z = (work[s] - m) / sigma[s]
            scores_p[s] = math.log(sigma[s]) + 0.5 * LOG_2PI + 0.5 * z * z

    scores = (
        permute_modes(scores_p, inverse_permutation(order))
        if s_hat.ndim > 1
        else scores_p.reshape(s_hat.shape)
    )
    gamma, flags = threshold(scores, cfg.alpha)
    return ScoreField(
        scores=scores, method="nll", gamma=gamma, flags=flags, mu=mu, sigma=sigma
    )


def abs_scores(s_hat: np.ndarray, alpha: float = 0.05) -> ScoreField:
    """Magnitude scores |s| with the same quantile thresholding as NLL."""
    scores = np.abs(s_hat)
    gamma, flags = threshold(scores, alpha)
    return ScoreField(scores=scores, method="abs", gamma=gamma, flags=flags)
