"""Synthetic spatiotemporal anomaly benchmark generator.

Normal activity is a random low-Tucker-rank tensor; anomalies are groups of
rectangular pulses planted on r-hop grid neighborhoods for d consecutive time
steps; white Gaussian noise is scaled exactly to a target SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import SpatialGraph, grid_graph, k_hop_neighborhood
from .tensors import frobenius_norm, mode_product

SNR_SIGNALS = ("x_plus_s", "x")


@dataclass(frozen=True)
class SynthConfig:
    shape: tuple[int, ...] = (40, 24, 7, 20)
    tucker_rank: tuple[int, ...] = (8, 8, 5, 5)
    grid: tuple[int, int] = (8, 5)
    location_mode: int = 1
    time_mode: int = 4
    radius: int = 2
    duration: int = 10
    groups: int = 450
    amplitude: float = 0.25
    snr_db: float = 10.0
    seed: int = 0
    random_sign: bool = False
    snr_signal: str = "x_plus_s"  # power reference for the noise scale

    def validate(self) -> None:
        n = len(self.shape)
        if len(self.tucker_rank) != n:
            raise ValueError("tucker_rank must have one entry per mode")
        if any(r < 1 or r > s for r, s in zip(self.tucker_rank, self.shape)):
            raise ValueError(f"tucker_rank {self.tucker_rank} incompatible with shape {self.shape}")
        for name, mode in (("location_mode", self.location_mode), ("time_mode", self.time_mode)):
            if not 1 <= mode <= n:
                raise ValueError(f"{name}={mode} out of range")
        if self.location_mode == self.time_mode:
            raise ValueError("location_mode and time_mode must differ")
        rows, cols = self.grid
        if rows * cols != self.shape[self.location_mode - 1]:
            raise ValueError(
                f"grid {rows}x{cols} does not cover the location mode of size "
                f"{self.shape[self.location_mode - 1]}"
            )
        if self.radius < 0 or self.groups < 0:
            raise ValueError("radius and groups must be >= 0")
        if not 1 <= self.duration <= self.shape[self.time_mode - 1]:
            raise ValueError("duration must lie in [1, time mode size]")
        if self.snr_signal not in SNR_SIGNALS:
            raise ValueError(f"snr_signal must be one of {SNR_SIGNALS}")


@dataclass
class LabeledDataset:
    y: np.ndarray
    labels: np.ndarray  # bool, true exactly where s_true != 0
    x_true: np.ndarray
    s_true: np.ndarray
    noise: np.ndarray
    group_centers: list[tuple[int, ...]]
    config: SynthConfig


def _random_low_rank(
    shape: tuple[int, ...], rank: tuple[int, ...], rng: np.random.Generator
) -> np.ndarray:
    """Tucker tensor from a standard-normal core and random orthonormal
    factors, rescaled to unit entry variance.

    Factor columns are drawn orthogonal to the all-ones vector whenever the
    rank leaves room, which zeroes the entry mean without disturbing the
    per-mode ranks (post-hoc centering would bump every rank by one).
    """
    core = rng.standard_normal(rank)
    x = core
    for mode, (size, r) in enumerate(zip(shape, rank), start=1):
        gauss = rng.standard_normal((size, r))
        if r < size:
            gauss -= gauss.mean(axis=0, keepdims=True)
        q, _ = np.linalg.qr(gauss)
        x = mode_product(x, q[:, :r], mode)
    std = float(x.std())
    if std > 0:
        x = x / std
    return x


def _pulse_window(center: int, duration: int, n_times: int) -> range:
    """Half-open 0-based window of ``duration`` steps centered (left-heavy)
    at ``center``, clipped to the axis."""
    start = center - duration // 2
    stop = center + (duration + 1) // 2
    return range(max(start, 0), min(stop, n_times))


def generate(cfg: SynthConfig) -> LabeledDataset:
    """Draw a labeled dataset ``y = x_true + s_true + noise``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    x = _random_low_rank(cfg.shape, cfg.tucker_rank, rng)

    graph = grid_graph(*cfg.grid)
    s = np.zeros(cfg.shape)
    loc_axis = cfg.location_mode - 1
    time_axis = cfg.time_mode - 1
    n_times = cfg.shape[time_axis]
    centers: list[tuple[int, ...]] = []
    for _ in range(cfg.groups):
        center = tuple(int(rng.integers(0, size)) for size in cfg.shape)
        centers.append(center)
        nodes = k_hop_neighborhood(graph, center[loc_axis], cfg.radius)
        window = _pulse_window(center[time_axis], cfg.duration, n_times)
        bump = cfg.amplitude
        if cfg.random_sign:
            bump *= 1.0 if rng.random() < 0.5 else -1.0
        idx = list(center)
        for node in nodes:
            idx[loc_axis] = node
            for t in window:
                idx[time_axis] = t
                s[tuple(idx)] += bump

    noise = rng.standard_normal(cfg.shape)
    signal = x + s if cfg.snr_signal == "x_plus_s" else x
    target_power = frobenius_norm(signal) ** 2 / (10.0 ** (cfg.snr_db / 10.0))
    raw_power = frobenius_norm(noise) ** 2
    noise *= np.sqrt(target_power / raw_power)

    return LabeledDataset(
        y=x + s + noise,
        labels=s != 0,
        x_true=x,
        s_true=s,
        noise=noise,
        group_centers=centers,
        config=cfg,
    )


def empirical_snr(x: np.ndarray, s: np.ndarray, e: np.ndarray) -> float:
    """Realized SNR in dB of a stored decomposition, 10*log10(|x+s|^2/|e|^2)."""
    if x.shape != s.shape or x.shape != e.shape:
        raise ValueError("component shapes must match")
    noise_power = frobenius_norm(e) ** 2
    if noise_power == 0:
        raise ValueError("noise component is identically zero")
    return 10.0 * np.log10(frobenius_norm(x + s) ** 2 / noise_power)
