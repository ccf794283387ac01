"""Relay receive filters, transmit precoders, and the power split.

Everything here is built from channel estimates only. The receive side uses
an MMSE filter per source stream; the transmit side uses regularized
zero-forcing for the private streams plus, under rate splitting, a single
common-stream precoder matched to the weakest users. The long-term scaling
lambda holds the average transmit power of the private precoder at K, so the
per-stream powers rho*t/K and the common power rho*(1-t) always add up to the
relay budget rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import SystemConfig


def mmse_decoder(Ghat_SR: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Columnwise MMSE receive filters, W = (Ghat Ghat^H + N*alpha*I)^-1 Ghat.

    Returns an (N, K) matrix whose column k is the filter for source k.
    """
    n_rx = Ghat_SR.shape[0]
    gram = Ghat_SR @ Ghat_SR.conj().T
    gram[np.diag_indices(n_rx)] += n_rx * cfg.alpha_SR_eff
    return np.linalg.solve(gram, Ghat_SR)


def rzf_precoder_unnormalized(Ghat_RD: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Regularized zero-forcing directions, F0 = (Ghat Ghat^H + M*alpha*I)^-1 Ghat."""
    n_tx = Ghat_RD.shape[0]
    gram = Ghat_RD @ Ghat_RD.conj().T
    gram[np.diag_indices(n_tx)] += n_tx * cfg.alpha_RD_eff
    return np.linalg.solve(gram, Ghat_RD)


def lambda_normalization(f0_draws: Iterable[np.ndarray]) -> float:
    """Long-term power scaling lambda = K / E[tr F0^H F0].

    ``f0_draws`` yields unnormalized precoders from independent channel
    draws; the expectation is their sample mean. With F = sqrt(lambda)*F0 the
    average of tr F^H F over the same draws is exactly K.
    """
    total = 0.0
    count = 0
    n_streams = None
    for f0 in f0_draws:
        if n_streams is None:
            n_streams = f0.shape[1]
        elif f0.shape[1] != n_streams:
            raise ValueError("precoder draws disagree on the number of streams")
        total += float(np.sum(np.abs(f0) ** 2))
        count += 1
    if count == 0:
        raise ValueError("lambda_normalization needs at least one draw")
    mean_power = total / count
    if not np.isfinite(mean_power) or mean_power <= 0:
        raise ValueError("zero-power precoder")
    return n_streams / mean_power


def alpha_from_q(q_weights: np.ndarray, sigma2_RD: np.ndarray, M: int) -> np.ndarray:
    """Common-precoder combining weights from the per-user SINR weights q.

    alpha_k^2 is proportional to 1/(q_k * sigma2_k^2) and the weights satisfy
    sum_k alpha_k^2 = 1/M, which pre-balances the common-stream gains so the
    weakest users are favored.
    """
    q = np.asarray(q_weights, dtype=float)
    s2 = np.asarray(sigma2_RD, dtype=float)
    if np.any(q <= 0) or not np.all(np.isfinite(q)):
        raise ValueError("degenerate common-message weight")
    if np.any(s2 <= 0):
        raise ValueError("common precoding requires positive estimate variances")
    inv = 1.0 / (q * s2**2)
    return np.sqrt(inv / (M * np.sum(inv)))


def common_precoder(
    Ghat_RD: np.ndarray, sigma2_RD: np.ndarray, q_weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm common-stream precoder in the span of the estimates.

    Returns (f_c, alpha_weights) where f_c = normalize(Ghat_RD @ alpha).
    """
    n_tx = Ghat_RD.shape[0]
    alpha = alpha_from_q(q_weights, sigma2_RD, n_tx)
    direction = Ghat_RD @ alpha
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ValueError("zero-power precoder")
    return direction / norm, alpha


def power_split(cfg: SystemConfig, Ybar: float) -> float:
    """Fraction t of the relay budget spent on private streams.

    t = min(K / (rho * Ybar), 1), the point where the private streams leave
    their interference-limited regime. NoRS always uses t = 1; so do the
    low-power limit rho -> 0 and the interference-free single-pair case
    Ybar = 0.
    """
    if not np.isfinite(Ybar) or Ybar < 0:
        raise ValueError(f"Ybar must be >= 0 and finite, got {Ybar}")
    if cfg.strategy == "NoRS":
        return 1.0
    loading = cfg.rho * Ybar
    if loading <= cfg.K:
        return 1.0
    return cfg.K / loading


@dataclass(frozen=True)
class TransceiverSet:
    """Filters, precoders, and powers for one channel-estimate realization.

    f_c and alpha_weights are None under NoRS. lambda_value is the long-term
    scaling already applied to F; rho_private = rho*t/K and
    rho_common = rho*(1-t) are the per-stream transmit powers.
    """

    W: np.ndarray
    F: np.ndarray
    f_c: np.ndarray | None
    alpha_weights: np.ndarray | None
    lambda_value: float
    t: float
    rho_private: float
    rho_common: float


def build_transceivers(
    est,
    cfg: SystemConfig,
    lambda_value: float,
    t: float,
    q_weights: np.ndarray | None = None,
) -> TransceiverSet:
    """Assemble the per-realization transceivers from estimates.

    ``lambda_value`` and ``t`` are long-term quantities computed once per
    operating point, not per realization. RS requires ``q_weights``.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    W = mmse_decoder(est.Ghat_SR, cfg)
    F = np.sqrt(lambda_value) * rzf_precoder_unnormalized(est.Ghat_RD, cfg)
    f_c = None
    alpha = None
    if cfg.strategy == "RS":
        if q_weights is None:
            raise ValueError("RS needs q_weights for the common precoder")
        f_c, alpha = common_precoder(est.Ghat_RD, est.sigma2_RD, q_weights)
    return TransceiverSet(
        W=W,
        F=F,
        f_c=f_c,
        alpha_weights=alpha,
        lambda_value=float(lambda_value),
        t=float(t),
        rho_private=cfg.rho * t / cfg.K,
        rho_common=cfg.rho * (1.0 - t),
    )
