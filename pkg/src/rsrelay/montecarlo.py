"""Monte-Carlo sum rates over channel and estimation-noise draws.

Each draw realizes the channels, estimates them, builds the transceivers,
and evaluates the exact instantaneous SINRs against the true channels. Rates
are ergodic: the arithmetic mean of per-draw rates.

The long-term quantities (power scaling lambda, power split t, common-stream
weights q) do not change per draw. They are computed once per operating
point: t and q from the deterministic equivalents, lambda from its own
Monte-Carlo average over a dedicated draw stream, so the rate draws stay
independent of it.

Seed discipline: a root SeedSequence spawns (lambda_stream, draws_stream);
draw i spawns its own (channel, estimation) pair. The layout never depends on
strategy, duplex mode, or CSIT mode, so runs that share a seed share their
randomness and differ only through the settings under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import deteq
from .channel import ChannelSet, draw_channels, mmse_estimate
from .config import LargeScaleProfile, SystemConfig
from .transceiver import (
    TransceiverSet,
    build_transceivers,
    lambda_normalization,
    power_split,
    rzf_precoder_unnormalized,
)


def sinr_first_hop(channels: ChannelSet, W: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Instantaneous receive SINR of every source stream at the relay.

    gamma_k = rho*|w_k^H g_k|^2 / (rho*sum_{j != k} |w_k^H g_j|^2
              + ||w_k^H G_RR||^2 + ||w_k||^2).

    The self-interference term carries no rho factor: the relay transmit
    signal has unit per-stream power by construction, and G_RR already holds
    the residual-loop gain. Invariant to rescaling any single column of W.
    """
    cross = W.conj().T @ channels.G_SR  # cross[k, j] = w_k^H g_j
    powers = np.abs(cross) ** 2
    desired = cfg.rho * np.diag(powers)
    interference = cfg.rho * (powers.sum(axis=1) - np.diag(powers))
    noise = np.sum(np.abs(W) ** 2, axis=0)
    si = np.zeros(cfg.K)
    if cfg.duplex_mode == "FD":
        si = np.sum(np.abs(W.conj().T @ channels.G_RR) ** 2, axis=1)
    return desired / (interference + si + noise)


def sinr_second_hop_private(
    channels: ChannelSet, F: np.ndarray, cfg: SystemConfig, t: float
) -> np.ndarray:
    """Instantaneous private-stream SINR at every destination.

    gamma_k = (rho*t/K)*|g_k^H f_k|^2
              / ((rho*t/K)*sum_{j != k} |g_k^H f_j|^2 + 1).
    """
    rk = cfg.rho * t / cfg.K
    cross = channels.G_RD.conj().T @ F  # cross[k, j] = g_k^H f_j
    powers = np.abs(cross) ** 2
    desired = rk * np.diag(powers)
    interference = rk * (powers.sum(axis=1) - np.diag(powers))
    return desired / (interference + 1.0)


def sinr_second_hop_common(
    channels: ChannelSet, F: np.ndarray, f_c: np.ndarray, cfg: SystemConfig, t: float
) -> tuple[np.ndarray, float]:
    """Instantaneous common-stream SINRs and their minimum over users.

    The common stream is decoded first, so all K private streams count as
    interference: gamma_k = rho*(1-t)*|g_k^H f_c|^2
    / ((rho*t/K)*sum_j |g_k^H f_j|^2 + 1).
    """
    rho_c = cfg.rho * (1.0 - t)
    rk = cfg.rho * t / cfg.K
    received = np.abs(channels.G_RD.conj().T @ f_c) ** 2
    leak = rk * np.sum(np.abs(channels.G_RD.conj().T @ F) ** 2, axis=1)
    gamma = rho_c * received / (leak + 1.0)
    return gamma, float(np.min(gamma))


def prelog(cfg: SystemConfig) -> float:
    """Rate prefactor: training overhead, halved again under half duplex."""
    base = (cfg.T - cfg.tau) / cfg.T
    return base / 2.0 if cfg.duplex_mode == "HD" else base


def rates_from_sinrs(gamma_sr, gamma_p, gamma_c_min: float, cfg: SystemConfig):
    """Map SINRs to rates in bit/s/Hz: prelog * log2(1 + gamma)."""
    pl = prelog(cfg)
    r_sr = pl * np.log2(1.0 + np.asarray(gamma_sr, dtype=float))
    r_p = pl * np.log2(1.0 + np.asarray(gamma_p, dtype=float))
    r_c = pl * float(np.log2(1.0 + gamma_c_min))
    return r_sr, r_p, r_c


def end_to_end(r_sr, r_rd_private, r_c: float, K: int) -> np.ndarray:
    """Decode-and-forward end-to-end rate per pair.

    Each user recovers r_rd_private plus an equal 1/K share of the common
    rate on the second hop; the relay must have decoded the stream first, so
    the pair rate is the minimum of the two hops.
    """
    return np.minimum(np.asarray(r_sr), np.asarray(r_rd_private) + r_c / K)


@dataclass(frozen=True)
class RateReport:
    """Per-user and aggregate rates plus the run's bookkeeping.

    For Monte-Carlo runs every field is a mean over draws; deterministic
    reports carry seed -1 and n_draws 0 in ``meta``.
    """

    R_SR: np.ndarray
    R_RD_private: np.ndarray
    R_c: float
    R_end2end: np.ndarray
    sum_rate: float
    meta: dict


@dataclass(frozen=True)
class LongTermState:
    """Operating point shared by all draws of one run."""

    lambda_value: float
    t: float
    Ybar: float
    q_weights: np.ndarray | None


def long_term_state(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    n_lambda: int,
    lambda_seed,
) -> LongTermState:
    """Fix lambda, t, and q for an operating point.

    t and q come from the deterministic equivalents (they are long-term
    quantities by definition); lambda is averaged over ``n_lambda``
    independent draws from ``lambda_seed``.
    """
    if n_lambda <= 0:
        raise ValueError("n_lambda must be positive")
    _, sigma2_RD = deteq.estimate_variances(cfg, profile)
    Q = deteq.de_Q(cfg, sigma2_RD, profile.beta_RD)
    ybar = deteq.de_ybar(cfg, sigma2_RD, deteq.de_lambda_bar(cfg, sigma2_RD), Q)
    t = power_split(cfg, ybar)
    q = None
    if cfg.strategy == "RS":
        q = deteq.q_weights_de(cfg, sigma2_RD, profile.beta_RD)

    root = lambda_seed if isinstance(lambda_seed, np.random.SeedSequence) else (
        np.random.SeedSequence(lambda_seed)
    )
    children = root.spawn(n_lambda)

    def _draws():
        for child in children:
            chan_ss, est_ss = child.spawn(2)
            channels = draw_channels(cfg, profile, chan_ss)
            est = mmse_estimate(channels, cfg, est_ss)
            yield rzf_precoder_unnormalized(est.Ghat_RD, cfg)

    lam = lambda_normalization(_draws())
    return LongTermState(lambda_value=lam, t=t, Ybar=ybar, q_weights=q)


def draw_rates(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    state: LongTermState,
    draw_seed,
) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    """Rates of a single draw: (R_SR, R_RD_private, R_c, R_end2end)."""
    seed = draw_seed if isinstance(draw_seed, np.random.SeedSequence) else (
        np.random.SeedSequence(draw_seed)
    )
    chan_ss, est_ss = seed.spawn(2)
    channels = draw_channels(cfg, profile, chan_ss)
    est = mmse_estimate(channels, cfg, est_ss)
    tx: TransceiverSet = build_transceivers(
        est, cfg, state.lambda_value, state.t, state.q_weights
    )
    gamma_sr = sinr_first_hop(channels, tx.W, cfg)
    gamma_p = sinr_second_hop_private(channels, tx.F, cfg, tx.t)
    gamma_c_min = 0.0
    if cfg.strategy == "RS":
        _, gamma_c_min = sinr_second_hop_common(channels, tx.F, tx.f_c, cfg, tx.t)
    r_sr, r_p, r_c = rates_from_sinrs(gamma_sr, gamma_p, gamma_c_min, cfg)
    return r_sr, r_p, r_c, end_to_end(r_sr, r_p, r_c, cfg.K)


def mc_rate_draws(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    n_draws: int,
    seed: int,
    n_lambda: int = 500,
) -> tuple[dict[str, np.ndarray], LongTermState]:
    """Per-draw rate arrays for ``n_draws`` independent realizations.

    Returns ({"R_SR": (n, K), "R_RD_private": (n, K), "R_c": (n,),
    "R_end2end": (n, K), "sum_rate": (n,)}, state).
    """
    if n_draws <= 0:
        raise ValueError("n_draws must be positive")
    if profile.K != cfg.K:
        raise ValueError(f"profile has K = {profile.K}, config has K = {cfg.K}")
    root = np.random.SeedSequence(seed)
    lambda_ss, draws_ss = root.spawn(2)
    state = long_term_state(cfg, profile, n_lambda, lambda_ss)
    r_sr = np.empty((n_draws, cfg.K))
    r_p = np.empty((n_draws, cfg.K))
    r_c = np.empty(n_draws)
    r_e2e = np.empty((n_draws, cfg.K))
    for i, child in enumerate(draws_ss.spawn(n_draws)):
        r_sr[i], r_p[i], r_c[i], r_e2e[i] = draw_rates(cfg, profile, state, child)
    return (
        {
            "R_SR": r_sr,
            "R_RD_private": r_p,
            "R_c": r_c,
            "R_end2end": r_e2e,
            "sum_rate": r_e2e.sum(axis=1),
        },
        state,
    )


def mc_sum_rate(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    n_draws: int,
    seed: int,
    n_lambda: int = 500,
) -> RateReport:
    """Ergodic rate report averaged over ``n_draws`` realizations."""
    draws, state = mc_rate_draws(cfg, profile, n_draws, seed, n_lambda)
    r_e2e = draws["R_end2end"].mean(axis=0)
    meta = {
        "source": "mc",
        "seed": int(seed),
        "n_draws": int(n_draws),
        "n_lambda": int(n_lambda),
        "t": state.t,
        "lambda": state.lambda_value,
        "Ybar": state.Ybar,
        "config": cfg,
    }
    return RateReport(
        R_SR=draws["R_SR"].mean(axis=0),
        R_RD_private=draws["R_RD_private"].mean(axis=0),
        R_c=float(draws["R_c"].mean()),
        R_end2end=r_e2e,
        sum_rate=float(r_e2e.sum()),
        meta=meta,
    )
