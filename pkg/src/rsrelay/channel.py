"""Channel realizations, MMSE estimation, and binary fixtures.

All small-scale fading is circularly symmetric complex Gaussian. A column
G[:, k] collects user k's coefficients; its per-entry variance is the user's
large-scale gain. The relay self-interference channel G_RR (receive array x
transmit array, N x M) has i.i.d. entries of variance sigma2_SI and exists
only in full-duplex mode.

Estimation uses orthogonal pilots, so each user's channel is estimated
independently. The per-entry MMSE coefficient for a user with gain beta is

    c = tau*p_tr*beta / (tau*p_tr*beta + 1),

giving the estimate Ghat[:, k] = c*G[:, k] + (c/sqrt(tau*p_tr))*n_k with n_k
standard complex Gaussian. The estimate has per-entry variance
sigma2 = tau*p_tr*beta^2/(tau*p_tr*beta + 1) and is independent of the error
E = G - Ghat, whose per-entry variance is beta - sigma2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import LargeScaleProfile, SystemConfig

FIXTURE_MAGIC = "rsrelay-fixture v1"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _cn_matrix(rng: np.random.Generator, rows: int, cols: int, var) -> np.ndarray:
    """Complex Gaussian matrix with per-column variances ``var``."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    real = rng.standard_normal((rows, cols))
    imag = rng.standard_normal((rows, cols))
    return (real + 1j * imag) * scale


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every channel in the network.

    G_SR: (N, K) source-to-relay. G_RD: (M, K) relay-to-destination, stored
    unconjugated; hop-two receive values are G_RD[:, k]^H applied to the
    transmit vector. G_RR: (N, M) self-interference, all zeros when
    sigma2_SI = 0 or in half-duplex mode.
    """

    G_SR: np.ndarray
    G_RD: np.ndarray
    G_RR: np.ndarray
    profile: LargeScaleProfile


def draw_channels(cfg: SystemConfig, profile: LargeScaleProfile, seed) -> ChannelSet:
    """Draw one independent channel realization.

    The draw order G_SR, G_RD, G_RR is fixed so that runs with equal seeds
    share the user channels even when the self-interference settings differ.
    """
    if profile.K != cfg.K:
        raise ValueError(f"profile has K = {profile.K}, config has K = {cfg.K}")
    rng = _rng(seed)
    G_SR = _cn_matrix(rng, cfg.N, cfg.K, profile.beta_SR)
    G_RD = _cn_matrix(rng, cfg.M, cfg.K, profile.beta_RD)
    if cfg.duplex_mode == "FD" and cfg.sigma2_SI > 0:
        G_RR = _cn_matrix(rng, cfg.N, cfg.M, cfg.sigma2_SI)
    else:
        G_RR = np.zeros((cfg.N, cfg.M), dtype=complex)
    return ChannelSet(G_SR=G_SR, G_RD=G_RD, G_RR=G_RR, profile=profile)


def estimation_variance(beta, tau: int, p_tr: float):
    """Per-entry variance of the MMSE channel estimate.

    sigma2 = tau*p_tr*beta^2 / (tau*p_tr*beta + 1). Vectorizes over beta.
    Approaches beta as tau*p_tr grows and 0 as it vanishes.
    """
    tp = float(tau) * float(p_tr)
    beta = np.asarray(beta, dtype=float)
    out = tp * beta**2 / (tp * beta + 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EstimationResult:
    """MMSE estimates for both user-side channels.

    Ghat_* are the estimates, E_* = G_* - Ghat_* the estimation errors, and
    sigma2_* the per-user estimate variances. The self-interference channel is
    not estimated; transceivers never see it.
    """

    Ghat_SR: np.ndarray
    Ghat_RD: np.ndarray
    E_SR: np.ndarray
    E_RD: np.ndarray
    sigma2_SR: np.ndarray
    sigma2_RD: np.ndarray


def _estimate_one(G: np.ndarray, beta: np.ndarray, tau: int, p_tr: float, rng):
    tp = float(tau) * float(p_tr)
    c = tp * beta / (tp * beta + 1.0)
    noise = _cn_matrix(rng, G.shape[0], G.shape[1], np.ones_like(beta))
    Ghat = G * c + noise * (c / np.sqrt(tp))
    return Ghat


def mmse_estimate(channels: ChannelSet, cfg: SystemConfig, seed) -> EstimationResult:
    """Estimate both hops' channels from orthogonal pilot observations.

    In "perfect" CSIT mode the estimates equal the true channels and the
    errors are exactly zero. Estimation noise is drawn from ``seed``,
    independently of the channel realization; G_SR noise is drawn first.
    """
    beta_SR = channels.profile.beta_SR
    beta_RD = channels.profile.beta_RD
    if cfg.csit_mode == "perfect":
        return EstimationResult(
            Ghat_SR=channels.G_SR.copy(),
            Ghat_RD=channels.G_RD.copy(),
            E_SR=np.zeros_like(channels.G_SR),
            E_RD=np.zeros_like(channels.G_RD),
            sigma2_SR=beta_SR.copy(),
            sigma2_RD=beta_RD.copy(),
        )
    if cfg.p_tr <= 0:
        raise ValueError("imperfect CSIT requires p_tr > 0")
    rng = _rng(seed)
    Ghat_SR = _estimate_one(channels.G_SR, beta_SR, cfg.tau, cfg.p_tr, rng)
    Ghat_RD = _estimate_one(channels.G_RD, beta_RD, cfg.tau, cfg.p_tr, rng)
    return EstimationResult(
        Ghat_SR=Ghat_SR,
        Ghat_RD=Ghat_RD,
        E_SR=channels.G_SR - Ghat_SR,
        E_RD=channels.G_RD - Ghat_RD,
        sigma2_SR=np.asarray(estimation_variance(beta_SR, cfg.tau, cfg.p_tr)),
        sigma2_RD=np.asarray(estimation_variance(beta_RD, cfg.tau, cfg.p_tr)),
    )


def dump_fixture(path, arrays: dict[str, np.ndarray]) -> None:
    """Write named complex matrices to a binary fixture file.

    Layout: an ASCII magic line ``rsrelay-fixture v1 <count>``, then per
    array a header line ``<name> <rows> <cols>`` followed by the complex
    entries in row-major order as interleaved little-endian 64-bit float
    pairs (real, imaginary). Bit-exact across platforms.
    """
    items = []
    for name, arr in arrays.items():
        if " " in name or "\n" in name or not name:
            raise ValueError(f"invalid fixture array name {name!r}")
        a = np.asarray(arr, dtype=complex)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError(f"fixture arrays must be 1-D or 2-D, got shape {arr.shape}")
        items.append((name, a))
    with open(path, "wb") as fh:
        fh.write(f"{FIXTURE_MAGIC} {len(items)}\n".encode("ascii"))
        for name, a in items:
            fh.write(f"{name} {a.shape[0]} {a.shape[1]}\n".encode("ascii"))
            flat = np.ascontiguousarray(a).ravel()
            pairs = np.empty(2 * flat.size, dtype="<f8")
            pairs[0::2] = flat.real
            pairs[1::2] = flat.imag
            fh.write(pairs.tobytes())


def load_fixture(path) -> dict[str, np.ndarray]:
    """Read a fixture written by :func:`dump_fixture`."""
    arrays: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        magic = fh.readline().decode("ascii").strip()
        parts = magic.rsplit(" ", 1)
        if len(parts) != 2 or parts[0] != FIXTURE_MAGIC:
            raise ValueError(f"not a fixture file: bad magic {magic!r}")
        count = int(parts[1])
        for _ in range(count):
            header = fh.readline().decode("ascii").split()
            if len(header) != 3:
                raise ValueError(f"corrupt fixture header {header!r}")
            name, rows, cols = header[0], int(header[1]), int(header[2])
            raw = fh.read(16 * rows * cols)
            if len(raw) != 16 * rows * cols:
                raise ValueError(f"fixture truncated while reading {name!r}")
            pairs = np.frombuffer(raw, dtype="<f8")
            arrays[name] = (pairs[0::2] + 1j * pairs[1::2]).reshape(rows, cols)
    return arrays
