"""System parameters and large-scale fading profiles.

The system is a two-hop decode-and-forward relay network: K source users
transmit to a relay with N receive antennas, and the relay forwards to K
destination users through M transmit antennas. A full-duplex relay does both
at once and suffers self-interference between its arrays; a half-duplex relay
alternates and pays a rate prelog of one half instead.

All powers stored here are linear (not dB). Conversions from dB happen at the
command-line boundary in :mod:`rsrelay.experiments`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DUPLEX_MODES = ("FD", "HD")
STRATEGIES = ("RS", "NoRS")
CSIT_MODES = ("perfect", "imperfect")

# Minimum user-relay distance in meters. Keeps the power-law pathloss bounded
# when a user lands on top of the relay.
D_MIN_M = 35.0


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters shared by every stage of the pipeline.

    Attributes:
        K: number of source-destination pairs.
        N: relay receive antennas.
        M: relay transmit antennas.
        T: coherence block length in channel uses.
        tau: pilot symbols per coherence block. Orthogonal training for both
            user groups requires tau >= 2K.
        p_tr: per-pilot transmit power (linear).
        rho: data SNR (linear). Used as both the per-source transmit power and
            the relay power budget.
        sigma2_SI: per-entry variance of the relay self-interference channel.
        duplex_mode: "FD" or "HD".
        strategy: "RS" (second hop splits messages into a shared common part
            plus private parts) or "NoRS" (private parts only).
        alpha_SR: receive-filter regularizer. None means "track 1/rho".
        alpha_RD: precoder regularizer. None means "track 1/rho".
        csit_mode: "perfect" (estimates equal the true channels) or
            "imperfect" (MMSE estimation from pilots).
    """

    K: int = 4
    N: int = 20
    M: int = 20
    T: int = 500
    tau: int = 8
    p_tr: float = 10.0 ** 0.2  # 2 dB
    rho: float = 100.0
    sigma2_SI: float = 1.0
    duplex_mode: str = "FD"
    strategy: str = "RS"
    alpha_SR: float | None = None
    alpha_RD: float | None = None
    csit_mode: str = "imperfect"

    def __post_init__(self) -> None:
        for name in ("K", "N", "M", "T", "tau"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.tau < 2 * self.K:
            raise ValueError(
                f"tau = {self.tau} is too short for orthogonal training of "
                f"2K = {2 * self.K} users"
            )
        if self.tau >= self.T:
            raise ValueError(f"tau = {self.tau} must be smaller than T = {self.T}")
        for name in ("p_tr", "rho", "sigma2_SI"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if self.duplex_mode not in DUPLEX_MODES:
            raise ValueError(f"duplex_mode must be one of {DUPLEX_MODES}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.csit_mode not in CSIT_MODES:
            raise ValueError(f"csit_mode must be one of {CSIT_MODES}")
        for name in ("alpha_SR", "alpha_RD"):
            value = getattr(self, name)
            if value is not None and (not np.isfinite(value) or value <= 0):
                raise ValueError(f"{name} must be positive and finite when given")

    def _resolve_alpha(self, value: float | None, name: str) -> float:
        if value is not None:
            return float(value)
        if self.rho <= 0:
            raise ValueError(
                f"{name} defaults to 1/rho but rho = {self.rho}; set it explicitly"
            )
        return 1.0 / self.rho

    @property
    def alpha_SR_eff(self) -> float:
        """Receive-filter regularizer with the 1/rho default resolved."""
        return self._resolve_alpha(self.alpha_SR, "alpha_SR")

    @property
    def alpha_RD_eff(self) -> float:
        """Precoder regularizer with the 1/rho default resolved."""
        return self._resolve_alpha(self.alpha_RD, "alpha_RD")


@dataclass(frozen=True)
class LargeScaleProfile:
    """Per-user large-scale channel gains for both hops.

    beta_SR[k] is the per-entry variance of source k's channel to the relay
    receive array; beta_RD[k] the same for the relay transmit array towards
    destination k.
    """

    beta_SR: np.ndarray
    beta_RD: np.ndarray

    def __post_init__(self) -> None:
        for name in ("beta_SR", "beta_RD"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be a 1-D vector")
            if arr.size == 0:
                raise ValueError(f"{name} must not be empty")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} entries must be positive and finite")
            object.__setattr__(self, name, arr)
        if self.beta_SR.shape != self.beta_RD.shape:
            raise ValueError("beta_SR and beta_RD must have the same length")

    @property
    def K(self) -> int:
        return self.beta_SR.size


def pathloss_beta(d_m: float, s_dB: float) -> float:
    """Large-scale gain at distance ``d_m`` meters with shadowing ``s_dB``.

    beta = 10^((s_dB - 15.3)/10) * d_m^(-3.76)

    Strictly decreasing in distance, strictly increasing in shadowing.
    """
    if d_m <= 0:
        raise ValueError(f"distance must be positive, got {d_m}")
    return 10.0 ** ((s_dB - 15.3) / 10.0) * float(d_m) ** -3.76


def draw_topology(
    cfg: SystemConfig,
    seed,
    disk_diameter_m: float = 1000.0,
    shadow_var_dB2: float = 3.16,
    d_min_m: float = D_MIN_M,
) -> LargeScaleProfile:
    """Draw user positions uniformly on a disk centered on the relay.

    Only the distance to the relay matters for the gains, so angles are not
    drawn. Radii follow the area-uniform law r = R*sqrt(u) and are clamped
    below at ``d_min_m``. Log-normal shadowing has variance ``shadow_var_dB2``
    in dB^2. Deterministic for a fixed seed.
    """
    if disk_diameter_m <= 0:
        raise ValueError("disk_diameter_m must be positive")
    if shadow_var_dB2 < 0:
        raise ValueError("shadow_var_dB2 must be >= 0")
    rng = np.random.default_rng(seed)
    radius = disk_diameter_m / 2.0
    shadow_std = float(np.sqrt(shadow_var_dB2))

    def _one_group() -> np.ndarray:
        d = radius * np.sqrt(rng.uniform(size=cfg.K))
        d = np.maximum(d, d_min_m)
        s = rng.normal(0.0, shadow_std, size=cfg.K) if shadow_std > 0 else np.zeros(cfg.K)
        return np.array([pathloss_beta(di, si) for di, si in zip(d, s)])

    beta_SR = _one_group()
    beta_RD = _one_group()
    return LargeScaleProfile(beta_SR=beta_SR, beta_RD=beta_RD)


def uniform_profile(cfg: SystemConfig, beta: float) -> LargeScaleProfile:
    """All 2K large-scale gains equal to ``beta``. Used for controlled runs."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return LargeScaleProfile(
        beta_SR=np.full(cfg.K, float(beta)),
        beta_RD=np.full(cfg.K, float(beta)),
    )
