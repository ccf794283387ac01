"""Large-system deterministic equivalents of the Monte-Carlo rates.

In the regime where the antenna counts and the user count grow together, the
random SINRs concentrate around deterministic limits that depend only on the
large-scale gains. Everything in this module reduces to one scalar fixed
point per hop,

    delta_k = c_k * t,    t = 1 / ((1/n) * sum_j c_j / (1 + delta_j) + alpha),

where c collects the estimate variances of the hop, n is the array size, and
alpha is the regularizer of the filter on that hop. The derivative solver
propagates a perturbation of the regularizer through the same fixed point; it
yields the trace densities (called Z on the first hop and t' on the second)
that price noise, estimation error, and self-interference in the SINR
denominators.

Term mapping used by the first-hop SINR:
  desired      rho * delta^2/(1+delta)^2, plus the own-channel estimation
               error rho*(beta_k - sigma2_k)*Z_k, which the receive filter
               cannot separate from the desired symbol and which is measured
               as signal by the Monte-Carlo oracle;
  noise        Z_k;
  self-int.    M*sigma2_SI*Z_k (full duplex only);
  interference rho * sum_{j != k} Z_k*[(beta_j - sigma2_j)
               + sigma2_j/(1+delta_j)^2].

Second hop, with lambda_bar the long-term power scaling and
rk = rho*t/K the per-stream power: the matrix Q prices stream j's leakage
onto user k through J_jk = lambda_bar*Q_jk/(M*(1+delta_k)^2), the private
SINR keeps only the coherent part of the self term in its numerator, and the
common stream is received with the deterministic gain
alpha_k^2*M*sigma_k^4/sbar + beta_k, sbar = sum_j alpha_j^2*sigma_j^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import estimation_variance
from .config import LargeScaleProfile, SystemConfig
from .transceiver import alpha_from_q, power_split


@dataclass(frozen=True)
class FixedPointSolution:
    """Converged fixed point: delta = c * t_scalar elementwise.

    ``residual`` is the scaled map residual max|map(delta) - delta| /
    (1 + max|delta|) at the returned point; it is at most the solver
    tolerance.
    """

    delta: np.ndarray
    t_scalar: float
    residual: float
    iterations: int


def solve_fixed_point(
    c, n: int, alpha: float, tol: float = 1e-12, max_iter: int = 10000
) -> FixedPointSolution:
    """Solve delta_k = c_k / ((1/n) sum_j c_j/(1+delta_j) + alpha).

    Damped iteration on the scalar t (the map keeps delta = c*t exactly, so
    iterating t is the same fixed point with one unknown). The scaled
    stopping rule tolerates the float64 plateau that an absolute rule hits
    when alpha is small and delta is of order 1/alpha.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1:
        raise ValueError("c must be a 1-D vector")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError("c entries must be finite and >= 0")
    if n <= 0:
        raise ValueError("n must be positive")
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValueError("alpha must be positive and finite")
    if c.size == 0:
        return FixedPointSolution(
            delta=c.copy(), t_scalar=1.0 / alpha, residual=0.0, iterations=0
        )

    t = 1.0 / alpha
    for iteration in range(1, max_iter + 1):
        delta = c * t
        t_new = 1.0 / (float(np.sum(c / (1.0 + delta))) / n + alpha)
        delta_new = c * t_new
        residual = float(np.max(np.abs(delta_new - delta)))
        scale = 1.0 + float(np.max(np.abs(delta_new)))
        if residual <= tol * scale:
            return FixedPointSolution(
                delta=delta_new,
                t_scalar=t_new,
                residual=residual / scale,
                iterations=iteration,
            )
        t = 0.5 * t + 0.5 * t_new
    raise RuntimeError(
        f"fixed point did not converge in {max_iter} iterations "
        f"(last scaled residual {residual / scale:.3e})"
    )


def solve_derivative(
    fp: FixedPointSolution, c, n: int, alpha: float, kappa: float = 1.0
) -> tuple[np.ndarray, float]:
    """Derivative of the fixed point against a regularizer perturbation.

    Solves the linear system (I - A) delta' = b with

        A_jl = c_j * c_l * t^2 / (n * (1 + delta_l)^2),    b_j = c_j * t^2 * kappa,

    and returns (delta', t') where t' = t^2 * (kappa
    + (1/n) sum_l c_l * delta'_l / (1 + delta_l)^2). With kappa = 1 these are
    the (positive) sensitivities -d(delta)/d(alpha) and -dt/d(alpha); t' is
    also the deterministic equivalent of the squared-resolvent trace density
    that the SINR assemblies consume.
    """
    c = np.asarray(c, dtype=float)
    t = fp.t_scalar
    if c.size == 0:
        return c.copy(), t * t * kappa
    delta = fp.delta
    weights = c / (1.0 + delta) ** 2
    A = (t * t / n) * np.outer(c, weights)
    b = c * (t * t * kappa)
    delta_prime = np.linalg.solve(np.eye(c.size) - A, b)
    t_prime = t * t * (kappa + float(np.sum(weights * delta_prime)) / n)
    return delta_prime, t_prime


@dataclass(frozen=True)
class FirstHopDE:
    """Deterministic equivalents of the source-to-relay SINRs.

    All vectors are per user. ``mu[j, k]`` is the interference density of
    source j at stream k (zero diagonal); the SINR denominator is
    z + si_term + rho * column sums of mu. ``own_error`` is the
    rho-multiplied-later self-estimation-error density that the assembly adds
    to the desired power.
    """

    gamma_bar: np.ndarray
    delta: np.ndarray
    delta_prime: np.ndarray
    z: np.ndarray
    desired: np.ndarray
    mu: np.ndarray
    si_term: np.ndarray
    own_error: np.ndarray


def si_trace_density(cfg: SystemConfig) -> float:
    """Per-unit-Z self-interference power density, M*sigma2_SI under FD."""
    if cfg.duplex_mode != "FD":
        return 0.0
    return cfg.M * cfg.sigma2_SI


def de_first_hop(cfg: SystemConfig, sigma2_SR, beta_SR) -> FirstHopDE:
    """Assemble the first-hop SINR deterministic equivalents."""
    sigma2 = np.asarray(sigma2_SR, dtype=float)
    beta = np.asarray(beta_SR, dtype=float)
    if sigma2.shape != (cfg.K,) or beta.shape != (cfg.K,):
        raise ValueError("sigma2_SR and beta_SR must be length-K vectors")
    alpha = cfg.alpha_SR_eff
    fp = solve_fixed_point(sigma2, cfg.N, alpha)
    delta_prime, _ = solve_derivative(fp, sigma2, cfg.N, alpha, kappa=1.0)
    delta = fp.delta
    one_plus = (1.0 + delta) ** 2
    z = delta_prime / (cfg.N * one_plus)
    desired = delta**2 / one_plus
    err = beta - sigma2
    si_term = si_trace_density(cfg) * z
    # mu[j, k] = z_k * (err_j + sigma2_j/(1+delta_j)^2), zero diagonal
    mu = np.outer(err + sigma2 / one_plus, z)
    np.fill_diagonal(mu, 0.0)
    own_error = err * z
    denom = z + si_term + cfg.rho * mu.sum(axis=0)
    gamma_bar = cfg.rho * (desired + own_error) / denom
    return FirstHopDE(
        gamma_bar=gamma_bar,
        delta=delta,
        delta_prime=delta_prime,
        z=z,
        desired=desired,
        mu=mu,
        si_term=si_term,
        own_error=own_error,
    )


def _hop2_core(cfg: SystemConfig, sigma2_RD, beta_RD):
    """Fixed point, derivative, power scaling, and leakage matrix for hop two."""
    sigma2 = np.asarray(sigma2_RD, dtype=float)
    beta = np.asarray(beta_RD, dtype=float)
    if sigma2.shape != (cfg.K,) or beta.shape != (cfg.K,):
        raise ValueError("sigma2_RD and beta_RD must be length-K vectors")
    alpha = cfg.alpha_RD_eff
    fp = solve_fixed_point(sigma2, cfg.M, alpha)
    delta_prime, t_prime = solve_derivative(fp, sigma2, cfg.M, alpha, kappa=1.0)
    trace_density = float(np.sum(delta_prime / (1.0 + fp.delta) ** 2)) / cfg.M
    lambda_bar = cfg.K / trace_density
    err = beta - sigma2
    one_plus = (1.0 + fp.delta) ** 2
    # Q[j, k]: leakage of stream j onto user k before the 1/(M*(1+delta_k)^2)
    # and lambda_bar*rho*t/K factors are applied.
    Q = t_prime * np.outer(sigma2 / one_plus, err * one_plus + sigma2)
    np.fill_diagonal(Q, cfg.M * fp.delta**2 + err * sigma2 * t_prime)
    return fp, delta_prime, t_prime, lambda_bar, Q


def de_lambda_bar(cfg: SystemConfig, sigma2_RD) -> float:
    """Long-term power scaling: K over the mean unnormalized precoder power."""
    sigma2 = np.asarray(sigma2_RD, dtype=float)
    fp = solve_fixed_point(sigma2, cfg.M, cfg.alpha_RD_eff)
    delta_prime, _ = solve_derivative(fp, sigma2, cfg.M, cfg.alpha_RD_eff, kappa=1.0)
    trace_density = float(np.sum(delta_prime / (1.0 + fp.delta) ** 2)) / cfg.M
    return cfg.K / trace_density


def de_Q(cfg: SystemConfig, sigma2_RD, beta_RD) -> np.ndarray:
    """Leakage matrix Q; column k prices interference seen by user k.

    Off the diagonal Q_jk = sigma2_j*t'*[(beta_k - sigma2_k)*(1+delta_k)^2
    + sigma2_k]/(1+delta_j)^2; the diagonal holds the coherent self term
    M*delta_k^2 plus the own estimation error (beta_k - sigma2_k)*sigma2_k*t'.
    """
    _, _, _, _, Q = _hop2_core(cfg, sigma2_RD, beta_RD)
    return Q


def de_ybar(cfg: SystemConfig, sigma2_RD, lambda_bar: float, Q: np.ndarray) -> float:
    """Average normalized interference density Ybar driving the power split.

    Ybar_k = lambda_bar * sum_{j != k} Q_jk / (K*M*(1+delta_k)^2); with
    t = K/(rho*Ybar) the private streams run at unit effective interference,
    which keeps their rates within log2(1 + 1/K) per user of the t = 1
    operating point.
    """
    sigma2 = np.asarray(sigma2_RD, dtype=float)
    fp = solve_fixed_point(sigma2, cfg.M, cfg.alpha_RD_eff)
    one_plus = (1.0 + fp.delta) ** 2
    off_sum = Q.sum(axis=0) - np.diag(Q)
    ybar_k = lambda_bar * off_sum / (cfg.K * cfg.M * one_plus)
    return float(np.mean(ybar_k))


def q_weights_de(cfg: SystemConfig, sigma2_RD, beta_RD) -> np.ndarray:
    """Common-precoder SINR weights, evaluated at full private power (t = 1).

    q_k = 1/((rho/K)*Lambda_k + 1) with Lambda_k the deterministic equivalent
    of user k's total received private power density. Smaller q means a
    weaker user, which earns a larger combining weight in the common
    precoder.
    """
    fp, _, _, lambda_bar, Q = _hop2_core(cfg, sigma2_RD, beta_RD)
    one_plus = (1.0 + fp.delta) ** 2
    Lambda = lambda_bar * Q.sum(axis=0) / (cfg.M * one_plus)
    return 1.0 / ((cfg.rho / cfg.K) * Lambda + 1.0)


@dataclass(frozen=True)
class SecondHopDE:
    """Deterministic equivalents of the relay-to-destination SINRs.

    gamma_c is None under NoRS and gamma_c_min is then 0, matching a common
    stream that carries no power.
    """

    gamma_p: np.ndarray
    gamma_c: np.ndarray | None
    gamma_c_min: float
    delta: np.ndarray
    delta_prime: np.ndarray
    t_prime: float
    lambda_bar: float
    Q: np.ndarray
    t: float


def de_second_hop(cfg: SystemConfig, sigma2_RD, beta_RD, t: float) -> SecondHopDE:
    """Assemble the second-hop SINR deterministic equivalents at split t."""
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    sigma2 = np.asarray(sigma2_RD, dtype=float)
    beta = np.asarray(beta_RD, dtype=float)
    fp, delta_prime, t_prime, lambda_bar, Q = _hop2_core(cfg, sigma2_RD, beta_RD)
    delta = fp.delta
    one_plus = (1.0 + delta) ** 2
    rk = cfg.rho * t / cfg.K
    off_sum = Q.sum(axis=0) - np.diag(Q)
    gamma_p = (lambda_bar * rk * delta**2 / one_plus) / (
        lambda_bar * rk * off_sum / (cfg.M * one_plus) + 1.0
    )
    gamma_c = None
    gamma_c_min = 0.0
    if cfg.strategy == "RS":
        q = q_weights_de(cfg, sigma2, beta)
        alpha_w = alpha_from_q(q, sigma2, cfg.M)
        sbar = float(np.sum(alpha_w**2 * sigma2))
        gain = alpha_w**2 * cfg.M * sigma2**2 / sbar + beta
        den_c = lambda_bar * rk * Q.sum(axis=0) / (cfg.M * one_plus) + 1.0
        gamma_c = cfg.rho * (1.0 - t) * gain / den_c
        gamma_c_min = float(np.min(gamma_c))
    return SecondHopDE(
        gamma_p=gamma_p,
        gamma_c=gamma_c,
        gamma_c_min=gamma_c_min,
        delta=delta,
        delta_prime=delta_prime,
        t_prime=t_prime,
        lambda_bar=lambda_bar,
        Q=Q,
        t=float(t),
    )


@dataclass(frozen=True)
class DeterministicEquivalents:
    """Joint report of both hops plus the long-term operating point."""

    first_hop: FirstHopDE
    second_hop: SecondHopDE
    t: float
    Ybar: float
    q_weights: np.ndarray | None


def estimate_variances(cfg: SystemConfig, profile: LargeScaleProfile):
    """Per-user estimate variances for both hops under the CSIT mode."""
    if cfg.csit_mode == "perfect":
        return profile.beta_SR.copy(), profile.beta_RD.copy()
    s_sr = np.asarray(estimation_variance(profile.beta_SR, cfg.tau, cfg.p_tr))
    s_rd = np.asarray(estimation_variance(profile.beta_RD, cfg.tau, cfg.p_tr))
    return s_sr, s_rd


def de_report(cfg: SystemConfig, profile: LargeScaleProfile) -> DeterministicEquivalents:
    """Compute every deterministic equivalent at the operating point of cfg."""
    sigma2_SR, sigma2_RD = estimate_variances(cfg, profile)
    first_hop = de_first_hop(cfg, sigma2_SR, profile.beta_SR)
    _, _, _, lambda_bar, Q = _hop2_core(cfg, sigma2_RD, profile.beta_RD)
    ybar = de_ybar(cfg, sigma2_RD, lambda_bar, Q)
    t = power_split(cfg, ybar)
    second_hop = de_second_hop(cfg, sigma2_RD, profile.beta_RD, t)
    q = q_weights_de(cfg, sigma2_RD, profile.beta_RD) if cfg.strategy == "RS" else None
    return DeterministicEquivalents(
        first_hop=first_hop, second_hop=second_hop, t=t, Ybar=ybar, q_weights=q
    )


def de_sum_rate(cfg: SystemConfig, profile: LargeScaleProfile):
    """Deterministic-equivalent rate report, shaped like the Monte-Carlo one."""
    # Imported here: the rate bookkeeping lives beside the Monte-Carlo oracle,
    # which itself imports this module for the long-term quantities.
    from .montecarlo import RateReport, end_to_end, rates_from_sinrs

    de = de_report(cfg, profile)
    r_sr, r_p, r_c = rates_from_sinrs(
        de.first_hop.gamma_bar, de.second_hop.gamma_p, de.second_hop.gamma_c_min, cfg
    )
    r_e2e = end_to_end(r_sr, r_p, r_c, cfg.K)
    meta = {
        "source": "de",
        "seed": -1,
        "n_draws": 0,
        "t": de.t,
        "lambda": de.second_hop.lambda_bar,
        "Ybar": de.Ybar,
        "config": cfg,
    }
    return RateReport(
        R_SR=r_sr,
        R_RD_private=r_p,
        R_c=r_c,
        R_end2end=r_e2e,
        sum_rate=float(np.sum(r_e2e)),
        meta=meta,
    )
