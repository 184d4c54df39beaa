"""Space-time-frequency joint activity and blind information detection.

The detector for small antenna arrays: it couples all J*M*N_tilde
measurement columns of one frame through a structured spike-and-slab prior
in which a single per-device activity probability gates the whole I-row
block across every antenna, sub-frame and subcarrier. AMP supplies the
scalar pseudo-observations, the denoiser below folds the cross-column
coupling in, and an EM loop learns the prior mean/variance and the
per-device activity probabilities alongside the iteration.
"""

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, logit
from scipy.stats import norm

from ncim.amp_core import run_amp
from ncim.codebook import Codebook
from ncim.signal_model import column_index

__all__ = [
    "StfHyper",
    "StfResult",
    "lambda_init",
    "stf_denoise",
    "em_update",
    "extract_selections",
    "run_stf_jabid",
]

_PROB_EPS = 1e-12   # clamp for probabilities entering odds ratios
_TAU_FLOOR = 1e-6   # prior-variance floor (the init formula can go negative
                    # when noise dominates the received energy)
# power control delivers unit average per-antenna power per active device;
# the EM slab variance never drops below a tenth of that. Without this bound
# a frame with no active devices lets EM shrink the slab to the pseudo-noise
# scale, where noise outliers masquerade as devices.
_TAU_NOMINAL = 0.1


@dataclass
class StfHyper:
    """EM-learned prior parameters: spike-and-slab mean/variance plus the
    per-device activity probabilities."""

    mu0: complex
    tau0: float
    sigma_n2: float
    lam: np.ndarray


class StfDenoiseResult(NamedTuple):
    x_hat: np.ndarray
    v_hat: np.ndarray
    pi: np.ndarray
    mu_bar: np.ndarray
    tau_bar: np.ndarray


@dataclass
class StfResult:
    """Detector output: channel estimate, active set, per-(subcarrier,
    sub-frame) selection indices, final activity probabilities, iterations."""

    X_hat: np.ndarray
    active_set: set
    selections: np.ndarray
    lam: np.ndarray
    iterations: int


def _sparsity_gain(c: float) -> float:
    return (1 + c * c) * norm.cdf(-c) - c * norm.pdf(c)


@functools.lru_cache(maxsize=None)
def lambda_init(K: int, I: int, L: int) -> float:
    """Initial activity probability that avoids poor EM local optima.

    Maximizes over c > 0 the classic undersampling-vs-sparsity tradeoff for
    an L-measurement, K*I-unknown problem, then scales by L/(K*I).
    """
    KI = K * I

    def objective(c):
        g = _sparsity_gain(c)
        return (1 - 2 * KI * g / L) / (1 + c * c - 2 * g)

    res = minimize_scalar(
        lambda c: -objective(c), bounds=(1e-8, 50.0), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(L / KI * objective(res.x))


def stf_denoise(r: np.ndarray, phi: np.ndarray, hyper: StfHyper, K: int, I: int
                ) -> StfDenoiseResult:
    """Structured spike-and-slab posterior for the full frame.

    ``r`` and ``phi`` have shape (K*I, M'). The slab posterior moments are
    elementwise; the activity belief couples all M' columns of a device,
    which is evaluated in the log domain (the likelihood-ratio products
    over columns overflow otherwise).
    """
    KI, Mp = r.shape
    tau0 = max(hyper.tau0, 0.0)
    denom = tau0 + phi
    mu_bar = (hyper.mu0 * phi + tau0 * r) / denom
    tau_bar = tau0 * phi / denom

    # log likelihood ratio of "this entry carries the slab" vs "it is zero"
    log_lr = (
        np.log(phi / denom)
        - np.abs(r - hyper.mu0) ** 2 / denom
        + np.abs(r) ** 2 / phi
    )
    lr3 = log_lr.reshape(K, I, Mp)
    col_max = lr3.max(axis=1)
    log_sum = col_max + np.log(np.exp(lr3 - col_max[:, None, :]).sum(axis=1))

    lam = np.clip(hyper.lam, _PROB_EPS, 1 - _PROB_EPS)
    log_odds = logit(lam) + (log_sum - np.log(I)).sum(axis=1)
    activity = expit(log_odds)                          # (K,)

    pi = activity[:, None, None] * np.exp(lr3 - log_sum[:, None, :])
    pi = pi.reshape(KI, Mp)

    x_hat = pi * mu_bar
    v_hat = pi * tau_bar + pi * (1 - pi) * np.abs(mu_bar) ** 2
    return StfDenoiseResult(x_hat, v_hat, pi, mu_bar, tau_bar)


def em_update(pi: np.ndarray, mu_bar: np.ndarray, tau_bar: np.ndarray,
              hyper: StfHyper, K: int, I: int) -> StfHyper:
    """One EM step for (mu0, tau0, lambda).

    The activity update averages, over measurement columns, the posterior
    probability that any of the device's I rows is occupied; it is the
    stationary point of the EM objective in lambda_k. Beliefs are clamped
    below 1 before the odds ratio. If the posterior mass vanishes entirely
    the previous mean/variance are kept (the ratio forms are 0/0).
    """
    mass = pi.sum()
    if mass < _PROB_EPS:
        mu0, tau0 = hyper.mu0, hyper.tau0
    else:
        mu0 = complex((pi * mu_bar).sum() / mass)
        tau0 = float((pi * (np.abs(mu0 - mu_bar) ** 2 + tau_bar)).sum() / mass)

    pic = np.clip(pi.reshape(K, I, -1), 0.0, 1 - _PROB_EPS)
    odds = (pic / (1 - pic)).sum(axis=1)               # (K, M')
    lam = (odds / (1 + odds)).mean(axis=1)
    return StfHyper(mu0=mu0, tau0=tau0, sigma_n2=hyper.sigma_n2, lam=lam)


def extract_selections(X_hat: np.ndarray, active_set, K: int, I: int,
                       N_tilde: int, J: int, M: int) -> np.ndarray:
    """Per-(subcarrier, sub-frame) index of the maximum-power row of each
    detected device's block. Returns (K, N_tilde, J) with 0 for devices
    outside the active set."""
    selections = np.zeros((K, N_tilde, J), dtype=int)
    power = np.abs(X_hat) ** 2
    for k in active_set:
        block = power[(k - 1) * I : k * I]             # (I, M')
        for n_idx in range(N_tilde):
            for j_idx in range(J):
                c0 = column_index(n_idx, j_idx, 0, J, M)
                row_power = block[:, c0 : c0 + M].sum(axis=1)
                selections[k - 1, n_idx, j_idx] = int(np.argmax(row_power)) + 1
    return selections


def run_stf_jabid(Y: np.ndarray, cb: Codebook, sigma_n2: float, cfg) -> StfResult:
    """Run the full-frame detector on Y of shape (L, J*M*N_tilde)."""
    Mp = cfg.J * cfg.M * cfg.N_tilde
    if Y.shape != (cb.L, Mp):
        raise ValueError(
            f"Y has shape {Y.shape}, expected ({cb.L}, {Mp}) for "
            f"J={cfg.J}, M={cfg.M}, N_tilde={cfg.N_tilde}"
        )
    K, I = cb.K, cb.I
    lam0 = lambda_init(K, I, cb.L)
    tau0 = (np.linalg.norm(Y) - cb.L * sigma_n2) / (np.linalg.norm(cb.phi) * lam0)
    hyper = StfHyper(
        mu0=0j,
        tau0=max(float(tau0), _TAU_FLOOR),
        sigma_n2=sigma_n2,
        lam=np.full(K, lam0),
    )

    def denoise(r, phi):
        nonlocal hyper
        res = stf_denoise(r, phi, hyper, K, I)
        hyper = em_update(res.pi, res.mu_bar, res.tau_bar, hyper, K, I)
        # keep the slab wider than the pseudo-measurement noise (below that
        # spike and slab are unidentifiable) and above the power-control
        # bound; EM otherwise locks onto noise outliers when no device is on
        hyper.tau0 = max(hyper.tau0, float(np.median(phi)), _TAU_NOMINAL)
        return res.x_hat, res.v_hat

    state = run_amp(Y, cb.phi, sigma_n2, denoise,
                    T0=cfg.T0, kappa=cfg.kappa, epsilon=cfg.epsilon)

    active = {k + 1 for k in range(K) if hyper.lam[k] > cfg.T_h1}
    selections = extract_selections(
        state.x_hat, active, K, I, cfg.N_tilde, cfg.J, cfg.M
    )
    return StfResult(
        X_hat=state.x_hat,
        active_set=active,
        selections=selections,
        lam=hyper.lam.copy(),
        iterations=state.t,
    )
