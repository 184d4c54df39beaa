"""Reference detectors: greedy SOMP recovery and an antenna-averaged
variant of the angular-domain detector."""

from dataclasses import dataclass

import numpy as np

from ncim.ae_jabid import AeResult, run_ae_jabid
from ncim.codebook import Codebook

__all__ = ["SompConfig", "SompResult", "run_somp", "run_benchmark1"]


@dataclass(frozen=True)
class SompConfig:
    """Stopping rule: halt once the mean residual power drops below the
    (known) noise power, or after max_atoms column selections."""

    noise_power: float
    max_atoms: int

    def __post_init__(self):
        if self.noise_power <= 0:
            raise ValueError("noise_power must be > 0")
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be >= 1")


@dataclass
class SompResult:
    support: list            # selected 0-based columns, in selection order
    X_hat: np.ndarray        # least-squares estimate on the support, (KI, C)
    iterations: int


def run_somp(Y: np.ndarray, Phi: np.ndarray, cfg: SompConfig) -> SompResult:
    """Simultaneous orthogonal matching pursuit over all measurement columns.

    Each round picks the dictionary column with the largest aggregate
    squared correlation against the residual, re-solves least squares on
    the selected set, and subtracts the projection. lstsq handles a
    rank-deficient selection via its pseudo-inverse solution.
    """
    L, KI = Phi.shape
    if Y.shape[0] != L:
        raise ValueError(f"Y has {Y.shape[0]} rows, Phi has {L}")
    max_atoms = min(cfg.max_atoms, KI)

    residual = Y
    support = []
    coeffs = None
    remaining = np.ones(KI, dtype=bool)
    while len(support) < max_atoms and np.mean(np.abs(residual) ** 2) >= cfg.noise_power:
        corr = np.sum(np.abs(np.conj(Phi).T @ residual) ** 2, axis=1)
        corr[~remaining] = -1.0
        j = int(np.argmax(corr))
        support.append(j)
        remaining[j] = False
        coeffs, *_ = np.linalg.lstsq(Phi[:, support], Y, rcond=None)
        residual = Y - Phi[:, support] @ coeffs

    X_hat = np.zeros((KI, Y.shape[1]), dtype=complex)
    if support:
        X_hat[support] = coeffs
    return SompResult(support=support, X_hat=X_hat, iterations=len(support))


def somp_active_set(result: SompResult, I: int) -> set:
    """Devices owning at least one selected column (1-based ids)."""
    return {col // I + 1 for col in result.support}


def run_benchmark1(R: np.ndarray, cb: Codebook, sigma_nbar2: float, cfg) -> AeResult:
    """Angular-domain detector with the indicator refresh replaced by a
    plain average over the antenna axis."""
    return run_ae_jabid(R, cb, sigma_nbar2, cfg, smoothing="antenna_mean")
