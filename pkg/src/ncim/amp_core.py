"""Shared AMP decoupling machinery.

Approximate message passing turns the matrix problem ``Y = Phi X + N`` into
per-entry scalar problems ``r = x + noise(phi)``. The factor-node update
computes the per-measurement mean/variance (Z, V) with the Onsager
correction, the variable-node update produces the pseudo-observations
(r, phi), and a pluggable denoiser maps those back to posterior moments.
Damping blends successive factor-node quantities to keep the iteration
stable on the strongly non-i.i.d. matrices that index modulation produces.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AmpState",
    "init_state",
    "factor_update",
    "damp",
    "variable_update",
    "converged",
    "run_amp",
]

# lower clamp for sigma^2 + V denominators, prevents NaNs at very high SNR
VAR_FLOOR = 1e-15


@dataclass
class AmpState:
    """Mutable per-instance AMP quantities.

    ``x_hat``/``v_hat`` are posterior means/variances of the unknowns
    (KI x C), ``Z``/``V`` the factor-node means/variances (L x C), and
    ``r``/``phi`` the decoupled pseudo-observations and their noise
    variances (KI x C). One instance per detection problem; never shared
    across threads mid-iteration.
    """

    x_hat: np.ndarray
    v_hat: np.ndarray
    Z: np.ndarray
    V: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    t: int = 1


def init_state(Y: np.ndarray, n_unknowns: int) -> AmpState:
    """Start from Z = Y, V = 1, x_hat = 0, v_hat = 1."""
    Y = np.asarray(Y)
    if Y.size == 0:
        raise ValueError("received matrix Y is empty")
    L, C = Y.shape
    return AmpState(
        x_hat=np.zeros((n_unknowns, C), dtype=complex),
        v_hat=np.ones((n_unknowns, C)),
        Z=Y.astype(complex).copy(),
        V=np.ones((L, C)),
        r=np.zeros((n_unknowns, C), dtype=complex),
        phi=np.ones((n_unknowns, C)),
        t=1,
    )


def factor_update(state: AmpState, Phi: np.ndarray, Y: np.ndarray, sigma_n2: float,
                  abs2Phi: np.ndarray = None):
    """Fresh factor-node (V, Z); the Onsager term uses the stored (V, Z).

    Returns the undamped pair; callers blend it via :func:`damp`.
    """
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be > 0")
    if abs2Phi is None:
        abs2Phi = np.abs(Phi) ** 2
    V_new = abs2Phi @ state.v_hat
    denom = np.maximum(sigma_n2 + state.V, VAR_FLOOR)
    Z_new = Phi @ state.x_hat - V_new * (Y - state.Z) / denom
    return V_new, Z_new


def damp(V_new: np.ndarray, Z_new: np.ndarray, state: AmpState, kappa: float):
    """Convex blend of the factor-node quantities with the previous iteration."""
    if not 0 <= kappa < 1:
        raise ValueError(f"damping factor must lie in [0, 1), got {kappa}")
    V = kappa * state.V + (1 - kappa) * V_new
    Z = kappa * state.Z + (1 - kappa) * Z_new
    return V, Z


def variable_update(state: AmpState, Phi: np.ndarray, Y: np.ndarray, sigma_n2: float,
                    abs2Phi: np.ndarray = None):
    """Variable-node pseudo-observations (phi, r) from the damped (V, Z)."""
    if abs2Phi is None:
        abs2Phi = np.abs(Phi) ** 2
    denom = np.maximum(sigma_n2 + state.V, VAR_FLOOR)
    phi = 1.0 / (abs2Phi.T @ (1.0 / denom))
    r = state.x_hat + phi * (np.conj(Phi).T @ ((Y - state.Z) / denom))
    return phi, r


def converged(x_hat_t: np.ndarray, x_hat_prev: np.ndarray, epsilon: float) -> bool:
    """Relative Frobenius change below epsilon; an all-zero previous iterate
    never counts as converged."""
    ref = np.linalg.norm(x_hat_prev)
    if ref == 0:
        return False
    return np.linalg.norm(x_hat_t - x_hat_prev) / ref < epsilon


def run_amp(Y, Phi, sigma_n2, denoise, T0=200, kappa=0.3, epsilon=1e-6) -> AmpState:
    """Iterate AMP with an abstract denoiser until convergence or T0.

    ``denoise(r, phi) -> (x_hat, v_hat)`` may keep its own hyperparameter
    state (EM learning happens inside it). Update order per iteration:
    factor update, damping, variable update, denoising.
    """
    abs2Phi = np.abs(Phi) ** 2
    state = init_state(Y, Phi.shape[1])
    for t in range(2, T0 + 1):
        V_new, Z_new = factor_update(state, Phi, Y, sigma_n2, abs2Phi)
        state.V, state.Z = damp(V_new, Z_new, state, kappa)
        state.phi, state.r = variable_update(state, Phi, Y, sigma_n2, abs2Phi)
        x_new, v_new = denoise(state.r, state.phi)
        done = converged(x_new, state.x_hat, epsilon)
        state.x_hat, state.v_hat = x_new, v_new
        state.t = t
        if done:
            break
    return state
