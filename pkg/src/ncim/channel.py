"""Geometric multipath UAV-ground channels.

Each device sees P scattering paths, each with a complex gain, a delay, an
angle of arrival at the aerial base station's uniform linear array, and a
Doppler shift. The same path set is evaluated

* per subcarrier and sub-frame for the block-fading uplink model,
* per OFDM symbol for doubly-selective (time- and frequency-selective)
  fading, and
* in the virtual angular domain through a unitary DFT across the array.

The air-to-ground link budget that converts transmit power and geometry
into a receive SNR also lives here.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PathSet",
    "LinkBudget",
    "steering_vector",
    "draw_paths",
    "freq_channel",
    "freq_channel_tensor",
    "doubly_selective_channel",
    "angular_grid_matrix",
    "angular_transform",
    "snr_from_link_budget",
]


def steering_vector(theta: float, M: int) -> np.ndarray:
    """Unit-norm ULA response for angle of arrival ``theta`` (radians).

    Half-wavelength spacing: element m carries phase 2*pi*m*sin(theta)/2.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    m = np.arange(M)
    return np.exp(2j * np.pi * m * 0.5 * np.sin(theta)) / np.sqrt(M)


@dataclass(frozen=True)
class PathSet:
    """Paths of all K devices: ragged per-device arrays, one entry per path.

    ``gains[k]`` are CN(0,1) draws, ``delays[k]`` lie in [0, N_cp/B_s],
    ``aoas[k]`` stay inside ``centers[k] +- spread/2`` and ``dopplers[k]``
    inside [-nu_max, nu_max]. Immutable after the draw.
    """

    gains: tuple
    delays: tuple
    aoas: tuple
    dopplers: tuple
    centers: np.ndarray
    spread_deg: float

    @property
    def K(self) -> int:
        return len(self.gains)

    def paths_of(self, k: int) -> int:
        return len(self.gains[k - 1])


def draw_paths(cfg, rng: np.random.Generator) -> PathSet:
    """Draw a fresh path set for all K devices.

    Path count uniform over cfg.P_range, delays uniform on [0, N_cp/B_s],
    AoA centers uniform on [-pi/2, pi/2] with the configured spread, and
    Doppler uniform on [-nu_max, nu_max].
    """
    lo, hi = cfg.P_range
    tau_max = cfg.N_cp / cfg.B_s
    nu_max = cfg.nu_max
    spread = np.deg2rad(cfg.angular_spread_deg)

    gains, delays, aoas, dopplers = [], [], [], []
    centers = rng.uniform(-np.pi / 2, np.pi / 2, size=cfg.K)
    counts = rng.integers(lo, hi + 1, size=cfg.K)
    for k in range(cfg.K):
        P = int(counts[k])
        g = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) / np.sqrt(2)
        gains.append(g)
        delays.append(rng.uniform(0.0, tau_max, size=P))
        aoas.append(centers[k] + rng.uniform(-spread / 2, spread / 2, size=P))
        if nu_max > 0:
            dopplers.append(rng.uniform(-nu_max, nu_max, size=P))
        else:
            dopplers.append(np.zeros(P))
    return PathSet(
        gains=tuple(gains),
        delays=tuple(delays),
        aoas=tuple(aoas),
        dopplers=tuple(dopplers),
        centers=centers,
        spread_deg=cfg.angular_spread_deg,
    )


def subcarrier_frequency(n, N: int, B_s: float):
    """Baseband frequency of subcarrier n (1-based): -B_s/2 + B_s*(n-1)/N."""
    return -B_s / 2 + B_s * (np.asarray(n) - 1) / N


def _device_response(paths: PathSet, k: int, M: int) -> np.ndarray:
    """Per-path array responses of device k, shape (P, M)."""
    aoas = paths.aoas[k - 1]
    m = np.arange(M)
    return np.exp(2j * np.pi * np.outer(np.sin(aoas) * 0.5, m)) / np.sqrt(M)


def freq_channel(paths: PathSet, k: int, n: int, t: float, cfg) -> np.ndarray:
    """Frequency-domain channel of device k on subcarrier n at time t.

    ``t`` is the absolute start time of the sub-frame in seconds; the
    channel is held constant within a sub-frame. Normalization sqrt(M/P)
    with CN(0,1) path gains makes E||h||^2 = M.
    """
    g = paths.gains[k - 1]
    tau = paths.delays[k - 1]
    nu = paths.dopplers[k - 1]
    P = len(g)
    f = subcarrier_frequency(n, cfg.N, cfg.B_s)
    a = _device_response(paths, k, cfg.M)
    coeff = g * np.exp(2j * np.pi * nu * t) * np.exp(-2j * np.pi * tau * f)
    return np.sqrt(cfg.M / P) * (coeff @ a)


def freq_channel_tensor(paths: PathSet, subcarriers, times, cfg) -> np.ndarray:
    """Channels of all devices over a subcarrier x sub-frame grid.

    Returns shape (K, len(subcarriers), len(times), M); entry [k-1, n, j]
    equals ``freq_channel(paths, k, subcarriers[n], times[j], cfg)``.
    """
    subcarriers = np.asarray(subcarriers)
    times = np.asarray(times, dtype=float)
    f = subcarrier_frequency(subcarriers, cfg.N, cfg.B_s)
    h = np.empty((paths.K, len(subcarriers), len(times), cfg.M), dtype=complex)
    for k in range(1, paths.K + 1):
        g = paths.gains[k - 1]
        tau = paths.delays[k - 1]
        nu = paths.dopplers[k - 1]
        P = len(g)
        a = _device_response(paths, k, cfg.M)                       # (P, M)
        delay_ph = np.exp(-2j * np.pi * np.outer(tau, f))           # (P, n)
        dopp_ph = np.exp(2j * np.pi * np.outer(nu, times))          # (P, j)
        h[k - 1] = np.sqrt(cfg.M / P) * np.einsum(
            "p,pn,pj,pm->njm", g, delay_ph, dopp_ph, a
        )
    return h


def doubly_selective_channel(paths: PathSet, k: int, l_t: int, l_f: int, cfg) -> np.ndarray:
    """Channel of device k at OFDM symbol l_t and spread-subcarrier l_f.

    The Doppler phase is evaluated at the per-symbol reference instant
    ((l_t-1)*N + l_t*N_cp + l_f) * T_s; with all Doppler shifts zero this
    reduces to :func:`freq_channel` on the same subcarrier.
    """
    delta_t = ((l_t - 1) * cfg.N + l_t * cfg.N_cp + l_f) / cfg.B_s
    g = paths.gains[k - 1]
    tau = paths.delays[k - 1]
    nu = paths.dopplers[k - 1]
    P = len(g)
    n = cfg.n_start + l_f - 1
    f = subcarrier_frequency(n, cfg.N, cfg.B_s)
    a = _device_response(paths, k, cfg.M)
    coeff = g * np.exp(2j * np.pi * nu * delta_t) * np.exp(-2j * np.pi * tau * f)
    return np.sqrt(cfg.M / P) * (coeff @ a)


def angular_grid_matrix(M: int) -> np.ndarray:
    """Unitary DFT matrix of the virtual angular grid for an M-element ULA.

    Column m (1-based) is the unit-norm array response at grid frequency
    (m - (M+1)/2) / M; columns are exactly orthonormal.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    u = np.arange(M)
    grid = (np.arange(M) - (M - 1) / 2) / M
    return np.exp(2j * np.pi * np.outer(u, grid)) / np.sqrt(M)


def angular_transform(h_spatial: np.ndarray) -> np.ndarray:
    """Map rows of antenna-domain samples into the virtual angular domain.

    Right-multiplies by the conjugate of the unitary grid matrix, so the
    Frobenius norm and any white-noise statistics are preserved.
    """
    h_spatial = np.asarray(h_spatial)
    M = h_spatial.shape[-1]
    return h_spatial @ np.conj(angular_grid_matrix(M))


@dataclass(frozen=True)
class LinkBudget:
    """Air-to-ground link-budget inputs.

    ``f_c_mhz`` is the carrier in MHz (the path-loss constant expects MHz);
    ``B_s`` is in Hz. ``eta_los``/``eta_nlos`` are the mean excess path
    losses of the LoS/NLoS propagation groups, ``a``/``b`` the
    environment constants of the LoS-probability logistic.
    """

    P_t_dbm: float
    h_u: float
    r_u: float
    eta_los: float
    eta_nlos: float
    a: float
    b: float
    f_c_mhz: float
    B_s: float


def snr_from_link_budget(lb: LinkBudget) -> float:
    """Receive SNR in dB for a device at ground distance r_u from the UAV."""
    if lb.h_u <= 0 and lb.r_u <= 0:
        raise ValueError("need h_u > 0 or r_u > 0 for a finite link distance")
    if lb.B_s <= 0:
        raise ValueError("B_s must be > 0")
    d = np.hypot(lb.h_u, lb.r_u)
    c = 180.0 * np.arcsin(lb.h_u / d) / np.pi
    A = lb.eta_los - lb.eta_nlos
    B = 20 * np.log10(d) + 20 * np.log10(4 * np.pi * lb.f_c_mhz / 300.0) + lb.eta_nlos
    path_loss = A / (1 + lb.a * np.exp(-lb.b * (c - lb.a))) + B
    noise_dbm = -174.0 + 10 * np.log10(lb.B_s)
    return float(lb.P_t_dbm - path_loss - noise_dbm)
