"""Error metrics and complexity accounting.

ADER counts missed plus falsely detected devices over the population;
BER_total charges every bit of a missed or falsely detected device as
erroneous on top of the bit errors of correctly detected ones. NMSE is the
plain (unsquared) Frobenius-norm ratio. Complexity counts follow the
per-algorithm complex-multiplication formulas, and the efficiency score
relates log error rate to log complexity.
"""

import math
from dataclasses import dataclass

import numpy as np

from ncim.codebook import selection_to_bits

__all__ = [
    "TrialMetrics",
    "nmse",
    "ader",
    "bit_errors",
    "ber_total",
    "complexity_count",
    "efficiency",
]


@dataclass
class TrialMetrics:
    """Per-trial outcome of one detector.

    ``cm`` is the configured-iteration-budget complexity count of the
    detector; ``ec`` relates the trial's error rate to it (the sweep
    aggregation recomputes ``ec`` from mean error rates instead).
    """

    nmse: float
    ader: float
    ber_total: float
    em: int
    ef: int
    bd: int
    iterations: int
    cm: float = math.nan
    ec: float = math.nan


def nmse(est: np.ndarray, truth: np.ndarray) -> float:
    """Frobenius-norm ratio ||est - truth|| / ||truth|| (not squared)."""
    ref = np.linalg.norm(truth)
    if ref == 0:
        raise ValueError("NMSE undefined for an all-zero reference")
    return float(np.linalg.norm(est - truth) / ref)


def ader(detected: set, truth: set, K: int) -> float:
    """(missed + falsely detected) / K."""
    em = len(truth - detected)
    ef = len(detected - truth)
    return (em + ef) / K


def bit_errors(detected_selections: np.ndarray, true_selections: np.ndarray,
               devices, r: int) -> int:
    """Bit errors of the given (correctly detected) devices, summed over
    every (subcarrier, sub-frame) selection.

    Selection arrays have shape (K, N_tilde, J) with 1-based indices.
    """
    bd = 0
    for k in devices:
        det = np.atleast_1d(detected_selections[k - 1]).ravel()
        tru = np.atleast_1d(true_selections[k - 1]).ravel()
        for d, t in zip(det, tru):
            if d == t:
                continue
            if d == 0:
                bd += r  # no estimate at all counts as all bits wrong
            else:
                bd += int(np.sum(selection_to_bits(int(d), r)
                                 != selection_to_bits(int(t), r)))
    return bd


def ber_total(em: int, ef: int, bd: int, ka: int, r: int,
              selections_per_device: int = 1) -> float:
    """Total bit error rate including bits lost to detection errors.

    Each device carries r bits per selection and ``selections_per_device``
    selections per frame; missed and falsely detected devices are charged
    all of their bits.
    """
    bits = r * selections_per_device
    denom = (ka + ef) * bits
    if denom == 0:
        return 0.0
    return ((em + ef) * bits + bd) / denom


def complexity_count(algorithm: str, K: int, I: int, L: int, M: int,
                     J: int = 1, N_tilde: int = 1, T: int = 1,
                     Ka: int = 1, Q: int = 0) -> float:
    """Complex-multiplication count C_m of one detector run.

    The joint space-time-frequency detector processes all M' = J*M*N_tilde
    columns at once; the per-slab algorithms repeat over the J*N_tilde
    slabs. SOMP's count is cubic in the number of selected atoms because
    of the growing least-squares solves.
    """
    for name, value in (("K", K), ("I", I), ("L", L), ("M", M), ("J", J),
                        ("N_tilde", N_tilde), ("Ka", Ka)):
        if value < 0 or (name not in ("Ka",) and value == 0):
            raise ValueError(f"{name} must be positive, got {value}")
    KI = K * I
    slabs = J * N_tilde
    if algorithm == "section-amp":
        return slabs * T * (2 * KI * L * M)
    if algorithm == "ae-jabid":
        return slabs * T * (4 * KI * L * M + 7.75 * KI * M + 0.5 * Q * KI * M)
    if algorithm in ("benchmark1", "gmmv-amp"):
        return slabs * T * (4 * KI * L * M + 8 * KI * M)
    if algorithm == "stf-jabid":
        Mp = J * M * N_tilde
        return T * (4 * KI * L * Mp + 7.25 * KI * Mp
                    + 1.25 * KI * I * Mp + 0.75 * KI * I * Mp * Mp)
    if algorithm == "stf-jabid-per-slab":
        return slabs * T * (4 * KI * L * M + 7.25 * KI * M
                            + 1.25 * KI * I * M + 0.75 * KI * I * M * M)
    if algorithm == "somp":
        ls = sum(t ** 3 + 2 * L * t ** 2 + 2 * L * M * t for t in range(1, Ka + 1))
        return slabs * (Ka * KI * L * M + ls)
    raise ValueError(f"unknown algorithm id {algorithm!r}")


def efficiency(ber: float, cm: float) -> float:
    """Computational efficiency -10*log10(BER) / (10*log10(C_m)).

    A zero error rate reports the +inf sentinel.
    """
    if ber < 0 or ber > 1:
        raise ValueError("ber must lie in [0, 1]")
    if cm <= 1:
        raise ValueError("cm must exceed 1")
    if ber == 0:
        return math.inf
    return -10 * math.log10(ber) / (10 * math.log10(cm)) + 0.0
