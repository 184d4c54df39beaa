"""Non-orthogonal Bernoulli signature codebooks.

Every device is assigned ``I = 2**r`` signature sequences of length ``L``.
A device embeds ``r`` bits per transmission by picking which of its
sequences to send, so the receiver never needs explicit channel knowledge:
detecting the sequence index *is* the demodulation.

Sequence entries are drawn from the 4-point set ``{(+-1 +- 1j)/sqrt(2L)}``
so that every column of the stacked sensing matrix has unit norm.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Codebook",
    "generate_codebook",
    "sequence_of",
    "bits_to_selection",
    "selection_to_bits",
]


@dataclass(frozen=True)
class Codebook:
    """Stacked signature matrix for all devices.

    ``phi`` has shape ``(L, K*I)``; column ``(k-1)*I + (i-1)`` (0-based)
    holds the i-th sequence of device k. Immutable after construction, so
    it is safe to share across parallel trials.
    """

    K: int
    I: int
    L: int
    phi: np.ndarray

    @property
    def r(self) -> int:
        """Bits embedded per sequence selection."""
        return int(np.log2(self.I))

    def column(self, k: int, i: int) -> int:
        """0-based column index of sequence i of device k (both 1-based)."""
        if not 1 <= k <= self.K:
            raise IndexError(f"device index k={k} outside [1, {self.K}]")
        if not 1 <= i <= self.I:
            raise IndexError(f"selection index i={i} outside [1, {self.I}]")
        return (k - 1) * self.I + (i - 1)


def generate_codebook(K: int, I: int, L: int, seed: int) -> Codebook:
    """Draw the signature codebooks of all ``K`` devices.

    Real and imaginary parts are independent fair coin flips on {+1, -1},
    scaled by ``1/sqrt(2L)``. Deterministic given ``(K, I, L, seed)``.
    """
    if K < 1:
        raise ValueError("K must be a positive integer")
    if L < 1:
        raise ValueError("L must be a positive integer")
    if I < 2 or (I & (I - 1)) != 0:
        raise ValueError(f"I must be a power of two >= 2, got {I}")

    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(2, L, K * I)) * 2 - 1
    phi = (signs[0] + 1j * signs[1]) / np.sqrt(2 * L)
    return Codebook(K=K, I=I, L=L, phi=phi)


def sequence_of(cb: Codebook, k: int, i: int) -> np.ndarray:
    """Return sequence i of device k (1-based indices), length L."""
    return cb.phi[:, cb.column(k, i)].copy()


def bits_to_selection(bits) -> int:
    """Map a bit vector (MSB first) to a selection index in [1, 2**len(bits)]."""
    bits = np.asarray(bits, dtype=int)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("bits must be a non-empty 1-D vector")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must contain only 0s and 1s")
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value + 1


def selection_to_bits(selection: int, r: int) -> np.ndarray:
    """Inverse of :func:`bits_to_selection`: index in [1, 2**r] to r bits."""
    if not 1 <= selection <= (1 << r):
        raise ValueError(f"selection {selection} outside [1, {1 << r}]")
    value = selection - 1
    return np.array([(value >> (r - 1 - t)) & 1 for t in range(r)], dtype=int)
