"""From signature codebooks to a received frame.

Every device owns I = 2**r signature sequences; an active device signals r
bits by choosing which one to transmit on each (subcarrier, sub-frame).
The receiver sees the superposition through per-device multipath channels.
"""

import numpy as np

from ncim.channel import draw_paths, freq_channel_tensor
from ncim.codebook import generate_codebook, selection_to_bits
from ncim.config import SimConfig
from ncim.signal_model import (
    assemble_X,
    draw_ground_truth,
    subframe_times,
    synthesize_received,
)

cfg = SimConfig(K=100, Ka=10, M=2, I=4, L=40, J=2, N_tilde=4, snr_db=15.0)
rng = np.random.default_rng(1)

cb = generate_codebook(cfg.K, cfg.I, cfg.L, seed=1)
print(f"codebook: {cfg.K} devices x {cfg.I} sequences of length {cfg.L}")
print(f"  sensing matrix {cb.phi.shape}, column norms all "
      f"{np.linalg.norm(cb.phi, axis=0).mean():.6f}")
print(f"  {cb.r} bits per selection, {cb.r * cfg.N_tilde * cfg.J} bits per frame")

gt = draw_ground_truth(cfg, rng)
print(f"\nactive devices: {sorted(gt.active_set)}")
k = sorted(gt.active_set)[0]
sel = gt.selections[k - 1, 0, 0]
print(f"device {k} on subcarrier 1, sub-frame 1 sends sequence {sel} "
      f"= bits {selection_to_bits(sel, cb.r)}")

paths = draw_paths(cfg, rng)
subs = cfg.n_start + np.arange(cfg.N_tilde)
h = freq_channel_tensor(paths, subs, subframe_times(cfg), cfg)
X = assemble_X(gt, h, cfg)
occupied = np.flatnonzero(np.abs(X).sum(axis=1))
print(f"\nequivalent channel matrix {X.shape}: "
      f"{len(occupied)} of {X.shape[0]} rows occupied "
      f"({cfg.Ka} devices x up to {cfg.N_tilde * cfg.J} selections)")

rx = synthesize_received(cb, X, cfg.snr_db, rng, cfg.Ka)
sig = np.mean(np.abs(cb.phi @ X) ** 2)
print(f"received frame {rx.Y.shape}: signal power/sample {sig:.4f}, "
      f"noise variance {rx.sigma_n2:.4f} "
      f"(-> {10 * np.log10(sig / rx.sigma_n2):.1f} dB measured SNR)")
