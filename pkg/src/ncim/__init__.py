"""Grant-free non-coherent index-modulation (NC-IM) massive access toolkit.

Synthesizes multi-antenna OFDM uplink signals from sporadically active
devices and recovers device activity plus the information embedded in the
choice of signature sequence, via AMP+EM message-passing detectors.
"""

from ncim.codebook import Codebook, generate_codebook
from ncim.config import SimConfig

__all__ = ["Codebook", "generate_codebook", "SimConfig"]

__version__ = "0.1.0"
