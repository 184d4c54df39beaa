"""Scenario configuration shared by the simulator, detectors and harness."""

import dataclasses
from dataclasses import dataclass

__all__ = ["SimConfig", "KMH"]

# m/s per km/h, for velocity entries quoted in km/h
KMH = 1000.0 / 3600.0

_ALGORITHMS = ("stf-jabid", "stf-jabid-per-slab", "ae-jabid", "benchmark1", "somp")


@dataclass
class SimConfig:
    """All scenario parameters for one simulated access frame.

    Defaults follow the reference urban UAV-uplink setting: 100 devices of
    which 10 are active, OFDM with 512 subcarriers over 10 MHz, cyclic
    prefix of 32 samples, geometric channels with 8..14 paths confined to a
    10 degree angular spread.
    """

    # population and array
    K: int = 100
    Ka: int = 10
    M: int = 2
    # codebook
    I: int = 2
    L: int = 40
    # frame structure
    J: int = 1
    N_tilde: int = 1
    n_start: int = 1          # first subcarrier used for transmission
    # OFDM numerology
    N: int = 512
    N_cp: int = 32
    delta_f: float = 15e3
    f_c: float = 1e9
    B_s: float = 1e7
    # link quality / mobility
    snr_db: float = 10.0
    link_budget: dict = None  # optional LinkBudget fields; overrides snr_db
    v_max: float = 0.0        # maximum radial velocity, m/s
    P_range: tuple = (8, 14)
    angular_spread_deg: float = 10.0
    # time-frequency spreading (1 = plain single-subcarrier transmission)
    L_F: int = 1
    # detector knobs
    T0: int = 200
    kappa: float = 0.3
    T_h1: float = 0.7
    T_h2: float = 0.9
    epsilon: float = 1e-6
    Q: int = 4
    zeta: tuple = (1.0, 0.8, 0.6, 0.4)
    # experiment orchestration
    algorithms: tuple = ("stf-jabid",)
    trials: int = 500
    master_seed: int = 0

    @property
    def L_T(self) -> int:
        return self.L // self.L_F

    @property
    def nu_max(self) -> float:
        """Maximum Doppler shift in Hz for the configured radial velocity."""
        return self.v_max * self.f_c / 3e8

    @property
    def effective_snr_db(self) -> float:
        """The configured SNR, or the one derived from the link budget."""
        if self.link_budget is None:
            return self.snr_db
        from ncim.channel import LinkBudget, snr_from_link_budget

        return snr_from_link_budget(LinkBudget(**self.link_budget))

    def validate(self) -> list:
        """Check every invariant; return all violations (empty list = ok)."""
        errors = []
        if self.K < 1:
            errors.append("K: must be >= 1")
        if not 0 <= self.Ka <= self.K:
            errors.append(f"Ka: must satisfy 0 <= Ka <= K, got Ka={self.Ka}, K={self.K}")
        if self.M < 1:
            errors.append("M: must be >= 1")
        if self.I < 2 or (self.I & (self.I - 1)) != 0:
            errors.append(f"I: must be a power of two >= 2, got {self.I}")
        if self.L < 1:
            errors.append("L: must be >= 1")
        if self.L_F < 1 or self.L % self.L_F != 0:
            errors.append(f"L_F: L={self.L} must be divisible by L_F={self.L_F}")
        if self.J < 1:
            errors.append("J: must be >= 1")
        if not 1 <= self.N_tilde <= self.N:
            errors.append(f"N_tilde: must satisfy 1 <= N_tilde <= N={self.N}")
        if not 1 <= self.n_start <= self.N:
            errors.append("n_start: must lie in [1, N]")
        if self.n_start + max(self.N_tilde, self.L_F) - 1 > self.N:
            errors.append("n_start: used subcarriers run past N")
        if self.N < 1 or self.N_cp < 0:
            errors.append("N: need N >= 1 and N_cp >= 0")
        if self.B_s <= 0:
            errors.append("B_s: must be > 0")
        if not 0 <= self.kappa < 1:
            errors.append(f"kappa: must lie in [0, 1), got {self.kappa}")
        if self.T0 < 1:
            errors.append("T0: must be >= 1")
        if self.epsilon <= 0:
            errors.append("epsilon: must be > 0")
        if not 0 < self.T_h1 < 1:
            errors.append("T_h1: must lie in (0, 1)")
        if not 0 < self.T_h2 < 1:
            errors.append("T_h2: must lie in (0, 1)")
        lo, hi = self.P_range
        if lo < 1 or hi < lo:
            errors.append(f"P_range: need 1 <= lo <= hi, got {self.P_range}")
        if self.Q < 0:
            errors.append("Q: must be >= 0")
        if self.Q > 0:
            if len(self.zeta) != self.Q:
                errors.append(f"zeta: need {self.Q} weights, got {len(self.zeta)}")
            elif any(not 0 < z <= 1 for z in self.zeta):
                errors.append("zeta: weights must lie in (0, 1]")
            elif any(self.zeta[q] < self.zeta[q + 1] for q in range(len(self.zeta) - 1)):
                errors.append("zeta: weights must be nonincreasing in neighbor distance")
        unknown = [a for a in self.algorithms if a not in _ALGORITHMS]
        if unknown:
            errors.append(f"algorithms: unknown {unknown}, known: {list(_ALGORITHMS)}")
        if self.trials < 1:
            errors.append("trials: must be >= 1")
        if self.link_budget is not None:
            try:
                self.effective_snr_db
            except (TypeError, ValueError) as exc:
                errors.append(f"link_budget: {exc}")
        return errors

    def replace(self, **overrides) -> "SimConfig":
        return dataclasses.replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        """Build from a mapping of field names; unknown keys are rejected."""
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        data = dict(data)
        for key in ("P_range", "zeta", "algorithms"):
            if key in data and isinstance(data[key], list):
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("P_range", "zeta", "algorithms"):
            out[key] = list(out[key])
        return out
