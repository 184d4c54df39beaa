"""Monte Carlo orchestration: seeded trials, sweeps, presets, CSV output.

Every trial is seeded from (master_seed, sweep index, trial index), and all
algorithms inside one trial consume the identical codebook, ground truth,
channel and noise realizations, so curves are paired. Aggregation is an
ordered reduction over trial indices, which makes the CSV byte-identical
regardless of how many worker processes ran the trials.
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ncim import metrics as mt
from ncim.ae_jabid import run_ae_jabid
from ncim.baselines import SompConfig, run_benchmark1, run_somp, somp_active_set
from ncim.channel import draw_paths, freq_channel_tensor
from ncim.codebook import generate_codebook
from ncim.config import KMH, SimConfig
from ncim.signal_model import (
    assemble_X,
    column_index,
    draw_ground_truth,
    effective_noise_variance,
    subframe_times,
    synthesize_received,
    synthesize_tfst_received,
    to_angular,
)
from ncim.stf_jabid import extract_selections, run_stf_jabid

__all__ = [
    "SweepSpec",
    "Preset",
    "presets",
    "run_trial",
    "run_sweep",
    "run_experiment",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "experiment",
    "algorithm",
    "sweep_param",
    "sweep_value",
    "trials",
    "nmse_db_mean",
    "ader_mean",
    "ber_total_mean",
    "avg_iterations",
    "cm",
    "ec",
    "master_seed",
]


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter with its value list and fixed overrides."""

    parameter: str
    values: tuple
    fixed: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.parameter not in SimConfig.__dataclass_fields__:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def config_for(self, base: SimConfig, value) -> SimConfig:
        return base.replace(**self.fixed, **{self.parameter: value})


@dataclass(frozen=True)
class Preset:
    """Named experiment mirroring one result figure."""

    name: str
    overrides: dict
    sweeps: tuple
    trials_full: int = 500
    trials_desk: int = 50
    description: str = ""


def presets() -> dict:
    """Catalog of experiment presets (sweep axes of the result figures)."""
    small_array = dict(K=100, Ka=10, M=2, J=2, N_tilde=8,
                       algorithms=("stf-jabid", "stf-jabid-per-slab", "somp"))
    large_array = dict(K=100, Ka=10, J=1, N_tilde=1, snr_db=5.0,
                       algorithms=("ae-jabid", "benchmark1", "somp"))
    cat = [
        Preset(
            name="fig5",
            overrides=dict(small_array, I=2, snr_db=15.0),
            sweeps=(SweepSpec("L", (24, 32, 40, 48)),),
            description="error rates vs sequence length, small array, joint frame",
        ),
        Preset(
            name="fig6",
            overrides=dict(small_array, I=4, L=40),
            sweeps=(SweepSpec("snr_db", (0.0, 5.0, 10.0, 15.0, 20.0)),),
            description="error rates vs SNR, small array, joint frame",
        ),
        Preset(
            name="fig7",
            overrides=dict(large_array, M=32, I=2),
            sweeps=(SweepSpec("L", (16, 20, 24, 30, 36)),),
            description="error rates vs sequence length, large array, angular domain",
        ),
        Preset(
            name="fig8",
            # M = 8 would need a narrower neighbor scheme than the default
            # Q = 4 window (the smoothing requires M > 2Q)
            overrides=dict(large_array, L=30, I=2),
            sweeps=(SweepSpec("M", (16, 32, 64)),),
            description="error rates vs antenna count, large array, angular domain",
        ),
        Preset(
            name="fig9",
            overrides=dict(K=100, Ka=10, L=32, I=2, M=32, snr_db=10.0,
                           J=1, N_tilde=1, algorithms=("ae-jabid",)),
            sweeps=tuple(
                SweepSpec("L_F", (1, 2, 4, 8), fixed={"v_max": v * KMH},
                          label=f"vmax={v}")
                for v in (0, 120, 180)
            ),
            trials_full=500,
            trials_desk=30,
            description="time-frequency spreading vs mobility, doubly-selective",
        ),
    ]
    return {p.name: p for p in cat}


def get_preset(name: str) -> Preset:
    try:
        return presets()[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(presets())}")


# --------------------------------------------------------------------------
# single trial
# --------------------------------------------------------------------------


def _slab_columns(n_idx: int, j_idx: int, J: int, M: int) -> slice:
    c0 = column_index(n_idx, j_idx, 0, J, M)
    return slice(c0, c0 + M)


def _detection_metrics(cfg, gt, detected, det_selections, nmse_value, iterations):
    truth = gt.active_set
    em = len(truth - detected)
    ef = len(detected - truth)
    r = int(np.log2(cfg.I))
    bd = mt.bit_errors(det_selections, gt.selections, truth & detected, r)
    return mt.TrialMetrics(
        nmse=nmse_value,
        ader=(em + ef) / cfg.K,
        ber_total=mt.ber_total(em, ef, bd, gt.Ka, r,
                               selections_per_device=cfg.N_tilde * cfg.J),
        em=em,
        ef=ef,
        bd=bd,
        iterations=iterations,
    )


def _run_per_slab_stf(Y, X, cb, sigma_n2, cfg, gt):
    """Ablation: the joint detector run independently on every
    (subcarrier, sub-frame) slab, metrics pooled over slabs."""
    slab_cfg = cfg.replace(J=1, N_tilde=1)
    r = int(np.log2(cfg.I))
    em = ef = bd = 0
    ber_num = ber_den = 0.0
    ader_sum = 0.0
    iters = 0
    X_hat = np.zeros_like(X)
    n_slabs = cfg.N_tilde * cfg.J
    for n_idx in range(cfg.N_tilde):
        for j_idx in range(cfg.J):
            cols = _slab_columns(n_idx, j_idx, cfg.J, cfg.M)
            res = run_stf_jabid(Y[:, cols], cb, sigma_n2, slab_cfg)
            X_hat[:, cols] = res.X_hat
            truth = gt.active_set
            em_s = len(truth - res.active_set)
            ef_s = len(res.active_set - truth)
            slab_true = gt.selections[:, n_idx : n_idx + 1, j_idx : j_idx + 1]
            bd_s = mt.bit_errors(res.selections, slab_true,
                                 truth & res.active_set, r)
            em += em_s
            ef += ef_s
            bd += bd_s
            ader_sum += (em_s + ef_s) / cfg.K
            ber_num += (em_s + ef_s) * r + bd_s
            ber_den += (gt.Ka + ef_s) * r
            iters += res.iterations
    return mt.TrialMetrics(
        nmse=mt.nmse(X_hat, X) if np.linalg.norm(X) > 0 else math.nan,
        ader=ader_sum / n_slabs,
        ber_total=ber_num / ber_den if ber_den > 0 else 0.0,
        em=em,
        ef=ef,
        bd=bd,
        iterations=round(iters / n_slabs),
    )


def _attach_cost(out: dict, cfg: SimConfig) -> dict:
    """Fill the complexity and per-trial efficiency fields."""
    for alg, m in out.items():
        m.cm = mt.complexity_count(alg, K=cfg.K, I=cfg.I, L=cfg.L, M=cfg.M,
                                   J=cfg.J, N_tilde=cfg.N_tilde, T=cfg.T0,
                                   Ka=cfg.Ka, Q=cfg.Q)
        if m.cm > 1:
            m.ec = mt.efficiency(min(m.ber_total, 1.0), m.cm)
    return out


def run_trial(cfg: SimConfig, algorithms, seed_seq) -> dict:
    """One seeded realization, every algorithm on the identical data.

    Static configurations (no Doppler, no spreading) go through the
    block-fading frame model; any Doppler or L_F > 1 switches to the exact
    doubly-selective time-domain synthesis, where only slab detectors run
    and the channel-estimate NMSE is undefined (reported as NaN).
    """
    if isinstance(seed_seq, int):
        seed_seq = np.random.SeedSequence(seed_seq)
    cb_ss, gt_ss, path_ss, noise_ss = seed_seq.spawn(4)
    cb = generate_codebook(cfg.K, cfg.I, cfg.L,
                           int(cb_ss.generate_state(1, dtype=np.uint64)[0]))
    gt = draw_ground_truth(cfg, np.random.default_rng(gt_ss))
    paths = draw_paths(cfg, np.random.default_rng(path_ss))
    noise_rng = np.random.default_rng(noise_ss)

    doubly_selective = cfg.v_max > 0 or cfg.L_F > 1
    out = {}
    if doubly_selective:
        rx = synthesize_tfst_received(cb, gt, paths, cfg, noise_rng,
                                      snr_db=cfg.effective_snr_db)
        # the single-vector slab model cannot represent the part of the
        # signal decorrelated by delay/Doppler; the detector treats that
        # ensemble-average residual as extra noise
        sigma = max(effective_noise_variance(cfg, rx.sigma_n2), 1e-12)
        R = to_angular(rx.Y, cfg.M)
        for alg in algorithms:
            if alg == "ae-jabid":
                res = run_ae_jabid(R, cb, sigma, cfg)
            elif alg == "benchmark1":
                res = run_benchmark1(R, cb, sigma, cfg)
            else:
                raise ValueError(f"{alg!r} not supported on doubly-selective runs")
            sels = res.selections.reshape(cfg.K, 1, 1)
            out[alg] = _detection_metrics(cfg, gt, res.active_set, sels,
                                          math.nan, res.iterations)
        return _attach_cost(out, cfg)

    subcarriers = cfg.n_start + np.arange(cfg.N_tilde)
    h = freq_channel_tensor(paths, subcarriers, subframe_times(cfg), cfg)
    X = assemble_X(gt, h, cfg)
    rx = synthesize_received(cb, X, cfg.effective_snr_db, noise_rng, cfg.Ka)
    sigma = max(rx.sigma_n2, 1e-12)

    for alg in algorithms:
        if alg == "stf-jabid":
            res = run_stf_jabid(rx.Y, cb, sigma, cfg)
            out[alg] = _detection_metrics(
                cfg, gt, res.active_set, res.selections,
                mt.nmse(res.X_hat, X) if gt.Ka else math.nan, res.iterations)
        elif alg == "stf-jabid-per-slab":
            out[alg] = _run_per_slab_stf(rx.Y, X, cb, sigma, cfg, gt)
        elif alg in ("ae-jabid", "benchmark1"):
            out[alg] = _run_angular(rx.Y, X, cb, sigma, cfg, gt, alg)
        elif alg == "somp":
            somp_cfg = SompConfig(noise_power=sigma,
                                  max_atoms=min(cfg.K * cfg.I, cfg.L - 1))
            res = run_somp(rx.Y, cb.phi, somp_cfg)
            active = somp_active_set(res, cfg.I)
            sels = extract_selections(res.X_hat, active, cfg.K, cfg.I,
                                      cfg.N_tilde, cfg.J, cfg.M)
            out[alg] = _detection_metrics(
                cfg, gt, active, sels,
                mt.nmse(res.X_hat, X) if gt.Ka else math.nan, res.iterations)
        else:
            raise ValueError(f"unknown algorithm {alg!r}")
    return _attach_cost(out, cfg)


def _run_angular(Y, X, cb, sigma, cfg, gt, alg):
    """Angular-domain detectors, run independently per slab and pooled."""
    runner = run_ae_jabid if alg == "ae-jabid" else run_benchmark1
    r = int(np.log2(cfg.I))
    em = ef = bd = 0
    ber_num = ber_den = 0.0
    ader_sum = 0.0
    iters = 0
    err2 = 0.0
    ref2 = 0.0
    n_slabs = cfg.N_tilde * cfg.J
    for n_idx in range(cfg.N_tilde):
        for j_idx in range(cfg.J):
            cols = _slab_columns(n_idx, j_idx, cfg.J, cfg.M)
            R = to_angular(Y[:, cols], cfg.M)
            W = to_angular(X[:, cols], cfg.M)
            res = runner(R, cb, sigma, cfg)
            truth = gt.active_set
            em_s = len(truth - res.active_set)
            ef_s = len(res.active_set - truth)
            slab_true = gt.selections[:, n_idx : n_idx + 1, j_idx : j_idx + 1]
            sels = res.selections.reshape(cfg.K, 1, 1)
            bd_s = mt.bit_errors(sels, slab_true, truth & res.active_set, r)
            em += em_s
            ef += ef_s
            bd += bd_s
            ader_sum += (em_s + ef_s) / cfg.K
            ber_num += (em_s + ef_s) * r + bd_s
            ber_den += (gt.Ka + ef_s) * r
            iters += res.iterations
            err2 += np.linalg.norm(res.W_hat - W) ** 2
            ref2 += np.linalg.norm(W) ** 2
    return mt.TrialMetrics(
        nmse=math.sqrt(err2 / ref2) if ref2 > 0 else math.nan,
        ader=ader_sum / n_slabs,
        ber_total=ber_num / ber_den if ber_den > 0 else 0.0,
        em=em,
        ef=ef,
        bd=bd,
        iterations=round(iters / n_slabs),
    )


# --------------------------------------------------------------------------
# sweeps and CSV emission
# --------------------------------------------------------------------------


def _trial_job(args):
    cfg, algorithms, entropy = args
    return run_trial(cfg, algorithms, np.random.SeedSequence(entropy))


def run_sweep(base: SimConfig, sweeps, trials: int, jobs: int = 1,
              experiment: str = "sweep") -> list:
    """Run every (sweep value, trial) and aggregate one row per
    (sweep value, algorithm). Returns the rows as dicts in CSV order."""
    if not isinstance(sweeps, (list, tuple)):
        sweeps = [sweeps]
    points = []
    sweep_index = 0
    for spec in sweeps:
        for value in spec.values:
            cfg = spec.config_for(base, value)
            problems = cfg.validate()
            if problems:
                raise ValueError("invalid config: " + "; ".join(problems))
            points.append((sweep_index, spec, value, cfg))
            sweep_index += 1

    rows = []
    for sweep_index, spec, value, cfg in points:
        jobs_args = [
            (cfg, cfg.algorithms, [base.master_seed, sweep_index, trial])
            for trial in range(trials)
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                trial_results = list(pool.map(_trial_job, jobs_args, chunksize=4))
        else:
            trial_results = [_trial_job(a) for a in jobs_args]

        name = experiment if not spec.label else f"{experiment}:{spec.label}"
        for alg in cfg.algorithms:
            per = [tr[alg] for tr in trial_results]
            nmse_vals = np.array([p.nmse for p in per])
            nmse_mean = float(np.nanmean(nmse_vals)) if not np.isnan(nmse_vals).all() else math.nan
            ber_mean = float(np.mean([p.ber_total for p in per]))
            cm = mt.complexity_count(
                alg, K=cfg.K, I=cfg.I, L=cfg.L, M=cfg.M, J=cfg.J,
                N_tilde=cfg.N_tilde, T=cfg.T0, Ka=cfg.Ka, Q=cfg.Q)
            ec = mt.efficiency(min(ber_mean, 1.0), cm)
            rows.append({
                "experiment": name,
                "algorithm": alg,
                "sweep_param": spec.parameter,
                "sweep_value": value,
                "trials": trials,
                "nmse_db_mean": (20 * math.log10(nmse_mean)
                                 if nmse_mean and not math.isnan(nmse_mean) else math.nan),
                "ader_mean": float(np.mean([p.ader for p in per])),
                "ber_total_mean": ber_mean,
                "avg_iterations": float(np.mean([p.iterations for p in per])),
                "cm": cm,
                "ec": ec,
                "master_seed": base.master_seed,
            })
    return rows


def write_csv(rows, out_path: str):
    """UTF-8 CSV with the fixed column order and stable number formatting."""
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return out_path


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf"
        return f"{v:.10g}"
    return v


def run_experiment(base: SimConfig, sweeps, out_path: str, trials: int = None,
                   jobs: int = 1, experiment: str = "sweep") -> str:
    """Run a sweep list and write one CSV; returns the written path."""
    if trials is None:
        trials = base.trials
    rows = run_sweep(base, sweeps, trials, jobs=jobs, experiment=experiment)
    return write_csv(rows, out_path)
