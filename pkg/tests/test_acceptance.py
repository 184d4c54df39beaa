"""Acceptance suite: one test per release criterion, at fixed tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. The trend criteria use paired seeds: every compared algorithm
or configuration consumes the identical codebook, activity, channel (and,
where shapes allow, noise) realizations trial by trial.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from ncim.ae_jabid import AeHyper, ae_denoise
from ncim.channel import LinkBudget, angular_transform, snr_from_link_budget, steering_vector
from ncim.codebook import generate_codebook
from ncim.config import KMH, SimConfig
from ncim.harness import SweepSpec, run_experiment, run_trial
from ncim.metrics import complexity_count
from ncim.signal_model import draw_ground_truth
from ncim.stf_jabid import StfHyper, stf_denoise

from test_stf_jabid import straight_line_stf
from test_ae_jabid import density_oracle


def report(num, label, detail):
    print(f"[acceptance {num:02d}] {label}: {detail} PASS")


def paired_mean(cfg, algorithms, trials, seed_base, fields=("ader", "ber_total")):
    acc = {a: {f: 0.0 for f in fields} for a in algorithms}
    for t in range(trials):
        out = run_trial(cfg, algorithms, np.random.SeedSequence([seed_base, t]))
        for a in algorithms:
            for f in fields:
                acc[a][f] += getattr(out[a], f)
    return {a: {f: v / trials for f, v in d.items()} for a, d in acc.items()}


def test_criterion_01_link_budget_worked_example():
    lb = LinkBudget(P_t_dbm=14.0, h_u=100.0, r_u=500.0, eta_los=2.3,
                    eta_nlos=34.0, a=5.0188, b=0.3511, f_c_mhz=1000.0, B_s=1e7)
    snr = snr_from_link_budget(lb)
    assert abs(snr - 17.84) < 0.05
    report(1, "link budget", f"SNR = {snr:.4f} dB (target 17.84 +- 0.05)")


def test_criterion_02_on_grid_angular_peak_gain():
    worst = 0.0
    for M in (2, 8, 32):
        for m in range(1, M + 1):
            sin_theta = 2 * (m - (M + 1) / 2) / M
            spatial = np.sqrt(M) * steering_vector(np.arcsin(sin_theta), M)
            peak = np.max(np.abs(angular_transform(spatial[None, :])[0]) ** 2)
            worst = max(worst, abs(peak - M))
    assert worst < 1e-9
    report(2, "on-grid angular peak gain", f"max |peak - M| = {worst:.2e}")


def test_criterion_03_unitarity_and_noise_stats():
    rng = np.random.default_rng(42)
    X = rng.standard_normal((256, 16)) + 1j * rng.standard_normal((256, 16))
    err = abs(np.linalg.norm(angular_transform(X)) - np.linalg.norm(X))
    assert err < 1e-10
    noise = rng.standard_normal((1250, 8)) + 1j * rng.standard_normal((1250, 8))
    v_in = np.mean(np.abs(noise) ** 2)
    v_out = np.mean(np.abs(angular_transform(noise)) ** 2)
    rel = abs(v_out - v_in) / v_in
    assert rel < 0.02
    report(3, "angular transform unitarity",
           f"norm error {err:.1e}, noise variance shift {rel:.2%}")


def test_criterion_04_denoiser_oracles():
    rng = np.random.default_rng(7)
    worst_stf = worst_ae = 0.0
    n_instances = 0
    while n_instances < 10_000:
        K = int(rng.integers(1, 4))
        I = int(rng.choice([2, 4]))
        Mp = int(rng.integers(1, 9))
        n_instances += K * I * Mp
        r = rng.standard_normal((K * I, Mp)) + 1j * rng.standard_normal((K * I, Mp))
        phi = rng.uniform(0.05, 2.0, (K * I, Mp))
        mu0 = complex(rng.normal(scale=0.4), rng.normal(scale=0.4))
        tau0 = float(rng.uniform(0.2, 2.0))
        lam = rng.uniform(0.05, 0.95, K)
        rho = rng.uniform(0.02, 0.98, (K, I, Mp))

        res = stf_denoise(r, phi, StfHyper(mu0, tau0, 0.1, lam), K, I)
        x_o, v_o, pi_o = straight_line_stf(r, phi, mu0, tau0, lam, K, I)
        worst_stf = max(
            worst_stf,
            float(np.max(np.abs(res.pi - pi_o) / np.maximum(pi_o, 1e-300))),
            float(np.max(np.abs(res.x_hat - x_o) / np.maximum(np.abs(x_o), 1e-300))),
            float(np.max(np.abs(res.v_hat - v_o) / np.maximum(v_o, 1e-300))),
        )

        resa = ae_denoise(r, phi, AeHyper(mu0, tau0, 0.1, rho))
        w_o, u_o, pia_o = density_oracle(r, phi, mu0, tau0, rho.reshape(K * I, Mp))
        worst_ae = max(
            worst_ae,
            float(np.max(np.abs(resa.pi_t - pia_o) / np.abs(pia_o))),
            float(np.max(np.abs(resa.w_hat - w_o) / np.abs(w_o))),
            float(np.max(np.abs(resa.u_hat - u_o) / np.maximum(u_o, 1e-300))),
        )
    assert worst_stf < 1e-10
    assert worst_ae < 1e-10
    report(4, "denoiser oracles",
           f"{n_instances} scalar instances, max rel err "
           f"stf {worst_stf:.1e}, angular {worst_ae:.1e}")


def test_criterion_05_em_activity_stationarity():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        I = int(rng.choice([2, 4]))
        Mp = int(rng.integers(1, 9))
        pi = rng.uniform(0.01, 0.99, (I, Mp))
        # closed-form update
        odds = (pi / (1 - pi)).sum(axis=0)
        lam_closed = float((odds / (1 + odds)).mean())
        # stationary point of the EM objective derivative in lambda
        none_on = np.prod(1 - pi, axis=0)
        one_on = (pi / (1 - pi)).sum(axis=0) * none_on
        g = one_on / (none_on + one_on)

        def deriv(lam):
            return float(np.sum(g / lam - (1 - g) / (1 - lam)))

        root = brentq(deriv, 1e-12, 1 - 1e-12, xtol=1e-14)
        worst = max(worst, abs(lam_closed - root))
    assert worst < 1e-6
    report(5, "EM activity stationarity",
           f"1000 random belief tensors, max |closed - root| = {worst:.1e}")


def test_criterion_06_high_snr_recovery():
    # large-array detector
    cfg_ae = SimConfig(K=50, Ka=5, M=8, I=2, L=40, J=1, N_tilde=1,
                       snr_db=30.0, Q=3, zeta=(1.0, 0.8, 0.6),
                       algorithms=("ae-jabid",))
    n_ae = 200
    res = paired_mean(cfg_ae, ("ae-jabid",), n_ae, seed_base=600)
    ader_ae = res["ae-jabid"]["ader"]
    ber_ae = res["ae-jabid"]["ber_total"]
    assert ader_ae < 1e-2
    assert ber_ae < 1e-2

    # small-array joint detector: zero errors in >= 99% of trials
    cfg_stf = SimConfig(K=20, Ka=2, M=2, I=2, L=32, J=2, N_tilde=4,
                        snr_db=40.0, algorithms=("stf-jabid",))
    perfect = 0
    n_stf = 100
    for t in range(n_stf):
        out = run_trial(cfg_stf, ("stf-jabid",), np.random.SeedSequence([601, t]))
        m = out["stf-jabid"]
        perfect += (m.em == 0 and m.ef == 0 and m.bd == 0)
    assert perfect >= 0.99 * n_stf
    report(6, "high-SNR recovery",
           f"angular: ADER {ader_ae:.4f}, BER {ber_ae:.4f} over {n_ae} trials; "
           f"joint: {perfect}/{n_stf} error-free trials")


def test_criterion_07_joint_frame_trend():
    cfg = SimConfig(K=100, Ka=10, M=2, I=4, L=40, J=2, N_tilde=8, snr_db=15.0,
                    algorithms=("stf-jabid", "stf-jabid-per-slab", "somp"))
    res = paired_mean(cfg, cfg.algorithms, 300, seed_base=700,
                      fields=("ber_total",))
    joint = res["stf-jabid"]["ber_total"]
    slab = res["stf-jabid-per-slab"]["ber_total"]
    somp = res["somp"]["ber_total"]
    assert joint < somp
    assert joint < slab
    report(7, "joint space-time-frequency trend",
           f"BER joint {joint:.4f} < per-slab {slab:.4f}, < SOMP {somp:.4f} "
           f"(300 paired trials)")


def test_criterion_08_angular_domain_trend():
    aders = {}
    for M in (16, 32):
        cfg = SimConfig(K=100, Ka=10, M=M, I=2, L=30, J=1, N_tilde=1,
                        snr_db=5.0,
                        algorithms=("ae-jabid", "benchmark1", "somp"))
        res = paired_mean(cfg, cfg.algorithms, 300, seed_base=800,
                          fields=("ader",))
        aders[M] = {a: res[a]["ader"] for a in cfg.algorithms}
        assert aders[M]["ae-jabid"] <= aders[M]["benchmark1"]
        assert aders[M]["ae-jabid"] <= aders[M]["somp"]
    assert aders[32]["ae-jabid"] <= aders[16]["ae-jabid"]
    report(8, "angular-domain trend",
           "; ".join(
               f"M={M}: ae {v['ae-jabid']:.4f} <= b1 {v['benchmark1']:.4f}, "
               f"somp {v['somp']:.4f}" for M, v in aders.items())
           + " (300 paired trials)")


def test_criterion_09_spreading_trend():
    base = SimConfig(K=100, Ka=10, L=32, I=2, M=32, snr_db=10.0,
                     J=1, N_tilde=1, algorithms=("ae-jabid",))
    results = {}
    for v_kmh in (0.0, 180.0):
        for L_F in (1, 2, 4):
            cfg = base.replace(v_max=v_kmh * KMH, L_F=L_F)
            res = paired_mean(cfg, ("ae-jabid",), 300, seed_base=900)
            results[(v_kmh, L_F)] = res["ae-jabid"]
    fast1, fast4 = results[(180.0, 1)], results[(180.0, 4)]
    assert fast4["ader"] < fast1["ader"]
    assert fast4["ber_total"] < fast1["ber_total"]
    still = {lf: results[(0.0, lf)]["ader"] for lf in (1, 2, 4)}
    assert still[1] <= min(still.values()) + 1e-12
    report(9, "time-frequency spreading trend",
           f"at 180 km/h: ADER {fast4['ader']:.4f} < {fast1['ader']:.4f}, "
           f"BER {fast4['ber_total']:.4f} < {fast1['ber_total']:.4f}; "
           f"at 0 km/h L_F=1 best of {dict(still)} (300 paired trials)")


def test_criterion_10_deterministic_csv(tmp_path):
    cfg = SimConfig(K=12, Ka=2, M=2, I=2, L=16, snr_db=20.0,
                    algorithms=("stf-jabid", "somp"), master_seed=77)
    sweep = SweepSpec("snr_db", (15.0, 20.0))
    p1 = run_experiment(cfg, sweep, str(tmp_path / "serial.csv"), trials=3, jobs=1)
    p2 = run_experiment(cfg, sweep, str(tmp_path / "pool.csv"), trials=3, jobs=3)
    b1, b2 = open(p1, "rb").read(), open(p2, "rb").read()
    assert b1 == b2
    report(10, "deterministic CSV", f"{len(b1)} bytes identical across jobs=1/3")


def test_criterion_11_complexity_arithmetic():
    ae = complexity_count("ae-jabid", K=100, I=2, L=30, M=32,
                          J=1, N_tilde=1, T=200, Q=4)
    somp = complexity_count("somp", K=4, I=1, L=8, M=2, J=1, N_tilde=1, Ka=1)
    assert ae == pytest.approx(1.6608e8)
    assert somp == 113
    report(11, "complexity arithmetic", f"angular row {ae:.6g}, greedy row {somp}")
