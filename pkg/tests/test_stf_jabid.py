import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import norm

from ncim.channel import draw_paths, freq_channel_tensor
from ncim.codebook import generate_codebook
from ncim.config import SimConfig
from ncim.signal_model import (
    assemble_X,
    draw_ground_truth,
    subframe_times,
    synthesize_received,
)
from ncim.stf_jabid import (
    StfHyper,
    em_update,
    extract_selections,
    lambda_init,
    run_stf_jabid,
    stf_denoise,
)


def oracle_lambda0(K, I, L):
    """Grid search over c in (0, 10] at 1e-4 plus golden-section refinement."""
    KI = K * I

    def f(c):
        g = (1 + c * c) * norm.cdf(-c) - c * norm.pdf(c)
        return (1 - 2 * KI * g / L) / (1 + c * c - 2 * g)

    cs = np.arange(1e-4, 10.0 + 1e-4, 1e-4)
    i = int(np.argmax(f(cs)))
    lo, hi = cs[max(i - 1, 0)], cs[min(i + 1, len(cs) - 1)]
    for _ in range(120):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    return L / KI * f(0.5 * (lo + hi))


def straight_line_stf(r, phi, mu0, tau0, lam, K, I):
    """Literal extended-precision evaluation of the structured posterior."""
    Mp = r.shape[1]
    rl = r.astype(np.clongdouble)
    pl = phi.astype(np.longdouble)
    t0 = np.longdouble(tau0)
    m0 = np.clongdouble(mu0)
    mu_bar = (m0 * pl + t0 * rl) / (t0 + pl)
    tau_bar = (t0 * pl) / (t0 + pl)
    Lm = (np.log(pl / (t0 + pl)) - np.abs(rl - m0) ** 2 / (t0 + pl)
          + np.abs(rl) ** 2 / pl).reshape(K, I, Mp)
    S = np.exp(Lm).sum(axis=1)
    pi = np.empty((K, I, Mp), dtype=np.longdouble)
    for k in range(K):
        bracket = lam[k] + np.longdouble(I) ** Mp * (1 - lam[k]) * np.prod(1 / S[k])
        pi[k] = lam[k] * np.exp(Lm[k]) / (S[k][None, :] * bracket)
    pi = pi.reshape(K * I, Mp)
    x = pi * mu_bar
    v = pi * (np.abs(mu_bar) ** 2 + tau_bar) - np.abs(x) ** 2
    return (x.astype(complex), v.astype(float), pi.astype(float))


class TestLambdaInit:
    def test_frozen_oracle_value(self):
        # grid-search oracle, frozen: K=100, I=2, L=40
        assert abs(lambda_init(100, 2, 40) - 0.048660192877) < 1e-9

    def test_oracle_agreement_other_shapes(self):
        for K, I, L in [(100, 2, 30), (20, 2, 32), (50, 2, 40)]:
            assert abs(lambda_init(K, I, L) - oracle_lambda0(K, I, L)) < 1e-9

    def test_prefactor_bound(self):
        val = lambda_init(100, 2, 40)
        assert 0 < val <= 40 / 200

    def test_nondecreasing_in_L(self):
        assert lambda_init(100, 2, 80) >= lambda_init(100, 2, 40)


class TestStfDenoise:
    def test_softmax_reduction_at_unit_activity(self):
        # lambda = 1 with equal log-metrics splits belief evenly over i
        K, I, Mp = 1, 2, 3
        r = np.full((K * I, Mp), 0.7 + 0.2j)
        phi = np.full((K * I, Mp), 0.5)
        hyper = StfHyper(mu0=0j, tau0=1.0, sigma_n2=0.1, lam=np.array([1.0]))
        res = stf_denoise(r, phi, hyper, K, I)
        assert np.allclose(res.pi, 0.5, atol=1e-9)

    def test_zero_activity_zeroes_outputs(self):
        K, I, Mp = 2, 2, 2
        rng = np.random.default_rng(0)
        r = rng.standard_normal((K * I, Mp)) + 0j
        phi = np.full((K * I, Mp), 0.3)
        hyper = StfHyper(mu0=0j, tau0=1.0, sigma_n2=0.1, lam=np.zeros(K))
        res = stf_denoise(r, phi, hyper, K, I)
        assert np.all(res.pi < 1e-10)
        assert np.all(np.abs(res.x_hat) < 1e-10)
        assert np.all(np.abs(res.v_hat) < 1e-10)

    def test_matches_straight_line_oracle(self):
        rng = np.random.default_rng(1)
        K, I, Mp = 4, 4, 6
        r = rng.standard_normal((K * I, Mp)) + 1j * rng.standard_normal((K * I, Mp))
        phi = rng.uniform(0.05, 2.0, (K * I, Mp))
        mu0 = complex(rng.normal(scale=0.3), rng.normal(scale=0.3))
        tau0 = rng.uniform(0.2, 2.0)
        lam = rng.uniform(0.05, 0.95, K)
        hyper = StfHyper(mu0=mu0, tau0=tau0, sigma_n2=0.1, lam=lam)
        res = stf_denoise(r, phi, hyper, K, I)
        x_o, v_o, pi_o = straight_line_stf(r, phi, mu0, tau0, lam, K, I)
        assert np.max(np.abs(res.pi - pi_o) / np.maximum(pi_o, 1e-300)) < 1e-10
        assert np.max(np.abs(res.x_hat - x_o) / np.maximum(np.abs(x_o), 1e-300)) < 1e-10
        assert np.max(np.abs(res.v_hat - v_o) / np.maximum(v_o, 1e-300)) < 1e-10

    def test_belief_range_and_variance_positivity(self):
        rng = np.random.default_rng(2)
        K, I, Mp = 6, 2, 8
        for _ in range(20):
            r = 3 * (rng.standard_normal((K * I, Mp))
                     + 1j * rng.standard_normal((K * I, Mp)))
            phi = rng.uniform(1e-3, 5.0, (K * I, Mp))
            hyper = StfHyper(mu0=complex(rng.normal(), rng.normal()),
                             tau0=rng.uniform(0.01, 4.0), sigma_n2=0.1,
                             lam=rng.uniform(0, 1, K))
            res = stf_denoise(r, phi, hyper, K, I)
            assert np.all(res.pi >= 0) and np.all(res.pi <= 1)
            assert np.all(res.v_hat >= -1e-12)
            # with lambda = 1 the beliefs are a proper distribution over i
        hyper1 = StfHyper(mu0=0.1 + 0j, tau0=1.0, sigma_n2=0.1, lam=np.ones(K))
        res1 = stf_denoise(r, phi, hyper1, K, I)
        sums = res1.pi.reshape(K, I, Mp).sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-9)


class TestEmUpdate:
    def make_hyper(self, K):
        return StfHyper(mu0=0.2 + 0.1j, tau0=0.8, sigma_n2=0.1,
                        lam=np.full(K, 0.5))

    def test_zero_belief_zero_activity(self):
        K, I, Mp = 3, 2, 4
        pi = np.zeros((K * I, Mp))
        pi[2:] = 0.4  # devices 2, 3 get mass, device 1 none
        mu_bar = np.ones((K * I, Mp), dtype=complex)
        tau_bar = np.ones((K * I, Mp))
        hyper = em_update(pi, mu_bar, tau_bar, self.make_hyper(K), K, I)
        assert hyper.lam[0] == 0.0

    def test_saturated_belief_full_activity(self):
        K, I, Mp = 1, 2, 3
        pi = np.zeros((K * I, Mp))
        pi[0, :] = 1.0 - 1e-15  # one sequence near-certain on every column
        mu_bar = np.ones((K * I, Mp), dtype=complex)
        tau_bar = np.ones((K * I, Mp))
        hyper = em_update(pi, mu_bar, tau_bar, self.make_hyper(K), K, I)
        assert hyper.lam[0] > 1 - 1e-9

    def test_lambda_is_stationary_point(self):
        # the closed-form update zeroes the EM activity derivative, with the
        # per-column occupancy masses normalized
        rng = np.random.default_rng(3)
        for _ in range(25):
            K, I, Mp = 1, int(rng.integers(2, 5)), int(rng.integers(1, 7))
            pi = rng.uniform(0.01, 0.99, (K * I, Mp))
            mu_bar = np.ones((K * I, Mp), dtype=complex)
            tau_bar = np.ones((K * I, Mp))
            hyper = em_update(pi, mu_bar, tau_bar, self.make_hyper(K), K, I)
            p = pi.reshape(I, Mp)
            none_on = np.prod(1 - p, axis=0)
            one_on = (p / (1 - p)).sum(axis=0) * none_on
            g = one_on / (none_on + one_on)

            def deriv(lam):
                return float(np.sum(g / lam - (1 - g) / (1 - lam)))

            root = brentq(deriv, 1e-12, 1 - 1e-12, xtol=1e-15)
            assert abs(hyper.lam[0] - root) < 1e-6

    def test_moment_updates(self):
        K, I, Mp = 2, 2, 3
        rng = np.random.default_rng(4)
        pi = rng.uniform(0.1, 0.9, (K * I, Mp))
        mu_bar = rng.standard_normal((K * I, Mp)) + 1j * rng.standard_normal((K * I, Mp))
        tau_bar = rng.uniform(0.1, 1.0, (K * I, Mp))
        hyper = em_update(pi, mu_bar, tau_bar, self.make_hyper(K), K, I)
        mu_ref = (pi * mu_bar).sum() / pi.sum()
        tau_ref = (pi * (np.abs(mu_ref - mu_bar) ** 2 + tau_bar)).sum() / pi.sum()
        assert abs(hyper.mu0 - mu_ref) < 1e-12
        assert abs(hyper.tau0 - tau_ref) < 1e-12
        assert np.all((hyper.lam >= 0) & (hyper.lam <= 1))

    def test_degenerate_mass_keeps_prior_moments(self):
        K, I, Mp = 2, 2, 2
        prev = self.make_hyper(K)
        hyper = em_update(np.zeros((K * I, Mp)), np.ones((K * I, Mp), dtype=complex),
                          np.ones((K * I, Mp)), prev, K, I)
        assert hyper.mu0 == prev.mu0
        assert hyper.tau0 == prev.tau0


class TestExtractSelections:
    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        K, I, N_t, J, M = 3, 2, 2, 2, 2
        X = rng.standard_normal((K * I, N_t * J * M)) + 1j * rng.standard_normal(
            (K * I, N_t * J * M))
        active = {1, 3}
        base = extract_selections(X, active, K, I, N_t, J, M)
        scaled = extract_selections(3.7 * X, active, K, I, N_t, J, M)
        assert np.array_equal(base, scaled)
        assert np.all(base[1] == 0)  # device 2 not detected


class TestRunStfJabid:
    def run_one(self, cfg, seed):
        rng = np.random.default_rng(seed)
        cb = generate_codebook(cfg.K, cfg.I, cfg.L, seed)
        gt = draw_ground_truth(cfg, rng)
        paths = draw_paths(cfg, rng)
        subs = cfg.n_start + np.arange(cfg.N_tilde)
        h = freq_channel_tensor(paths, subs, subframe_times(cfg), cfg)
        X = assemble_X(gt, h, cfg)
        rx = synthesize_received(cb, X, cfg.snr_db, rng, cfg.Ka)
        res = run_stf_jabid(rx.Y, cb, max(rx.sigma_n2, 1e-12), cfg)
        return gt, res

    def test_high_snr_exact_recovery(self):
        cfg = SimConfig(K=20, Ka=2, M=2, I=2, L=32, J=2, N_tilde=4, snr_db=40.0)
        hits = 0
        for seed in range(20):
            gt, res = self.run_one(cfg, seed)
            ok = res.active_set == gt.active_set and all(
                np.array_equal(res.selections[k - 1], gt.selections[k - 1])
                for k in gt.active_set)
            hits += ok
        assert hits >= 19

    def test_pure_noise_detects_nothing(self):
        # sparse design regime: many more sequences than measurements
        cfg = SimConfig(K=100, Ka=0, M=2, I=2, L=32, J=1, N_tilde=2, snr_db=10.0)
        empty = 0
        n = 20
        for seed in range(n):
            gt, res = self.run_one(cfg, 100 + seed)
            empty += len(res.active_set) == 0
        assert empty >= 0.95 * n

    def test_no_active_devices_no_selections(self):
        cfg = SimConfig(K=100, Ka=0, M=2, I=2, L=32, snr_db=20.0)
        gt, res = self.run_one(cfg, 7)
        assert res.active_set == set()
        assert np.all(res.selections == 0)

    def test_shape_mismatch_rejected(self):
        cfg = SimConfig(K=4, Ka=1, M=2, I=2, L=16, J=2, N_tilde=2)
        cb = generate_codebook(cfg.K, cfg.I, cfg.L, 0)
        with pytest.raises(ValueError):
            run_stf_jabid(np.zeros((16, 4), dtype=complex), cb, 0.1, cfg)

    def test_joint_processing_beats_per_slab(self):
        # the coupling across sub-frames/subcarriers is the whole point:
        # matched seeds, same total data, aggregated bit error rate
        from ncim.harness import run_trial

        cfg = SimConfig(K=100, Ka=10, M=2, I=4, L=40, J=2, N_tilde=8,
                        snr_db=15.0,
                        algorithms=("stf-jabid", "stf-jabid-per-slab"))
        joint = slab = 0.0
        n = 25
        for t in range(n):
            out = run_trial(cfg, cfg.algorithms, np.random.SeedSequence([900, t]))
            joint += out["stf-jabid"].ber_total
            slab += out["stf-jabid-per-slab"].ber_total
        assert joint / n <= slab / n
