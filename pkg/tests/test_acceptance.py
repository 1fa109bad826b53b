"""Acceptance suite: one test per top-level criterion, at full scale.

Each test prints a single ``criterion k: PASS`` line (visible under
``pytest -v -s``) and enforces its runtime budget. Statistical criteria use
fixed seeds, so outcomes are reproducible bit for bit.
"""

import math
import time

import numpy as np

from wtalab import (
    RandomnessContract,
    TrialPlan,
    WtaInstance,
    build_log_inhibitor,
    build_two_inhibitor,
    convergence_cdf,
    lemma_check,
    potential,
    rescale_temperature,
    run,
    run_trials,
    self_stabilization_probe,
    spike_probability,
    wilson_interval,
)
from wtalab.experiments import batch_convergence_times, initial_windows_batch
from wtalab.lemmas import GROUP_IDS
from wtalab.simulate import BatchRunner

from conftest import random_network


def _announce(k: int, passed: bool, detail: str) -> None:
    print(f"criterion {k}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, detail


def _close(value, expect, gamma) -> bool:
    return abs(value - expect) <= 1e-9 * max(1.0, abs(expect), gamma)


class TestCriterion1ExactPotentials:
    def test_exact_lemma_table(self):
        t0 = time.monotonic()
        checks = 0
        for g in (14.0, 4.0 * math.log(1000.0) + 10.0):
            n = 4
            spec = build_two_inhibitor(n, g)
            base = np.zeros(2 * n + 2, dtype=np.uint8)
            base[:n] = 1
            # winner backed by its input, stability inhibitor alone
            w1 = base.copy()
            w1[[n, 2 * n]] = 1
            assert _close(potential(spec, w1[None, :], n), g, g)
            # winner under both inhibitors sits exactly at zero
            w2 = w1.copy()
            w2[2 * n + 1] = 1
            assert _close(potential(spec, w2[None, :], n), 0.0, g)
            # silent-input outputs never exceed -gamma, all local states
            for y in (0, 1):
                for a_s in (0, 1):
                    for a_c in (0, 1):
                        w3 = np.zeros(2 * n + 2, dtype=np.uint8)
                        w3[n] = y
                        w3[2 * n] = a_s
                        w3[2 * n + 1] = a_c
                        pot = potential(spec, w3[None, :], n)
                        assert pot <= -g + 1e-9 * g
                        checks += 1
            # inhibitor potentials with exactly one firing output
            w4 = base.copy()
            w4[n] = 1
            assert _close(potential(spec, w4[None, :], 2 * n), g / 2, g)
            assert _close(potential(spec, w4[None, :], 2 * n + 1), -g / 2, g)
            checks += 4

        g = 20.0
        log_spec = build_log_inhibitor(8, g)
        for level in (1, 2, 3):
            frames = np.zeros((2, log_spec.n_neurons), dtype=np.uint8)
            frames[:, 0] = 1
            frames[:, 8] = 1  # winner fires in both frames
            frames[1, 16] = 1  # stability inhibitor in the latest
            frames[1, 17 : 17 + level] = 1
            pot = potential(log_spec, frames, 8)
            expect = -level * math.log(2.0)
            assert abs(pot - expect) <= 1e-9 * max(1.0, abs(expect), g)
            p = spike_probability(log_spec, pot)
            assert abs(p - 1.0 / (1.0 + 2.0 ** level)) <= 1e-9
            checks += 2
        elapsed = time.monotonic() - t0
        assert elapsed < 1.0
        _announce(1, True, f"{checks} exact potentials, {elapsed:.2f}s")


class TestCriterion2OracleEquivalence:
    def test_monte_carlo_inside_wilson_of_exact(self):
        t0 = time.monotonic()
        t_s, trials = 3, 100_000
        probes = (1, 5, 10, 20)
        worst = None
        for n in (1, 2, 3):
            for g in (6.0, 10.0):
                spec = build_two_inhibitor(n, g)
                x = np.ones(n, dtype=np.uint8)
                init = np.zeros((1, 2 * n + 2), dtype=np.uint8)
                init[0, :n] = 1
                cdf = convergence_cdf(spec, x, init, t_s, max(probes))
                rng = RandomnessContract(2000 + n * 10 + int(g))
                ids = np.arange(trials, dtype=np.int64)
                windows0 = initial_windows_batch(spec, "all_zero", x, ids, rng)
                conv = batch_convergence_times(
                    spec, x, windows0, ids, t_s, max(probes) + t_s + 1, rng
                )
                for t in probes:
                    hits = int(((conv >= 0) & (conv + t_s <= t)).sum())
                    lo, hi = wilson_interval(hits, trials, 0.999)
                    # 1e-12 absorbs float residue in the interval endpoints
                    inside = lo - 1e-12 <= cdf[t] <= hi + 1e-12
                    gap = max(lo - cdf[t], cdf[t] - hi)
                    if worst is None or gap > worst[0]:
                        worst = (gap, n, g, t)
                    assert inside, (n, g, t, lo, cdf[t], hi)
        elapsed = time.monotonic() - t0
        assert elapsed < 120.0
        _announce(2, True, f"24 checkpoints inside 99.9% intervals, {elapsed:.1f}s")


class TestCriterion3HighProbabilityRegime:
    def test_two_inhibitor_success_fraction(self):
        t0 = time.monotonic()
        t_s, delta, trials = 10, 0.1, 2000
        results = []
        for n in (8, 64, 256):
            inst = WtaInstance.for_theorem(
                "two_inhibitor", "high_probability", n, t_s=t_s, delta=delta
            )
            for policy in ("uniform_random", "all_fire"):
                plan = TrialPlan(
                    instance=inst, initial_policy=policy, trials=trials,
                    seed=3000 + n, horizon=inst.t_c + inst.t_s + 1,
                )
                s = run_trials(plan)
                lo, hi = s.wilson
                half = (hi - lo) / 2.0
                ok = s.success_frac >= (1.0 - delta) - half
                results.append((n, policy, s.success_frac, ok))
                assert ok, (n, policy, s.success_frac)
        elapsed = time.monotonic() - t0
        assert elapsed < 600.0
        frac_min = min(r[2] for r in results)
        _announce(3, True, f"6 cells, min success {frac_min:.4f}, {elapsed:.1f}s")


class TestCriterion4ExpectedTimeRegime:
    def test_two_inhibitor_mean_convergence(self):
        t0 = time.monotonic()
        t_s, trials = 10, 1000
        means = {}
        for n in (16, 64, 1024):
            inst = WtaInstance.for_theorem(
                "two_inhibitor", "expected_time", n, t_s=t_s
            )
            plan = TrialPlan(instance=inst, trials=trials, seed=4000 + n)
            s = run_trials(plan)
            assert s.timeouts == 0
            means[n] = s.mean_tconv
            assert s.mean_tconv <= 108.0 * (math.log2(n) + 3)
        ordered = [means[n] for n in (16, 64, 1024)]
        assert ordered == sorted(ordered)  # sweep column is nondecreasing
        growth = means[1024] / means[16]
        envelope = math.log2(1024) * 2.0 / math.log2(16)
        assert growth <= envelope
        elapsed = time.monotonic() - t0
        assert elapsed < 600.0
        _announce(
            4, True,
            f"means {means[16]:.1f}/{means[64]:.1f}/{means[1024]:.1f}, "
            f"growth {growth:.2f} <= {envelope:.1f}, {elapsed:.1f}s",
        )


class TestCriterion5ConstantTimeRegime:
    def test_log_inhibitor_means_and_success(self):
        t0 = time.monotonic()
        t_s, delta, trials = 10, 0.1, 1000
        means = {}
        for n in (16, 256, 1024):
            inst = WtaInstance.for_theorem(
                "log_inhibitor", "high_probability", n, t_s=t_s, delta=delta
            )
            plan = TrialPlan(
                instance=inst, trials=trials, seed=5000 + n,
                horizon=inst.t_c + inst.t_s + 1,
            )
            s = run_trials(plan)
            means[n] = s.mean_tconv
            assert s.mean_tconv <= 4001.0
            assert s.success_frac >= 1.0 - delta
        spread = max(means.values()) / min(means.values())
        assert spread <= 2.0
        elapsed = time.monotonic() - t0
        assert elapsed < 900.0
        _announce(
            5, True,
            f"means {means[16]:.1f}/{means[256]:.1f}/{means[1024]:.1f}, "
            f"spread {spread:.2f} <= 2, {elapsed:.1f}s",
        )


def _measure_hold(spec, x, window, t_s, trials, seed, anchor_initial: bool):
    """Fraction of trials whose output projection stays pinned.

    ``anchor_initial`` compares every stepped frame to the starting output;
    otherwise frames after the first step must repeat the first step's output
    and that output must be a valid configuration for ``x``.
    """
    rng = RandomnessContract(seed)
    runner = BatchRunner(spec, rng)
    ids = np.arange(trials, dtype=np.int64)
    n = x.size
    h = spec.history
    frames = np.broadcast_to(
        window.astype(np.float64), (trials, h, spec.n_neurons)
    ).copy()
    anchor = np.broadcast_to(window[-1, n : 2 * n], (trials, n)) if anchor_initial else None
    ok = np.ones(trials, dtype=bool)
    steps = t_s if anchor_initial else t_s + 1
    for k in range(steps):
        frames = runner.advance(frames, h + k, ids, x)
        out = frames[:, -1, n : 2 * n].astype(np.uint8)
        if anchor is None:
            want = min(1, int(x.sum()))
            valid = (~np.any(out > x[None, :], axis=1)) & (out.sum(axis=1) == want)
            anchor = out.copy()
            ok &= valid
        else:
            ok &= np.all(out == anchor, axis=1)
    return float(ok.mean())


class TestCriterion6Stability:
    def test_hold_probabilities(self):
        t0 = time.monotonic()
        n, t_s, trials, delta = 64, 100, 5000, 0.1

        g_t = 4.0 * math.log((n + 2) * t_s / delta) + 10.0
        spec_t = build_two_inhibitor(n, g_t)
        x = np.ones(n, dtype=np.uint8)
        win_t = np.zeros((1, 2 * n + 2), dtype=np.uint8)
        win_t[0, :n] = 1
        win_t[0, n] = 1      # winner y_0
        win_t[0, 2 * n] = 1  # stability inhibitor
        frac_t = _measure_hold(spec_t, x, win_t, t_s, trials, 600, anchor_initial=True)
        bound_t = 1.0 - t_s * (n + 2) * math.exp(-g_t / 2)
        lo, hi = wilson_interval(round(frac_t * trials), trials, 0.99)
        assert frac_t >= bound_t - (hi - lo) / 2.0

        g_l = 12.0 * math.log(39.0 * t_s * n / delta)
        spec_l = build_log_inhibitor(n, g_l)
        win_l = np.zeros((2, spec_l.n_neurons), dtype=np.uint8)
        win_l[:, :n] = 1
        win_l[0, n] = 1       # winner fired in the older frame only
        win_l[:, 2 * n] = 1   # stability inhibitor in both frames
        frac_l = _measure_hold(spec_l, x, win_l, t_s, trials, 601, anchor_initial=False)
        bound_l = 1.0 - 3.0 * t_s * n * math.exp(-g_l / 2)
        lo, hi = wilson_interval(round(frac_l * trials), trials, 0.99)
        assert frac_l >= bound_l - (hi - lo) / 2.0

        elapsed = time.monotonic() - t0
        assert elapsed < 300.0
        _announce(6, True, f"hold {frac_t:.4f} (T), {frac_l:.4f} (L), {elapsed:.1f}s")


class TestCriterion7TemperatureEquivalence:
    def test_bit_identical_executions(self):
        t0 = time.monotonic()
        gen = np.random.default_rng(7777)
        for i in range(100):
            spec = random_network(gen)
            x = (gen.random(2) < 0.5).astype(np.uint8)
            init = np.zeros((spec.history, spec.n_neurons), dtype=np.uint8)
            init[:, :2] = x
            rng = RandomnessContract(70_000 + i)
            base = run(spec, init, x, 20, rng, trial=i)
            for lam_hat in (0.5, 2.0, 10.0):
                other = run(
                    rescale_temperature(spec, lam_hat), init, x, 20, rng, trial=i
                )
                assert np.array_equal(base.frames, other.frames), (i, lam_hat)
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0
        _announce(7, True, f"100 networks x 3 temperatures, {elapsed:.1f}s")


class TestCriterion8SelfStabilization:
    def test_adversarial_perturbations(self):
        t0 = time.monotonic()
        t_s, delta, trials = 10, 0.1, 1000
        inst = WtaInstance.for_theorem(
            "two_inhibitor", "high_probability", 64, t_s=t_s, delta=delta
        )
        plan = TrialPlan(
            instance=inst, trials=trials, seed=800,
            horizon=inst.t_c + inst.t_s + 1,
        )
        probe = self_stabilization_probe(plan, perturbations=5)
        fractions = probe.reconvergence_fractions()
        assert len(fractions) == 5
        for frac in fractions:
            assert frac >= 1.0 - delta
        elapsed = time.monotonic() - t0
        assert elapsed < 300.0
        _announce(
            8, True,
            f"reconvergence {min(fractions):.3f}..{max(fractions):.3f}, {elapsed:.1f}s",
        )


class TestCriterion9LemmaCatalog:
    def test_every_check_at_full_samples(self):
        t0 = time.monotonic()
        failures = []
        count = 0
        for gid in GROUP_IDS:
            for r in lemma_check(gid, n=8, gamma=14.0, samples=100_000, seed=900):
                count += 1
                if not r.passed:
                    failures.append((r.lemma_id, r.frequency, r.bound))
        exact_39 = lemma_check("3.9.2", n=8, gamma=14.0, samples=100_000, seed=901)[0]
        sigma = math.sqrt(0.25 / 100_000)
        assert abs(exact_39.frequency - 0.5) <= 3 * sigma
        for level in (1, 2, 3):
            r = lemma_check(
                "5.8.2", n=8, gamma=14.0, samples=100_000, seed=902, level=level
            )[0]
            p = 1.0 / (1.0 + 2.0 ** level)
            assert abs(r.frequency - p) <= 3 * math.sqrt(p * (1 - p) / 100_000)
        elapsed = time.monotonic() - t0
        assert not failures, failures
        assert elapsed < 600.0
        _announce(9, True, f"{count} checks green, {elapsed:.1f}s")
