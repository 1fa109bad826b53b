import numpy as np
import pytest

from wtalab import (
    BernoulliInputTrace,
    ExecutionWindow,
    HorizonTooShort,
    MissingDraw,
    NetworkSpec,
    Neuron,
    RandomnessContract,
    build_two_inhibitor,
    initial_window,
    potential,
    run,
    spike_probability,
    step,
)
from wtalab.experiments import batch_convergence_times, initial_windows_batch
from wtalab.network import AUXILIARY, EXCITATORY, INPUT, OUTPUT
from wtalab.simulate import BatchRunner

from conftest import random_network


def zero_window(spec, x=None):
    frames = np.zeros((spec.history, spec.n_neurons), dtype=np.uint8)
    if x is not None:
        frames[:, spec.input_indices] = x
    return ExecutionWindow(frames)


class TestStep:
    def test_huge_bias_means_silence(self):
        neurons = (
            Neuron(0, INPUT, EXCITATORY),
            Neuron(1, OUTPUT, EXCITATORY),
            Neuron(2, AUXILIARY, EXCITATORY),
        )
        spec = NetworkSpec.from_edges(neurons, [], {1: 1e9, 2: 1e9})
        out = step(spec, zero_window(spec), [1], {1: 0.0, 2: 0.0})
        assert out.tolist() == [1, 0, 0]  # p saturates to 0, draws irrelevant

    def test_threshold_at_half(self):
        # reset configuration with a driven input puts the output at potential 0
        spec = build_two_inhibitor(1, 12.0)
        win = zero_window(spec, [1])
        assert potential(spec, win.frames, 1) == 0.0
        fired = step(spec, win, [1], {1: 0.49, 2: 0.9, 3: 0.9})
        assert fired[1] == 1
        silent = step(spec, win, [1], {1: 0.51, 2: 0.9, 3: 0.9})
        assert silent[1] == 0

    def test_valid_configuration_step_derived_probabilities(self):
        # winner y_0 with both inputs on; check each neuron against its own
        # exact probability rather than a blanket draw threshold
        spec = build_two_inhibitor(2, 12.0)
        cfg = np.zeros(6, dtype=np.uint8)
        cfg[[0, 1, 2, 4]] = 1  # x_0, x_1, y_0, a_s
        win = ExecutionWindow(cfg)
        pots = {u: potential(spec, win.frames, u) for u in (2, 3, 4, 5)}
        assert pots == {2: 12.0, 3: -12.0, 4: 6.0, 5: -6.0}
        probs = {u: spike_probability(spec, p) for u, p in pots.items()}
        # a_c's firing probability is ~0.00247, so a draw of 0.001 fires it
        out = step(spec, win, [1, 1], {u: 0.001 for u in (2, 3, 4, 5)})
        assert out.tolist() == [1, 1, 1, 0, 1, 1]
        # draws above every wrong-event probability reproduce the configuration
        out2 = step(spec, win, [1, 1], {u: 0.005 for u in (2, 3, 4, 5)})
        assert np.array_equal(out2, cfg)
        assert 0.001 < probs[5] < 0.005

    def test_missing_draw(self):
        spec = build_two_inhibitor(1, 5.0)
        with pytest.raises(MissingDraw):
            step(spec, zero_window(spec), [1], {1: 0.5, 2: 0.5})


class TestRun:
    def test_horizon_equals_history_returns_initial(self):
        spec = build_two_inhibitor(2, 8.0)
        init = zero_window(spec, [1, 0])
        ex = run(spec, init, [1, 0], 1, RandomnessContract(0))
        assert np.array_equal(ex.frames, init.frames)

    def test_horizon_below_history(self):
        spec = build_two_inhibitor(2, 8.0)
        with pytest.raises(HorizonTooShort):
            run(spec, zero_window(spec), [1, 0], 0, RandomnessContract(0))

    def test_same_seed_same_execution(self):
        spec = build_two_inhibitor(3, 9.0)
        init = zero_window(spec, [1, 1, 1])
        a = run(spec, init, [1, 1, 1], 50, RandomnessContract(4), trial=2)
        b = run(spec, init, [1, 1, 1], 50, RandomnessContract(4), trial=2)
        assert np.array_equal(a.frames, b.frames)

    def test_trial_executions_independent_of_batching(self):
        spec = build_two_inhibitor(2, 6.0)
        x = np.array([1, 1], dtype=np.uint8)
        rng = RandomnessContract(99)
        runner = BatchRunner(spec, rng)
        ids = np.arange(8, dtype=np.int64)
        frames = np.zeros((8, 1, spec.n_neurons))
        frames[:, :, :2] = 1
        for t in range(1, 30):
            frames = runner.advance(frames, t, ids, x)
        # same trials stepped one at a time
        for trial in range(8):
            init = zero_window(spec, x)
            ex = run(spec, init, x, 30, rng, trial=trial)
            assert np.array_equal(ex.frames[-1], frames[trial, -1].astype(np.uint8))

    def test_bernoulli_input_trace(self):
        spec = build_two_inhibitor(2, 6.0)
        trace = BernoulliInputTrace([0.3, 0.9])
        init = zero_window(spec)
        ex = run(spec, init, trace, 400, RandomnessContract(12), trial=0)
        rates = ex.frames[1:, :2].mean(axis=0)
        assert abs(rates[0] - 0.3) < 0.08
        assert abs(rates[1] - 0.9) < 0.08
        ex2 = run(spec, init, trace, 400, RandomnessContract(12), trial=0)
        assert np.array_equal(ex.frames, ex2.frames)


class TestMarkovProperty:
    def test_step_reads_only_last_h_frames(self, nprng):
        for _ in range(10):
            spec = random_network(nprng, history=2)
            x = (nprng.random(2) < 0.5).astype(np.uint8)
            frames = (nprng.random((5, spec.n_neurons)) < 0.5).astype(np.uint8)
            frames[:, :2] = x
            draws = {int(u): float(nprng.random()) for u in spec.non_input_indices}
            full = step(spec, ExecutionWindow(frames[-2:]), x, draws)
            mutated = frames.copy()
            mutated[0] = 1 - mutated[0]  # touch a frame older than the window
            again = step(spec, ExecutionWindow(mutated[-2:]), x, draws)
            assert np.array_equal(full, again)


class TestSymmetry:
    def test_output_permutation_commutes_with_step(self, nprng):
        n, g = 4, 9.0
        spec = build_two_inhibitor(n, g)
        for _ in range(20):
            perm = nprng.permutation(n)
            bits = (nprng.random(spec.n_neurons) < 0.5).astype(np.uint8)
            draws = nprng.random(spec.n_neurons)
            permuted = bits.copy()
            permuted[:n] = bits[:n][perm]
            permuted[n : 2 * n] = bits[n : 2 * n][perm]
            draw_map = {n + i: draws[n + i] for i in range(n)}
            draw_map.update({2 * n: draws[2 * n], 2 * n + 1: draws[2 * n + 1]})
            perm_draws = {n + i: draws[n + int(perm[i])] for i in range(n)}
            perm_draws.update({2 * n: draws[2 * n], 2 * n + 1: draws[2 * n + 1]})
            out = step(spec, ExecutionWindow(bits), bits[:n], draw_map)
            out_p = step(
                spec, ExecutionWindow(permuted), permuted[:n], perm_draws
            )
            assert np.array_equal(out_p[n : 2 * n], out[n : 2 * n][perm])
            assert np.array_equal(out_p[2 * n :], out[2 * n :])


class TestInitialPolicies:
    def test_policies(self):
        spec = build_two_inhibitor(2, 6.0)
        x = [1, 0]
        rng = RandomnessContract(3)
        zero = initial_window(spec, "all_zero", x, rng)
        assert zero.frames[0].tolist() == [1, 0, 0, 0, 0, 0]
        fire = initial_window(spec, "all_fire", x, rng)
        assert fire.frames[0].tolist() == [1, 0, 1, 1, 1, 1]
        rand1 = initial_window(spec, "uniform_random", x, rng, trial=5)
        rand2 = initial_window(spec, "uniform_random", x, rng, trial=5)
        assert np.array_equal(rand1.frames, rand2.frames)

    def test_batch_matches_single(self):
        spec = build_two_inhibitor(3, 6.0)
        x = np.array([1, 1, 0], dtype=np.uint8)
        rng = RandomnessContract(8)
        batch = initial_windows_batch(spec, "uniform_random", x, np.arange(6), rng)
        for trial in range(6):
            single = initial_window(spec, "uniform_random", x, rng, trial=trial)
            assert np.array_equal(batch[trial], single.frames)


class TestBatchScanner:
    def test_matches_reference_runs(self):
        spec = build_two_inhibitor(2, 10.0)
        x = np.array([1, 1], dtype=np.uint8)
        rng = RandomnessContract(77)
        ids = np.arange(64, dtype=np.int64)
        windows0 = initial_windows_batch(spec, "uniform_random", x, ids, rng)
        got = batch_convergence_times(spec, x, windows0, ids, 4, 60, rng)
        from wtalab import convergence_time

        for trial in ids:
            init = ExecutionWindow(windows0[trial])
            ex = run(spec, init, x, 60, rng, trial=int(trial))
            ref = convergence_time(ex, x, 4)
            expected = -1 if ref.converged_at is None else ref.converged_at
            assert got[trial] == expected
