"""Synchronous stochastic stepping of spiking networks.

The single Markov state of a network with history ``h`` is the window of its
last ``h`` configurations. ``step`` advances one window by one configuration;
``run`` unrolls a whole execution from an initial window, drawing uniforms
from a ``RandomnessContract`` keyed by ``(trial, time, neuron)``.

``BatchRunner`` advances many trials at once with one matrix multiply per lag
per step. ``step`` and ``run`` are thin wrappers over the same code path, so
scalar and batched simulations agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import HorizonTooShort, InvalidNetwork, MissingDraw
from .network import NetworkSpec, sigmoid
from .randomness import RandomnessContract

ALL_ZERO = "all_zero"
ALL_FIRE = "all_fire"
UNIFORM_RANDOM = "uniform_random"
EXPLICIT = "explicit"

INITIAL_POLICIES = (ALL_ZERO, ALL_FIRE, UNIFORM_RANDOM, EXPLICIT)


def _as_bits(x, length: int | None = None) -> np.ndarray:
    a = np.asarray(x, dtype=np.uint8)
    if length is not None and a.shape != (length,):
        raise InvalidNetwork(f"bit vector shape {a.shape} != ({length},)")
    return a


@dataclass(frozen=True)
class ExecutionWindow:
    """The last ``h`` configurations, most recent last: the full Markov state."""

    frames: np.ndarray  # (h, N) uint8

    def __post_init__(self) -> None:
        f = np.asarray(self.frames, dtype=np.uint8)
        if f.ndim == 1:
            f = f[None, :]
        if f.ndim != 2:
            raise InvalidNetwork("window frames must be a (h, N) bit array")
        f = np.ascontiguousarray(f)
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    @property
    def h(self) -> int:
        return self.frames.shape[0]

    @property
    def latest(self) -> np.ndarray:
        return self.frames[-1]


@dataclass(frozen=True)
class Execution:
    """A recorded execution: frames 0..T-1, the trial that produced it, and
    a reference to the input trace its input bits follow."""

    frames: np.ndarray  # (T, N) uint8
    trial: int = 0
    trace: object = None

    def __post_init__(self) -> None:
        f = np.ascontiguousarray(np.asarray(self.frames, dtype=np.uint8))
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    def __len__(self) -> int:
        return self.frames.shape[0]

    def window(self, spec: NetworkSpec, t: int) -> ExecutionWindow:
        """Window of the last ``h`` frames ending at frame ``t`` inclusive."""
        h = spec.history
        if t + 1 < h:
            raise InvalidNetwork(f"frame {t} has no complete window for h={h}")
        return ExecutionWindow(self.frames[t + 1 - h : t + 1])


class FixedInputTrace:
    """Input trace holding the same input configuration at every time."""

    def __init__(self, bits):
        self.bits = _as_bits(bits)

    def bits_at(self, t: int, trials, rng: RandomnessContract, input_ids) -> np.ndarray:
        return np.broadcast_to(self.bits, (len(trials), self.bits.size))


class BernoulliInputTrace:
    """Each input fires independently at each time with its own rate.

    Bits are materialized from the same counter-based contract as the
    dynamics draws (inputs and non-inputs have disjoint neuron indices, so
    the streams never collide).
    """

    def __init__(self, rates):
        self.rates = np.asarray(rates, dtype=np.float64)

    def bits_at(self, t: int, trials, rng: RandomnessContract, input_ids) -> np.ndarray:
        draws = rng.uniform_block(trials, t, input_ids)
        return (draws < self.rates[None, :]).astype(np.uint8)


class CallableInputTrace:
    """Wrap a plain ``t -> input bits`` function."""

    def __init__(self, fn: Callable[[int], Sequence[int]]):
        self.fn = fn

    def bits_at(self, t: int, trials, rng: RandomnessContract, input_ids) -> np.ndarray:
        bits = _as_bits(self.fn(t))
        return np.broadcast_to(bits, (len(trials), bits.size))


def as_input_trace(trace) -> FixedInputTrace | BernoulliInputTrace | CallableInputTrace:
    if hasattr(trace, "bits_at"):
        return trace
    if callable(trace):
        return CallableInputTrace(trace)
    return FixedInputTrace(trace)


class BatchRunner:
    """Vectorized stepper: advances a batch of windows one step at a time.

    Frames are kept as float64 0/1 matrices so each step is a dense matrix
    multiply per lag against the weight columns of the non-input neurons.
    """

    def __init__(self, spec: NetworkSpec, rng: RandomnessContract):
        self.spec = spec
        self.rng = rng
        self.non_input = spec.non_input_indices
        self.input_ids = spec.input_indices
        self.w_cols = [
            np.ascontiguousarray(spec.weights[lag - 1][:, self.non_input])
            for lag in range(1, spec.history + 1)
        ]
        self.b = spec.biases[self.non_input].copy()

    def potentials(self, frames: np.ndarray) -> np.ndarray:
        """Potentials of all non-input neurons. ``frames``: (B, h, N) float64."""
        h = self.spec.history
        pot = -self.b[None, :].repeat(frames.shape[0], axis=0)
        for lag in range(1, h + 1):
            pot += frames[:, h - lag, :] @ self.w_cols[lag - 1]
        return pot

    def probabilities(self, frames: np.ndarray) -> np.ndarray:
        return sigmoid(self.potentials(frames) / self.spec.lam)

    def step_bits(self, frames: np.ndarray, t: int, trials, input_bits) -> np.ndarray:
        """One synchronous step. Returns the new (B, N) float64 frame.

        ``input_bits`` is the input configuration at time ``t``, either one
        vector shared by the batch or one row per trial.
        """
        p = self.probabilities(frames)
        draws = self.rng.uniform_block(trials, t, self.non_input)
        fire = draws < p
        new = np.zeros((frames.shape[0], self.spec.n_neurons))
        if self.input_ids.size:
            new[:, self.input_ids] = np.asarray(input_bits, dtype=np.float64)
        new[:, self.non_input] = fire
        return new

    def advance(self, frames: np.ndarray, t: int, trials, input_bits) -> np.ndarray:
        """Step and shift: returns the new (B, h, N) window array."""
        new = self.step_bits(frames, t, trials, input_bits)
        if self.spec.history == 1:
            return new[:, None, :]
        return np.concatenate([frames[:, 1:, :], new[:, None, :]], axis=1)


def _draws_array(spec: NetworkSpec, draws) -> np.ndarray:
    non_input = spec.non_input_indices
    if isinstance(draws, Mapping):
        try:
            return np.asarray([draws[int(u)] for u in non_input], dtype=np.float64)
        except KeyError as e:
            raise MissingDraw(f"no draw for neuron {e.args[0]}") from None
    a = np.asarray(draws, dtype=np.float64)
    if a.shape != (non_input.size,):
        raise MissingDraw(
            f"need one draw per non-input neuron ({non_input.size}), got shape {a.shape}"
        )
    return a


def step(spec: NetworkSpec, window: ExecutionWindow, next_input, draws) -> np.ndarray:
    """Advance one configuration: ``u`` fires iff ``draw(u) < p(u)``.

    ``draws`` maps each non-input neuron index to a uniform in ``[0, 1)``
    (mapping or array ordered by ``spec.non_input_indices``). Input bits are
    copied from ``next_input``. Pure function of its arguments.
    """
    frames = np.asarray(window.frames, dtype=np.float64)[None, :, :]
    if frames.shape[1] != spec.history:
        raise InvalidNetwork(
            f"window has {frames.shape[1]} frames, history is {spec.history}"
        )
    d = _draws_array(spec, draws)

    runner = BatchRunner(spec, RandomnessContract(0))
    p = runner.probabilities(frames)[0]
    new = np.zeros(spec.n_neurons, dtype=np.uint8)
    inp = spec.input_indices
    if inp.size:
        new[inp] = _as_bits(next_input, inp.size)
    new[runner.non_input] = d < p
    return new


def initial_window(
    spec: NetworkSpec,
    policy: str,
    input_trace,
    rng: RandomnessContract | None = None,
    trial: int = 0,
    explicit: ExecutionWindow | None = None,
) -> ExecutionWindow:
    """Build the h-frame starting window for one trial.

    Input bits always come from the input trace at times ``0..h-1``; the
    policy decides the non-input bits. ``uniform_random`` materializes them
    from the randomness contract at those same times, so random starts are
    reproducible per trial.
    """
    if policy == EXPLICIT:
        if explicit is None:
            raise InvalidNetwork("explicit policy needs an explicit window")
        return explicit
    if policy not in INITIAL_POLICIES:
        raise InvalidNetwork(f"unknown initial policy {policy!r}")
    h, n_all = spec.history, spec.n_neurons
    trace = as_input_trace(input_trace)
    frames = np.zeros((h, n_all), dtype=np.uint8)
    non_input = spec.non_input_indices
    for t in range(h):
        frames[t, spec.input_indices] = trace.bits_at(
            t, [trial], rng if rng is not None else RandomnessContract(0), spec.input_indices
        )[0]
        if policy == ALL_FIRE:
            frames[t, non_input] = 1
        elif policy == UNIFORM_RANDOM:
            if rng is None:
                raise InvalidNetwork("uniform_random policy needs a randomness contract")
            draws = rng.uniform_block([trial], t, non_input)[0]
            frames[t, non_input] = draws < 0.5
    return ExecutionWindow(frames)


def run(
    spec: NetworkSpec,
    initial: ExecutionWindow,
    input_trace,
    horizon: int,
    randomness: RandomnessContract,
    trial: int = 0,
) -> Execution:
    """Unroll ``horizon`` frames: frames ``0..h-1`` are the initial window,
    frame ``t >= h`` is produced by one step with draws at ``(trial, t, .)``.

    ``horizon`` counts frames, so ``horizon == h`` returns the initial window
    unchanged. The result is a pure function of the arguments: same seed,
    same execution, regardless of how other trials are scheduled.
    """
    h = spec.history
    if horizon < h:
        raise HorizonTooShort(f"horizon {horizon} < history {h}")
    frames0 = np.asarray(getattr(initial, "frames", initial), dtype=np.uint8)
    if frames0.ndim == 1:
        frames0 = frames0[None, :]
    if frames0.shape != (h, spec.n_neurons):
        raise InvalidNetwork("initial window does not match the network")
    trace = as_input_trace(input_trace)
    runner = BatchRunner(spec, randomness)
    trials = np.asarray([trial])

    frames_out = np.zeros((horizon, spec.n_neurons), dtype=np.uint8)
    frames_out[:h] = frames0
    window = np.asarray(frames0, dtype=np.float64)[None, :, :]
    for t in range(h, horizon):
        bits = trace.bits_at(t, trials, randomness, spec.input_indices)
        window = runner.advance(window, t, trials, bits)
        frames_out[t] = window[0, -1].astype(np.uint8)
    return Execution(frames=frames_out, trial=trial, trace=trace)
