"""Counter-based randomness for reproducible, order-independent simulation.

Every uniform draw is a pure function of ``(root_seed, trial, time, neuron)``,
so executions are byte-identical no matter how trials are batched, chunked or
parallelised. There is no generator state to advance: skipping a trial or
evaluating draws out of order cannot perturb any other draw.

The derivation hashes the four integers through three rounds of the
splitmix64 finalizer, then maps the top 53 bits to ``[0, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_K_SEED = np.uint64(0x9E3779B97F4A7C15)
_K_TRIAL = np.uint64(0xD1B54A32D192ED03)
_K_TIME = np.uint64(0xC2B2AE3D27D4EB4F)
_K_NEURON = np.uint64(0x165667B19E3779F9)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV_2_53 = 2.0 ** -53


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@dataclass(frozen=True)
class RandomnessContract:
    """Root seed plus the pure (trial, time, neuron) -> uniform derivation."""

    root_seed: int

    def _seed_word(self) -> np.ndarray:
        s = np.asarray([self.root_seed & _MASK64], dtype=np.uint64)
        return _mix(s * _K_SEED + _M2)

    def uniform_block(self, trials, time: int, neurons) -> np.ndarray:
        """Uniform draws in ``[0, 1)`` for a trial x neuron block at one time.

        ``trials`` and ``neurons`` are nonnegative integer arrays; the result
        has shape ``(len(trials), len(neurons))`` and entry ``[i, j]`` depends
        only on ``(root_seed, trials[i], time, neurons[j])``.
        """
        t = np.asarray(trials, dtype=np.uint64)
        u = np.asarray(neurons, dtype=np.uint64)
        tw = np.asarray([int(time) & _MASK64], dtype=np.uint64)
        a = _mix(self._seed_word() ^ (t * _K_TRIAL))
        b = _mix(a ^ (tw * _K_TIME))
        c = _mix(b[:, None] ^ (u * _K_NEURON)[None, :])
        return (c >> _S11).astype(np.float64) * _INV_2_53

    def uniform(self, trial: int, time: int, neuron: int) -> float:
        """Scalar uniform draw for one (trial, time, neuron) triple."""
        return float(self.uniform_block([trial], time, [neuron])[0, 0])
