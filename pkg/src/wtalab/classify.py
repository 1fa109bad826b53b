"""Configuration taxonomy and convergence detection.

This module is the ground truth for "the competition is solved": a valid
output configuration has exactly one firing output when any input fires (none
otherwise), and every firing output is backed by a firing input. Convergence
time is the first frame at which the output projection is valid and then
repeats unchanged for ``t_s`` further frames; only outputs are compared, the
auxiliary neurons may do what they like.

Classifiers assume the canonical builder layout (inputs, then outputs, then
auxiliaries with the stability inhibitor first).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .builders import (
    LOG_INHIBITOR,
    SINGLE_INHIBITOR,
    TWO_INHIBITOR,
    ceil_log2,
)
from .errors import LengthMismatch, TopologyMismatch, WtaLabError

VALID_WTA = "valid_wta"
NEAR_VALID = "near_valid"
RESET = "reset"
GOOD = "good"
ACTIVE = "active"
TERMINAL = "terminal"
TYPICAL = "typical"
NEAR_STABLE_PAIR = "near_stable_pair"


def k_wta(k: int) -> str:
    return f"k_wta({k})"


def _bits(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint8)


def is_valid_wta_output(x_bits, y_bits) -> bool:
    """Output test: every winner is backed by its input and
    ``popcount(Y) == min(1, popcount(X))``."""
    x, y = _bits(x_bits), _bits(y_bits)
    if x.shape != y.shape:
        raise LengthMismatch(f"|X|={x.shape} vs |Y|={y.shape}")
    if np.any(y > x):
        return False
    return int(y.sum()) == min(1, int(x.sum()))


def _split_two(x_bits, config):
    x = _bits(x_bits)
    c = _bits(config)
    n = x.size
    if c.size != 2 * n + 2:
        raise TopologyMismatch(f"config length {c.size} != 2n+2 for n={n}")
    if np.any(c[:n] != x):
        raise TopologyMismatch("config input bits disagree with X")
    return x, c[n : 2 * n], int(c[2 * n]), int(c[2 * n + 1])


def classify_two_inhibitor(x_bits, config) -> frozenset[str]:
    """Complete label set of one two-inhibitor configuration.

    Labels can overlap: with no firing inputs the all-silent configuration is
    simultaneously valid and a reset. ``active`` covers the valid, near-valid
    and k-winner classes; ``good`` additionally covers resets; ``terminal``
    marks near-valid configurations and any with no firing outputs.
    """
    x, y, a_s, a_c = _split_two(x_bits, config)
    backed = not np.any(y > x)
    ky = int(y.sum())
    want = min(1, int(x.sum()))
    labels: set[str] = set()
    if backed and ky == want and a_c == 0 and a_s == want:
        labels.add(VALID_WTA)
    if is_valid_wta_output(x, y) and a_s == 1 and a_c == 1:
        labels.add(NEAR_VALID)
    if backed and ky >= 2 and a_s == 1 and a_c == 1:
        labels.add(k_wta(ky))
    if a_s == 0 and a_c == 0:
        labels.add(RESET)
    if labels & {VALID_WTA, NEAR_VALID} or any(l.startswith("k_wta") for l in labels):
        labels.add(ACTIVE)
    if labels:
        labels.add(GOOD)
    if NEAR_VALID in labels or ky == 0:
        labels.add(TERMINAL)
    return frozenset(labels)


def _split_log(x_bits, config):
    x = _bits(x_bits)
    c = _bits(config)
    n = x.size
    levels = ceil_log2(n) if n >= 2 else 0
    if c.size != 2 * n + 1 + levels:
        raise TopologyMismatch(
            f"config length {c.size} != 2n+1+ceil_log2(n) for n={n}"
        )
    if np.any(c[:n] != x):
        raise TopologyMismatch("config input bits disagree with X")
    return x, c[n : 2 * n], int(c[2 * n]), c[2 * n + 1 :]


def is_typical(x_bits, config) -> bool:
    """Outputs backed by inputs and the inhibitor chain is downward closed:
    ``a_s >= a_1 >= ... >= a_L``."""
    x, y, a_s, chain = _split_log(x_bits, config)
    if np.any(y > x):
        return False
    levels = np.concatenate(([a_s], chain))
    return bool(np.all(np.diff(levels.astype(np.int8)) <= 0))


def near_stable_pair(x_bits, older, latest) -> Optional[bool]:
    """Whether ``(older, latest)`` is a near-stable window of the graded net.

    Requires: exactly one output fires across the two frames (in one or
    both); the stability inhibitor fires in both; no graded inhibitor fires
    in the latest frame; outputs are input-backed in both frames. Defined
    only when at least one input fires; returns ``None`` otherwise.
    """
    x, y_new, a_s_new, chain_new = _split_log(x_bits, latest)
    _, y_old, a_s_old, _ = _split_log(x_bits, older)
    if int(x.sum()) < 1:
        return None
    if int(np.maximum(y_old, y_new).sum()) != 1:
        return False
    if not (a_s_old == 1 and a_s_new == 1):
        return False
    if np.any(chain_new != 0):
        return False
    if np.any(y_new > x) or np.any(y_old > x):
        return False
    return True


def classify_log_inhibitor(x_bits, window) -> frozenset[str]:
    """Labels for an h=2 window of the graded-inhibition network."""
    frames = np.asarray(getattr(window, "frames", window), dtype=np.uint8)
    if frames.ndim != 2 or frames.shape[0] != 2:
        raise TopologyMismatch("expected a 2-frame window")
    older, latest = frames[0], frames[1]
    labels: set[str] = set()
    if is_typical(x_bits, latest):
        labels.add(TYPICAL)
    if near_stable_pair(x_bits, older, latest):
        labels.add(NEAR_STABLE_PAIR)
    return frozenset(labels)


def is_valid_configuration(tag: str, x_bits, config) -> bool:
    """Per-family steady-state test used by exact hold computations.

    Two-inhibitor: the valid class above. Single-inhibitor: valid output
    with ``a_c = min(1, popcount(X))`` standing in for the missing stability
    inhibitor. Graded: valid output, stability inhibitor tracking the
    outputs, graded chain silent.
    """
    x = _bits(x_bits)
    want = min(1, int(x.sum()))
    if tag == TWO_INHIBITOR:
        return VALID_WTA in classify_two_inhibitor(x, config)
    if tag == SINGLE_INHIBITOR:
        c = _bits(config)
        n = x.size
        if c.size != 2 * n + 1:
            raise TopologyMismatch(f"config length {c.size} != 2n+1 for n={n}")
        y, a_c = c[n : 2 * n], int(c[2 * n])
        return is_valid_wta_output(x, y) and a_c == want
    if tag == LOG_INHIBITOR:
        _, y, a_s, chain = _split_log(x_bits, config)
        return (
            is_valid_wta_output(x, y)
            and a_s == want
            and not np.any(chain != 0)
        )
    raise WtaLabError(f"unknown variant {tag!r}")


@dataclass(frozen=True)
class ConvergenceOutcome:
    """Result of scanning one execution's output projections.

    ``converged_at`` is the first frame from which a valid output held for
    ``t_s`` further frames within the horizon, or ``None``. ``stable_for``
    counts how many consecutive repeats were actually observed from that
    frame (at least ``t_s`` when converged).
    """

    converged_at: Optional[int]
    stable_for: int
    timed_out: bool


def output_projection(frames, n: int) -> np.ndarray:
    f = np.asarray(getattr(frames, "frames", frames), dtype=np.uint8)
    return f[:, n : 2 * n]


def convergence_time(execution, input_bits, t_s: int) -> ConvergenceOutcome:
    """Earliest frame ``t`` with a valid output fixed through ``t + t_s``.

    Scans output projections only. A window that is valid for a while but
    changes before ``t_s`` repeats does not count; scanning continues. When
    no frame qualifies within the recorded horizon the outcome is a timeout.
    """
    x = _bits(input_bits)
    outs = output_projection(execution, x.size)
    total = outs.shape[0]
    start = 0
    for t in range(total):
        if t > 0 and not np.array_equal(outs[t], outs[t - 1]):
            start = t
        if t - start >= t_s and is_valid_wta_output(x, outs[start]):
            stable = t - start
            while start + stable + 1 < total and np.array_equal(
                outs[start + stable + 1], outs[start]
            ):
                stable += 1
            return ConvergenceOutcome(
                converged_at=start, stable_for=stable, timed_out=False
            )
    return ConvergenceOutcome(converged_at=None, stable_for=0, timed_out=True)
