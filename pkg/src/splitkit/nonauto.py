"""Time augmentation for split systems with explicit time dependence.

A system ``x' = f_a(x, t) + f_b(x, t)`` becomes autonomous by adjoining
two copies of time to the state.  Each part advances the base state with
its own field at one frozen copy while ticking the other copy forward,
so any fixed-coefficient composition applies unchanged.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .flows import FlowMap, Part, SplitSystem, as_state
from .problems import PROBLEMS

__all__ = ["AugmentedSystem", "augment", "driven_oscillator"]


FrozenFlow = Callable[[float, np.ndarray, float], np.ndarray]


class AugmentedSystem(SplitSystem):
    """Two-part split system over the state ``(x, t1, t2)``.

    ``base_dim`` is the dimension of ``x``; the full state appends the
    two time copies, so ``dim == base_dim + 2``.  Part 0 moves ``x``
    with the first field at frozen ``t1`` and advances ``t2`` by the
    substep duration; part 1 mirrors this with the roles swapped.  For
    any composition whose part coefficients each sum to 1, both copies
    therefore equal ``t0 + n*h`` after n steps.
    """

    def __init__(self, parts, base_dim: int, label: str = "",
                 full_field=None, invariants=None):
        super().__init__(parts, base_dim + 2, label=label,
                         full_field=full_field, invariants=invariants)
        self.base_dim = int(base_dim)

    def split_state(self, y: np.ndarray) -> tuple[np.ndarray, float, float]:
        y = as_state(y)
        d = self.base_dim
        return y[:d], float(y[d]), float(y[d + 1])

    def join_state(self, x, t1: float, t2: float) -> np.ndarray:
        return np.concatenate([as_state(x), [float(t1), float(t2)]])


def augment(field_a: Callable[[np.ndarray, float], np.ndarray] | None,
            field_b: Callable[[np.ndarray, float], np.ndarray] | None,
            flow_a: FrozenFlow | None,
            flow_b: FrozenFlow | None,
            *, base_dim: int, label: str = "augmented") -> AugmentedSystem:
    """Build the autonomous two-part extension of a time-dependent split.

    ``field_a(x, t)`` and ``field_b(x, t)`` are the two summands of the
    right-hand side; ``flow_a(h, x, tau)`` must advance ``x' = field_a(x, tau)``
    exactly over duration h with tau held fixed, likewise ``flow_b``.
    The fields may be None when only flows are needed, but both frozen
    flows are mandatory.
    """
    if flow_a is None or flow_b is None:
        raise ConfigurationError(
            "augment needs exact frozen-time flows for both parts")
    d = int(base_dim)
    if d < 1:
        raise ConfigurationError("base dimension must be positive")

    def part1_flow(h: float, y: np.ndarray) -> np.ndarray:
        y = as_state(y)
        out = np.empty_like(y)
        out[:d] = flow_a(h, y[:d], y[d])
        out[d] = y[d]
        out[d + 1] = y[d + 1] + h
        return out

    def part2_flow(h: float, y: np.ndarray) -> np.ndarray:
        y = as_state(y)
        out = np.empty_like(y)
        out[:d] = flow_b(h, y[:d], y[d + 1])
        out[d] = y[d] + h
        out[d + 1] = y[d + 1]
        return out

    def part1_field(y: np.ndarray) -> np.ndarray:
        y = as_state(y)
        out = np.zeros_like(y)
        if field_a is not None:
            out[:d] = field_a(y[:d], y[d])
        out[d + 1] = 1.0
        return out

    def part2_field(y: np.ndarray) -> np.ndarray:
        y = as_state(y)
        out = np.zeros_like(y)
        if field_b is not None:
            out[:d] = field_b(y[:d], y[d + 1])
        out[d] = 1.0
        return out

    def full(y: np.ndarray) -> np.ndarray:
        return part1_field(y) + part2_field(y)

    parts = [
        Part(FlowMap(part1_flow, label=f"{label}:a"),
             field=part1_field if field_a is not None else None),
        Part(FlowMap(part2_flow, label=f"{label}:b"),
             field=part2_field if field_b is not None else None),
    ]
    has_fields = field_a is not None and field_b is not None
    return AugmentedSystem(parts, d, label=label,
                           full_field=full if has_fields else None,
                           invariants={
                               "t1": lambda y: float(as_state(y)[d]),
                               "t2": lambda y: float(as_state(y)[d + 1]),
                           })


def driven_oscillator() -> AugmentedSystem:
    """Forced oscillator ``q'' = -q + sin(t)`` as an augmented split.

    The drift part advances position with momentum; the kick applies the
    time-dependent force at its frozen clock.  State layout is
    ``(q, p, t1, t2)``; start with both clocks at the initial time.
    The forcing is resonant, so the exact solution grows secularly.
    """

    def field_a(x, t):
        return np.array([x[1], 0.0])

    def field_b(x, t):
        return np.array([0.0, -x[0] + np.sin(t)])

    def flow_a(h, x, tau):
        return np.array([x[0] + h * x[1], x[1]])

    def flow_b(h, x, tau):
        return np.array([x[0], x[1] + h * (-x[0] + np.sin(tau))])

    sys = augment(field_a, field_b, flow_a, flow_b,
                  base_dim=2, label="driven_oscillator")

    def exact(t: float, y0) -> np.ndarray:
        q0, p0, t1, t2 = (float(v) for v in as_state(y0))
        # in absolute time: q = A cos(s) + B sin(s) - (s/2) cos(s)
        c0, s0 = np.cos(t1), np.sin(t1)
        r1 = q0 + 0.5 * t1 * c0
        r2 = p0 + 0.5 * c0 - 0.5 * t1 * s0
        a = c0 * r1 - s0 * r2
        b = s0 * r1 + c0 * r2
        s = t1 + t
        cs, ss = np.cos(s), np.sin(s)
        q = a * cs + b * ss - 0.5 * s * cs
        p = -a * ss + b * cs - 0.5 * cs + 0.5 * s * ss
        return np.array([q, p, t1 + t, t2 + t])

    sys.exact_solution = exact
    return sys


PROBLEMS["driven_oscillator"] = driven_oscillator
