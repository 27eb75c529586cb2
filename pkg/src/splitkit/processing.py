"""Kernel-plus-postprocessor integrators and their order conditions.

A processed method runs a cheap kernel for every step and dresses states
with a coordinate-change map only where output is sampled, so the kernel
needs to satisfy far fewer order conditions than a stand-alone scheme of
the same accuracy.  This module wires the three maps together on top of
the flows machinery and evaluates the condition residuals that certify a
(kernel, processor) pair through order five.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ConfigurationError, UnsupportedOperationError
from .flows import (Integrator, ScheduleEntry, SplitStepIntegrator, as_state,
                    compose_ab)
from .methods import CompositionSpec, ab_to_alpha, alpha_to_ab, beta_to_alpha
from .order import eval_u

__all__ = [
    "ProcessedIntegrator",
    "processed",
    "build_processor",
    "effective_order_conditions",
    "processor_conditions",
]


def _inverse_of(integ: Integrator, label: str) -> SplitStepIntegrator:
    """Invert a part-flow composition by reversing with negated durations."""
    if hasattr(integ, "flatten"):
        integ = integ.flatten()
    entries = getattr(integ, "entries", None)
    if entries is None:
        raise ConfigurationError(
            f"cannot invert {type(integ).__name__}: the map is not an "
            "explicit composition of part flows")
    rev = tuple(ScheduleEntry(e.flow, -e.coeff, e.h_power, e.part)
                for e in reversed(entries))
    return SplitStepIntegrator(rev, system=integ.system, label=label,
                               nominal_order=integ.nominal_order)


class ProcessedIntegrator(Integrator):
    """Composite map: processor o kernel^n o processor-inverse.

    The inverse runs once when a trajectory starts and the forward
    processor only where states are sampled, so an n-step run costs n
    kernel steps plus a constant.  ``step`` realizes the plain one-step
    map for callers that do not use the run hooks.
    """

    def __init__(self, kernel: Integrator, processor: Integrator,
                 processor_inverse: Integrator):
        self.kernel = kernel
        self.processor = processor
        self.processor_inverse = processor_inverse
        self.system = kernel.system
        self.label = (kernel.label or "kernel") + "+processor"
        self.nominal_order = kernel.nominal_order

    @property
    def stages(self) -> int:
        return self.kernel.stages

    def step(self, h: float, x):
        y = self.processor_inverse.step(h, as_state(x))
        y = self.kernel.step(h, y)
        return self.processor.step(h, y)

    def begin(self, h: float, x):
        return self.kernel.begin(h, self.processor_inverse.step(h, as_state(x)))

    def advance(self, h: float, y):
        return self.kernel.advance(h, y)

    def render(self, h: float, y):
        return self.processor.step(h, self.kernel.render(h, y))

    def adjoint(self) -> Integrator:
        raise UnsupportedOperationError(
            "adjoint of a processed method mixes step signs between the "
            "three maps; build it from adjoint parts instead")

    def __repr__(self):
        return f"ProcessedIntegrator({self.label!r})"


def processed(kernel: Integrator, processor: Integrator | None) -> Integrator:
    """Wrap a kernel with a processor map applied only at run boundaries.

    ``processor=None`` means the identity dressing and hands back the
    kernel object itself, unchanged.  The processor must be an explicit
    part-flow composition so its inverse exists by reversing the
    schedule with negated durations.
    """
    if processor is None:
        return kernel
    inv = _inverse_of(processor, (processor.label or "processor") + "-inverse")
    return ProcessedIntegrator(kernel, processor, inv)


def build_processor(spec: CompositionSpec, system) -> Integrator:
    """Realize processor weights as a runnable part-flow composition.

    Processor weight lists deliberately sum to zero, so they are not
    complete methods and the generic method builder refuses them; this
    is the sanctioned path.  Plain alternating-weight specs pass through
    the same conversion.
    """
    if spec.form == "BETA":
        spec = beta_to_alpha(spec)
    if spec.form not in ("ALPHA", "GAMMA_PROCESSOR"):
        raise ConfigurationError(
            f"expected an alternating weight list, got form {spec.form}")
    ab = alpha_to_ab(spec)
    integ = compose_ab(ab, system)
    integ.label = spec.label or "processor"
    return integ


def _alpha_weights(arg, what: str) -> tuple[float, ...]:
    if isinstance(arg, CompositionSpec):
        if arg.form in ("ALPHA", "GAMMA_PROCESSOR"):
            w = arg.weights
        elif arg.form == "BETA":
            w = beta_to_alpha(arg).weights
        else:
            w = ab_to_alpha(arg).weights
        return tuple(float(x) for x in w)
    w = tuple(float(x) for x in arg)
    if not w or len(w) % 2:
        raise ConfigurationError(
            f"{what} weights must form a non-empty even-length list")
    return w


def effective_order_conditions(kernel_alphas, target: int = 4) -> dict:
    """Residuals a kernel must zero to reach the target order processed.

    Only single-index conditions through the target weight remain once a
    processor is allowed to absorb the rest; the weight-5 set adds one
    mixed combination.  Keys name the condition polynomial, values are
    the residuals (the weight-1 entry is measured against 1).
    """
    if target not in (4, 5):
        raise ConfigurationError(f"target order must be 4 or 5, got {target}")
    al = _alpha_weights(kernel_alphas, "kernel")
    u = lambda *idx: eval_u(idx, al)
    out = {
        "u1": u(1) - 1.0,
        "u2": u(2),
        "u3": u(3),
        "u4": u(4),
    }
    if target == 5:
        out["u5"] = u(5)
        out["u23"] = u(2, 3)
        out["2*u122+u14-u12^2"] = (2.0 * u(1, 2, 2) + u(1, 4)
                                   - u(1, 2) ** 2)
    return out


def processor_conditions(kernel_alphas, processor_gammas,
                         target: int = 4) -> dict:
    """Residuals tying processor weights to a given kernel.

    The processor cancels the kernel's remaining error terms, so each
    residual combines a processor weight function with the kernel terms
    it must cancel; all zero (with the kernel passing its own effective
    set) certifies the processed pair at the target order.
    """
    if target not in (4, 5):
        raise ConfigurationError(f"target order must be 4 or 5, got {target}")
    al = _alpha_weights(kernel_alphas, "kernel")
    ga = _alpha_weights(processor_gammas, "processor")
    uk = lambda *idx: eval_u(idx, al)
    up = lambda *idx: eval_u(idx, ga)
    out = {
        "u1(p)": up(1),
        "u2(p)+u12(k)": up(2) + uk(1, 2),
        "u3(p)+u13(k)": up(3) + uk(1, 3),
        "u12(p)+u112(k)-u12(k)/2": up(1, 2) + uk(1, 1, 2)
                                   - 0.5 * uk(1, 2),
    }
    if target == 5:
        out["u4(p)+u14(k)"] = up(4) + uk(1, 4)
        out["u13(p)+u113(k)-u13(k)/2"] = up(1, 3) + uk(1, 1, 3) \
            - 0.5 * uk(1, 3)
        out["u112(p)+u1112(k)-u112(k)/2+u12(k)/12"] = (
            up(1, 1, 2) + uk(1, 1, 1, 2) - 0.5 * uk(1, 1, 2)
            + uk(1, 2) / 12.0)
    return out
