"""Exact part flows, split systems, integrator steps, and compositions.

A splitting method is represented either as a flat schedule of exact-flow
applications (each entry runs one flow for ``coeff * h**h_power``) or as a
chain of complete integrators with scaled steps.  Adjoints reverse the
composition; all order-raising constructions reduce to these two shapes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    BlowUpError,
    ConfigurationError,
    ContractViolationError,
    NonFiniteStateError,
    PreconditionError,
    UnsupportedOperationError,
)


def as_state(x) -> np.ndarray:
    """Coerce ``x`` to a fresh 1-D float64 array and reject non-finite input."""
    y = np.array(x, dtype=float, copy=True)
    if y.ndim != 1:
        raise ConfigurationError(f"state must be 1-D, got shape {y.shape}")
    if y.size == 0:
        raise ConfigurationError("state must be non-empty")
    if not np.isfinite(y).all():
        raise NonFiniteStateError("state contains NaN or Inf entries")
    return y


class FlowMap:
    """Exact time-``t`` flow of a vector field, as a map on states.

    ``fn(t, y)`` must return the flowed state and satisfy the group property
    ``fn(s, fn(t, y)) == fn(s + t, y)`` up to roundoff; schedule merging and
    adjoints rely on it.
    """

    __slots__ = ("fn", "label", "part")

    def __init__(self, fn: Callable[[float, np.ndarray], np.ndarray],
                 label: str = "", part: int | None = None):
        self.fn = fn
        self.label = label
        self.part = part

    def apply(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.fn(t, y)

    __call__ = apply

    def __repr__(self):
        return f"FlowMap({self.label or self.fn!r})"


class Part:
    """One summand of a split vector field: the field and its exact flow."""

    __slots__ = ("flow", "field")

    def __init__(self, flow: FlowMap,
                 field: Callable[[np.ndarray], np.ndarray] | None = None):
        self.flow = flow
        self.field = field


class SplitSystem:
    """A vector field split into parts with exactly solvable flows.

    Parts are indexed; for mechanical problems index 0 is the kinetic/drift
    part and index 1 the potential/kick part.  ``full_field`` is the complete
    right-hand side, used by non-splitting reference schemes and consistency
    checks.  ``extra_flows`` holds auxiliary exact flows (e.g. a
    modified-force kick) keyed by role name; ``invariants`` maps observable
    labels to callables; ``epsilon`` tags near-integrable problems with their
    perturbation size.
    """

    def __init__(self, parts: Sequence[Part | FlowMap], dim: int,
                 label: str = "",
                 full_field: Callable[[np.ndarray], np.ndarray] | None = None,
                 extra_flows: Mapping[str, FlowMap] | None = None,
                 invariants: Mapping[str, Callable[[np.ndarray], float]] | None = None,
                 epsilon: float | None = None):
        norm = []
        for p in parts:
            if isinstance(p, FlowMap):
                p = Part(p)
            norm.append(p)
        if not norm:
            raise ConfigurationError("SplitSystem needs at least one part")
        self.parts = tuple(norm)
        for i, p in enumerate(self.parts):
            if p.flow.part is None:
                p.flow.part = i
        self.dim = int(dim)
        self.label = label
        self.full_field = full_field
        self.extra_flows = dict(extra_flows or {})
        self.invariants = dict(invariants or {})
        self.epsilon = epsilon

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    def flow(self, i: int) -> FlowMap:
        return self.parts[i].flow

    def field(self, i: int) -> Callable[[np.ndarray], np.ndarray] | None:
        return self.parts[i].field

    def sum_of_fields(self, x: np.ndarray) -> np.ndarray:
        total = np.zeros(self.dim)
        for p in self.parts:
            if p.field is None:
                raise PreconditionError(
                    f"part field missing on system {self.label!r}")
            total += p.field(x)
        return total

    def __repr__(self):
        return f"SplitSystem({self.label!r}, {self.n_parts} parts, dim={self.dim})"


@dataclass(frozen=True)
class ScheduleEntry:
    """One flow application: duration ``coeff * h**h_power``."""
    flow: FlowMap
    coeff: float
    h_power: int = 1
    part: int | None = None


@dataclass
class Trajectory:
    """Recorded output of :func:`integrate`."""
    times: np.ndarray
    states: np.ndarray
    invariant_series: dict[str, np.ndarray]
    h: float
    label: str = ""

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


class Integrator:
    """One-step map ``x -> step(h, x)`` plus optional run-level hooks.

    ``begin``/``advance``/``render`` let subclasses keep a transformed work
    state across a run (boundary fusing, processing) while ``step`` always
    realizes the plain one-step map.  ``stages`` counts part-flow evaluations
    per plain step.
    """

    label: str = ""
    nominal_order: int | None = None
    system: SplitSystem | None = None

    def step(self, h: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def stages(self) -> int:
        raise NotImplementedError

    def begin(self, h: float, x: np.ndarray) -> np.ndarray:
        return as_state(x)

    def advance(self, h: float, y: np.ndarray) -> np.ndarray:
        return self.step(h, y)

    def render(self, h: float, y: np.ndarray) -> np.ndarray:
        return y

    def adjoint(self) -> "Integrator":
        raise UnsupportedOperationError(
            f"no adjoint available for {type(self).__name__}")

    def is_self_adjoint(self, h: float = 0.05, x0: np.ndarray | None = None,
                        tol: float = 1e-10) -> bool:
        """Spot check time-symmetry: does step(-h) undo step(h)?"""
        if x0 is None:
            if self.system is None:
                raise PreconditionError("need a probe state or a bound system")
            x0 = 0.7 + 0.1 * np.arange(self.system.dim)
        x0 = as_state(x0)
        back = self.step(-h, self.step(h, x0.copy()))
        scale = 1.0 + float(np.abs(x0).max())
        return bool(np.abs(back - x0).max() <= tol * scale)


class SplitStepIntegrator(Integrator):
    """Integrator defined by a flat schedule of exact-flow applications.

    Zero-coefficient entries are dropped at construction so ``stages`` matches
    the cost accounting.  With ``fsal=True`` and identical first/last schedule
    flows, consecutive steps fuse the boundary applications; recorded states
    stay exact because the fuse relies only on the flow group property.
    """

    def __init__(self, entries: Sequence[ScheduleEntry],
                 system: SplitSystem | None = None, label: str = "",
                 nominal_order: int | None = None, fsal: bool = False):
        kept = []
        for e in entries:
            if not isinstance(e, ScheduleEntry):
                raise ConfigurationError(f"not a ScheduleEntry: {e!r}")
            if e.h_power < 1:
                raise ConfigurationError("h_power must be a positive integer")
            if e.coeff != 0.0:
                kept.append(e)
        if not kept:
            raise ConfigurationError("schedule has no nonzero entries")
        self._entries = tuple(kept)
        self.system = system
        self.label = label
        self.nominal_order = nominal_order
        if fsal and not self._boundary_mergeable():
            raise ConfigurationError(
                "fsal requires identical first and last schedule flows")
        self.fsal = bool(fsal)

    @property
    def entries(self) -> tuple[ScheduleEntry, ...]:
        return self._entries

    @property
    def stages(self) -> int:
        return len(self._entries)

    def _boundary_mergeable(self) -> bool:
        e = self._entries
        return (len(e) >= 2 and e[0].flow is e[-1].flow
                and e[0].h_power == e[-1].h_power)

    def step(self, h: float, x: np.ndarray) -> np.ndarray:
        for e in self._entries:
            x = e.flow.fn(e.coeff * h ** e.h_power, x)
        return x

    # Run-level hooks: with fsal, the work state carries the leading flow
    # already applied, so advance can fuse each step boundary into one call.
    def begin(self, h, x):
        x = as_state(x)
        if not self.fsal:
            return x
        e0 = self._entries[0]
        return e0.flow.fn(e0.coeff * h ** e0.h_power, x)

    def advance(self, h, y):
        if not self.fsal:
            return self.step(h, y)
        e = self._entries
        for mid in e[1:-1]:
            y = mid.flow.fn(mid.coeff * h ** mid.h_power, y)
        fused = e[-1].coeff + e[0].coeff
        return e[0].flow.fn(fused * h ** e[0].h_power, y)

    def render(self, h, y):
        if not self.fsal:
            return y
        e0 = self._entries[0]
        return e0.flow.fn(-e0.coeff * h ** e0.h_power, y)

    def adjoint(self) -> "SplitStepIntegrator":
        """Reverse the schedule.

        Valid when every entry duration is odd in h, so that negating h and
        inverting flips each factor in place.
        """
        for e in self._entries:
            if e.h_power % 2 == 0:
                raise UnsupportedOperationError(
                    "adjoint undefined for even h_power schedule entries")
        rev = tuple(reversed(self._entries))
        lbl = self.label[:-1] if self.label.endswith("*") else self.label + "*"
        return SplitStepIntegrator(rev, system=self.system, label=lbl,
                                   nominal_order=self.nominal_order,
                                   fsal=self.fsal)

    def merged(self) -> "SplitStepIntegrator":
        """Fuse adjacent entries that apply the same flow at the same power."""
        out: list[ScheduleEntry] = []
        for e in self._entries:
            if out and out[-1].flow is e.flow and out[-1].h_power == e.h_power:
                prev = out.pop()
                c = prev.coeff + e.coeff
                if c != 0.0:
                    out.append(ScheduleEntry(e.flow, c, e.h_power, e.part))
            else:
                out.append(e)
        return SplitStepIntegrator(out, system=self.system, label=self.label,
                                   nominal_order=self.nominal_order)

    def force_calls_per_step(self, part: int = 1, amortized: bool = True) -> int:
        """Count schedule applications of ``part`` per step.

        With ``amortized=True``, a schedule whose first and last entries both
        hit ``part`` is charged one fewer call, matching the long-run cost
        when step boundaries fuse.
        """
        n = sum(1 for e in self._entries if e.part == part)
        e = self._entries
        if (amortized and len(e) >= 2 and e[0].part == part
                and e[-1].part == part and e[0].h_power == e[-1].h_power):
            n -= 1
        return n

    def __repr__(self):
        return (f"SplitStepIntegrator({self.label!r}, "
                f"{len(self._entries)} entries)")


class ChainIntegrator(Integrator):
    """Sequential composition of complete integrators with step weights."""

    def __init__(self, chain: Sequence[tuple[Integrator, float]],
                 label: str = "", nominal_order: int | None = None):
        self.chain = tuple((m, float(w)) for m, w in chain)
        if not self.chain:
            raise ConfigurationError("chain needs at least one stage")
        self.label = label
        self.nominal_order = nominal_order
        self.system = self.chain[0][0].system

    @property
    def stages(self) -> int:
        return sum(m.stages for m, _ in self.chain)

    def step(self, h, x):
        for m, w in self.chain:
            x = m.step(w * h, x)
        return x

    def adjoint(self) -> "ChainIntegrator":
        rev = [(m.adjoint(), w) for m, w in reversed(self.chain)]
        lbl = self.label[:-1] if self.label.endswith("*") else self.label + "*"
        return ChainIntegrator(rev, label=lbl, nominal_order=self.nominal_order)

    def flatten(self) -> SplitStepIntegrator:
        """Expand the chain into one flat schedule.

        Every stage must itself be schedule-based.  A stage weight w rescales
        an entry of step power k by w**k.
        """
        entries: list[ScheduleEntry] = []
        for m, w in self.chain:
            try:
                inner = m.entries
            except AttributeError:
                raise UnsupportedOperationError(
                    f"cannot flatten non-schedule stage {m.label!r}")
            for e in inner:
                entries.append(ScheduleEntry(
                    e.flow, e.coeff * w ** e.h_power, e.h_power, e.part))
        return SplitStepIntegrator(entries, system=self.system,
                                   label=self.label,
                                   nominal_order=self.nominal_order)

    def force_calls_per_step(self, part: int = 1, amortized: bool = True) -> int:
        total = 0
        for m, _ in self.chain:
            total += m.force_calls_per_step(part=part, amortized=False)
        if amortized and total:
            first = self.chain[0][0]
            last = self.chain[-1][0]
            try:
                fe = first.entries[0]
                le = last.entries[-1]
            except AttributeError:
                return total
            if fe.part == part and le.part == part and fe.h_power == le.h_power:
                total -= 1
        return total


def lie_trotter(system: SplitSystem, label: str = "lie-trotter") -> SplitStepIntegrator:
    """First-order splitting: apply each part flow for time h, part 0 first."""
    if system.n_parts < 2:
        raise ConfigurationError("need at least two parts to split")
    entries = [ScheduleEntry(p.flow, 1.0, 1, i)
               for i, p in enumerate(system.parts)]
    return SplitStepIntegrator(entries, system=system, label=label,
                               nominal_order=1)


def strang(system: SplitSystem, label: str = "strang") -> SplitStepIntegrator:
    """Symmetric second-order splitting with part 0 on the outside."""
    _require_two_parts(system)
    entries = [ScheduleEntry(system.flow(0), 0.5, 1, 0),
               ScheduleEntry(system.flow(1), 1.0, 1, 1),
               ScheduleEntry(system.flow(0), 0.5, 1, 0)]
    return SplitStepIntegrator(entries, system=system, label=label,
                               nominal_order=2)


def adjoint(method: Integrator) -> Integrator:
    """Adjoint map: inverse of the method at negated step size."""
    return method.adjoint()


def _require_two_parts(system: SplitSystem):
    if system.n_parts != 2:
        raise ConfigurationError("this composition needs a two-part system")


def _canonical_ab(spec_or_pair) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Accept a coefficient spec or a raw ``(a, b)`` pair.

    Canonical layout: ``len(b) == len(a) + 1`` with ``b[0]`` applied first;
    zero entries at either end of b encode the non-symmetric arrangements.
    """
    canon = getattr(spec_or_pair, "canonical_ab", None)
    if canon is not None:
        a, b = canon()
    else:
        try:
            a, b = spec_or_pair
        except (TypeError, ValueError):
            raise ConfigurationError(
                f"expected a composition spec or (a, b) pair, got {spec_or_pair!r}")
        a = tuple(float(v) for v in a)
        b = tuple(float(v) for v in b)
    if len(b) != len(a) + 1:
        raise ConfigurationError(
            f"canonical form needs len(b) == len(a) + 1, got {len(a)}/{len(b)}")
    return a, b


def compose_ab(spec_or_pair, system: SplitSystem, *, label: str | None = None,
               nominal_order: int | None = None,
               fsal: bool = False) -> SplitStepIntegrator:
    """Interleave part-1 and part-0 flows with the given coefficients.

    Application order is ``b[0]`` first: part 1 for ``b[0] h``, part 0 for
    ``a[0] h``, part 1 for ``b[1] h``, and so on; zero coefficients cost
    nothing.
    """
    _require_two_parts(system)
    a, b = _canonical_ab(spec_or_pair)
    p0, p1 = system.flow(0), system.flow(1)
    entries = [ScheduleEntry(p1, b[0], 1, 1)]
    for j, aj in enumerate(a):
        entries.append(ScheduleEntry(p0, aj, 1, 0))
        entries.append(ScheduleEntry(p1, b[j + 1], 1, 1))
    if label is None:
        label = getattr(spec_or_pair, "label", "") or "ab-composition"
    if nominal_order is None:
        nominal_order = getattr(spec_or_pair, "claimed_order", None)
    return SplitStepIntegrator(entries, system=system, label=label,
                               nominal_order=nominal_order, fsal=fsal)


def compose_adjoint_chain(alphas_or_spec, basic: Integrator, *,
                          label: str | None = None,
                          nominal_order: int | None = None) -> ChainIntegrator:
    """Alternate the adjoint of ``basic`` and ``basic`` with scaled steps.

    The first coefficient scales the adjoint factor, the second the plain
    factor, and so on; the count must be even.  The result is kept as a
    factor-by-factor chain; ``flatten().merged()`` fuses adjacent same-part
    flows when ``basic`` is schedule-based.
    """
    alphas = getattr(alphas_or_spec, "alpha", None)
    if alphas is None:
        alphas = alphas_or_spec
    alphas = tuple(float(v) for v in alphas)
    if len(alphas) % 2 != 0:
        raise ConfigurationError("adjoint chain needs an even coefficient count")
    star = basic.adjoint()
    chain = []
    for j, al in enumerate(alphas):
        chain.append((star if j % 2 == 0 else basic, al))
    if label is None:
        label = getattr(alphas_or_spec, "label", "") or "adjoint-chain"
    if nominal_order is None:
        nominal_order = getattr(alphas_or_spec, "claimed_order", None)
    return ChainIntegrator(chain, label=label, nominal_order=nominal_order)


def compose_symmetric_of_symmetric(betas_or_spec, base: Integrator, *,
                                   label: str | None = None,
                                   nominal_order: int | None = None,
                                   check: bool = True) -> ChainIntegrator:
    """Compose scaled steps of a self-adjoint base method.

    The order-raising argument needs the base to be time-symmetric, so one
    ``step(-h) . step(h)`` spot check runs first unless ``check=False``.
    """
    betas = getattr(betas_or_spec, "beta", None)
    if betas is None:
        betas = betas_or_spec
    betas = tuple(float(v) for v in betas)
    if not betas:
        raise ConfigurationError("empty weight list")
    if check:
        if base.system is not None and not base.is_self_adjoint():
            raise ContractViolationError(
                f"base method {base.label!r} failed the self-adjoint check")
    if label is None:
        label = getattr(betas_or_spec, "label", "") or "symmetric-composition"
    if nominal_order is None:
        nominal_order = getattr(betas_or_spec, "claimed_order", None)
    return ChainIntegrator([(base, w) for w in betas], label=label,
                           nominal_order=nominal_order)


def compose_modified_potential(spec_or_stages, system: SplitSystem, *,
                               label: str | None = None,
                               nominal_order: int | None = None,
                               fsal: bool = False) -> SplitStepIntegrator:
    """Build a schedule from ``(role, coeff)`` stages.

    Roles: ``"a"`` is part 0 at step power 1, ``"b"`` part 1 at power 1, and
    ``"abb"`` the system's modified-force flow at step power 3.
    """
    _require_two_parts(system)
    stages = getattr(spec_or_stages, "stages", None)
    if stages is None or callable(stages):
        stages = spec_or_stages
    entries: list[ScheduleEntry] = []
    for role, c in stages:
        c = float(c)
        if role == "a":
            entries.append(ScheduleEntry(system.flow(0), c, 1, 0))
        elif role == "b":
            entries.append(ScheduleEntry(system.flow(1), c, 1, 1))
        elif role == "abb":
            try:
                fl = system.extra_flows["abb"]
            except KeyError:
                raise ConfigurationError(
                    f"system {system.label!r} provides no 'abb' corrector flow")
            entries.append(ScheduleEntry(fl, c, 3, None))
        else:
            raise ConfigurationError(f"unknown stage role {role!r}")
    if label is None:
        label = getattr(spec_or_stages, "label", "") or "modified-potential"
    if nominal_order is None:
        nominal_order = getattr(spec_or_stages, "claimed_order", None)
    return SplitStepIntegrator(entries, system=system, label=label,
                               nominal_order=nominal_order, fsal=fsal)


def build_method(spec_or_method, system: SplitSystem, *, fsal: bool = False,
                 label: str | None = None) -> Integrator:
    """Realize a coefficient spec as an integrator on ``system``.

    Integrators pass through unchanged.  Stage-list descriptors (role,
    coefficient pairs) build modified-potential schedules; every other
    coefficient spec builds a flat interleaved schedule through its
    canonical pair form, so conversions and cost accounting agree no
    matter which layout the coefficients arrived in.
    """
    if isinstance(spec_or_method, Integrator):
        return spec_or_method
    stages = getattr(spec_or_method, "stages", None)
    if stages is not None and not callable(stages):
        return compose_modified_potential(spec_or_method, system, fsal=fsal,
                                          label=label)
    if getattr(spec_or_method, "form", None) == "GAMMA_PROCESSOR":
        raise ConfigurationError(
            "a processor chain is not a complete method")
    return compose_ab(spec_or_method, system, fsal=fsal, label=label)


def integrate(method: Integrator, x0, h: float, n_steps: int,
              record: Sequence = (), keep: str = "all") -> Trajectory:
    """Run ``n_steps`` fixed steps, recording states and invariants.

    ``record`` lists invariant labels resolved against the method's system
    (entries may also be explicit ``(name, callable)`` pairs).  A non-finite
    state aborts the run with :class:`BlowUpError` carrying the index of the
    failing step and the last finite state.  ``keep="final"`` stores only the
    endpoint states.
    """
    if n_steps < 0:
        raise ConfigurationError("n_steps must be nonnegative")
    if keep not in ("all", "final"):
        raise ConfigurationError(f"unknown keep mode {keep!r}")
    rec: list[tuple[str, Callable]] = []
    for item in record:
        if isinstance(item, str):
            sys_ = method.system
            if sys_ is None or item not in sys_.invariants:
                raise ConfigurationError(f"unknown invariant label {item!r}")
            rec.append((item, sys_.invariants[item]))
        else:
            name, fn = item
            rec.append((name, fn))
    x0 = as_state(x0)
    h = float(h)

    y = method.begin(h, x0)
    y_prev = y.copy()
    store_all = keep == "all"
    states = [np.array(x0, copy=True)] if store_all else None
    for k in range(n_steps):
        y = method.advance(h, y)
        if not np.isfinite(y).all():
            last = method.render(h, y_prev)
            raise BlowUpError(k + 1, last)
        if store_all:
            states.append(np.array(method.render(h, y), copy=True))
        y_prev = y

    if store_all:
        snap = np.array(states)
        times = np.arange(n_steps + 1) * h
    else:
        final = np.array(method.render(h, y), copy=True)
        snap = np.array([x0, final])
        times = np.array([0.0, n_steps * h])

    series = {name: np.array([fn(s) for s in snap]) for name, fn in rec}
    return Trajectory(times=times, states=snap, invariant_series=series, h=h,
                      label=method.label)
