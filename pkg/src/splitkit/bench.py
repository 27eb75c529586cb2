"""Experiment runner: convergence, energy drift, and work-precision data.

Runs batches of (method, step size) integrations over the registered
problems and emits flat CSV for external plotting.  Costs are measured
in force evaluations, never wall clock; a second-order two-evaluation
baseline and the classical four-stage scheme provide the non-splitting
comparison points.
"""

from __future__ import annotations

import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (BlowUpError, ConfigurationError, NonFiniteStateError,
                     PreconditionError)
from .flows import Integrator, SplitSystem, as_state, build_method, integrate
from .methods import beta_to_alpha, catalog, load_spec
from .order import certify, reference_state
from .problems import make_problem

__all__ = ["ExperimentConfig", "EfficiencyPoint", "run_experiment",
           "efficiency_curve", "baseline_rk", "preset_names", "run_preset"]


# ---------------------------------------------------------------------------
# explicit Runge-Kutta baselines

_RK_TABLEAUS = {
    1: ((), (1.0,)),
    2: (((1.0,),), (0.5, 0.5)),
    4: (((0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
        (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)),
}

_RK_LABELS = {1: "euler", 2: "heun", 4: "rk4"}


class RungeKuttaIntegrator(Integrator):
    """Explicit RK step on the summed field of a split system."""

    def __init__(self, system: SplitSystem, order: int, label: str = ""):
        if order not in _RK_TABLEAUS:
            raise ConfigurationError(
                f"no baseline tableau of order {order}; have {sorted(_RK_TABLEAUS)}")
        if system.full_field is None:
            raise PreconditionError(
                f"system {system.label!r} has no full field for an RK baseline")
        self.system = system
        self.nominal_order = order
        self.label = label or _RK_LABELS[order]
        self._a, self._b = _RK_TABLEAUS[order]

    @property
    def stages(self) -> int:
        return len(self._b)

    def step(self, h: float, x: np.ndarray) -> np.ndarray:
        f = self.system.full_field
        x = as_state(x)
        ks = [f(x)]
        for row in self._a:
            y = x.copy()
            for aij, k in zip(row, ks):
                if aij != 0.0:
                    y = y + (h * aij) * k
            ks.append(f(y))
        out = x.copy()
        for bj, k in zip(self._b, ks):
            out = out + (h * bj) * k
        return out


def baseline_rk(order: int, system: SplitSystem,
                label: str = "") -> RungeKuttaIntegrator:
    """Non-splitting reference scheme of the given classical order."""
    return RungeKuttaIntegrator(system, order, label=label)


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    """One batch: a problem, methods, a step grid, and observables."""

    problem: str
    methods: list = field(default_factory=list)
    h_list: list = field(default_factory=list)
    t_end: float = 1.0
    observables: list = field(default_factory=lambda: ["energy_error"])
    problem_params: dict = field(default_factory=dict)
    x0: list | None = None
    sample_every: int = 0
    seed: int = 0
    uncertified: bool = False
    label: str = ""

    def __post_init__(self):
        self.h_list = [float(h) for h in self.h_list]
        if not self.methods:
            raise ConfigurationError("config needs at least one method")
        if not self.h_list:
            raise ConfigurationError("config needs a step-size grid")
        for h in self.h_list:
            if not (h > 0.0) or not np.isfinite(h):
                raise ConfigurationError(f"step sizes must be positive, got {h}")
        if float(self.t_end) <= 0.0:
            raise ConfigurationError("t_end must be positive")
        if int(self.sample_every) < 0:
            raise ConfigurationError("sample_every must be >= 0")

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "problem_params": dict(self.problem_params),
            "methods": list(self.methods),
            "h_list": list(self.h_list),
            "t_end": float(self.t_end),
            "observables": list(self.observables),
            "x0": None if self.x0 is None else [float(v) for v in self.x0],
            "sample_every": int(self.sample_every),
            "seed": int(self.seed),
            "uncertified": bool(self.uncertified),
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigurationError("experiment config must be a JSON object")
        known = {"problem", "problem_params", "methods", "h_list", "t_end",
                 "observables", "x0", "sample_every", "seed", "uncertified",
                 "label"}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown config fields: {sorted(extra)}")
        if "problem" not in d:
            raise ConfigurationError("config needs a problem name")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"bad config JSON: {exc}")
        return cls.from_dict(payload)


@dataclass(frozen=True)
class EfficiencyPoint:
    """Error at a fixed force-evaluation budget."""
    method: str
    evaluations: int
    error: float
    h: float


# ---------------------------------------------------------------------------
# method resolution and cost accounting

def _resolve_method(entry, system: SplitSystem, uncertified: bool) -> Integrator:
    """Turn a config entry into a bound integrator.

    Accepts baseline names (euler/heun/rk4), catalog labels, and
    ``{"file": path}`` coefficient files.  File-loaded schemes get a
    quick order check unless the config waives it.
    """
    if isinstance(entry, dict):
        path = entry.get("file")
        if path is None:
            raise ConfigurationError(f"method entry {entry!r} needs a 'file' key")
        spec = load_spec(path)
        method = build_method(spec, system,
                              label=entry.get("label") or spec.label)
        if not uncertified:
            rep = certify(_alphas_of(spec), max_order=1)
            if rep.certified_order < 1:
                raise PreconditionError(
                    f"method file {path!r} fails consistency; "
                    "pass uncertified=True to run it anyway")
        return method
    name = str(entry)
    for order, lbl in _RK_LABELS.items():
        if name == lbl:
            return baseline_rk(order, system)
    cat = catalog()
    if name in cat:
        return build_method(cat[name], system)
    raise ConfigurationError(
        f"unknown method {name!r}; catalog has {sorted(cat)} plus "
        f"{sorted(_RK_LABELS.values())}")


def _alphas_of(spec):
    from .methods import ab_to_alpha
    if spec.form == "ALPHA":
        return spec.weights
    if spec.form == "BETA":
        return beta_to_alpha(spec).weights
    return ab_to_alpha(spec).weights


def _evals_per_step(method: Integrator) -> int:
    """Force evaluations charged per step, amortized at step boundaries."""
    counter = getattr(method, "force_calls_per_step", None)
    if counter is not None:
        return max(1, counter(part=1, amortized=True))
    return method.stages


class _CountingField:
    """Wrap a callable and count invocations."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, *args):
        self.calls += 1
        return self.fn(*args)


def _audit_hooks(method: Integrator, system: SplitSystem):
    """Instrument the run's cost carriers; return the counter list.

    Splitting methods are audited on every part flow, baselines on the
    summed field, so ``sum(counts) == stages * n_steps`` must hold for
    plain (non-fused) stepping.
    """
    counters = []
    if isinstance(method, RungeKuttaIntegrator):
        c = _CountingField(system.full_field)
        system.full_field = c
        counters.append(c)
    else:
        for p in system.parts:
            c = _CountingField(p.flow.fn)
            p.flow.fn = c
            counters.append(c)
    return counters


# ---------------------------------------------------------------------------
# observables

def _observable_fns(config: ExperimentConfig, system: SplitSystem, x0):
    """Map observable names to callables ``(t, state) -> float``."""
    out = {}
    exact = getattr(system, "exact_solution", None)
    for name in config.observables:
        if name == "energy_error":
            if "H" not in system.invariants:
                raise ConfigurationError(
                    f"problem {config.problem!r} has no energy invariant")
            H = system.invariants["H"]
            H0 = H(as_state(x0))
            out[name] = lambda t, x, H=H, H0=H0: abs(H(x) - H0)
        elif name == "position_error":
            if exact is None:
                raise ConfigurationError(
                    f"problem {config.problem!r} has no exact solution for "
                    "position error")
            half = system.dim // 2
            def perr(t, x, half=half, exact=exact, x0=x0):
                ref = as_state(exact(t, x0))
                return float(np.linalg.norm(as_state(x)[:half] - ref[:half]))
            out[name] = perr
        elif name.startswith("state"):
            idx = int(name[5:])
            if not (0 <= idx < system.dim):
                raise ConfigurationError(f"state index out of range: {name}")
            out[name] = lambda t, x, i=idx: float(as_state(x)[i])
        elif name.startswith("invariant:"):
            key = name.split(":", 1)[1]
            if key not in system.invariants:
                raise ConfigurationError(
                    f"problem {config.problem!r} has no invariant {key!r}")
            fn = system.invariants[key]
            v0 = fn(as_state(x0))
            out[name] = lambda t, x, fn=fn, v0=v0: abs(fn(x) - v0)
        else:
            raise ConfigurationError(f"unknown observable {name!r}")
    return out


_DEFAULT_X0 = {
    "harmonic": (4.0, 0.0),
}


def _initial_state(config: ExperimentConfig, system: SplitSystem) -> np.ndarray:
    if config.x0 is not None:
        x0 = as_state(config.x0)
        if x0.shape != (system.dim,):
            raise ConfigurationError(
                f"x0 has dimension {x0.shape[0]}, problem needs {system.dim}")
        return x0
    if config.problem in ("kepler", "perturbed_kepler"):
        from .problems import kepler_initial_condition
        e = config.problem_params.get("e", 0.2)
        return kepler_initial_condition(float(e))
    if config.problem in _DEFAULT_X0:
        return as_state(_DEFAULT_X0[config.problem])
    raise ConfigurationError(
        f"no default initial state for {config.problem!r}; set x0")


# ---------------------------------------------------------------------------
# the runner

def _method_label(entry) -> str:
    if isinstance(entry, dict):
        return entry.get("label") or str(entry.get("file"))
    return str(entry)


def _run_unit(config: ExperimentConfig, entry, h: float) -> list[tuple]:
    """All CSV rows for one (method, h) pair."""
    # fresh problem per unit so the audit counters are private
    system = make_problem(config.problem, **config.problem_params)
    method = _resolve_method(entry, system, config.uncertified)
    label = _method_label(entry)
    x0 = _initial_state(config, system)
    obs = _observable_fns(config, system, x0)
    n_steps = max(1, int(round(config.t_end / h)))
    stride = config.sample_every if config.sample_every > 0 else n_steps
    counters = _audit_hooks(method, system)

    rows = []
    x = x0.copy()
    blown = False
    for step_no in range(1, n_steps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                x = method.step(h, x)
        except (BlowUpError, NonFiniteStateError):
            x = np.full_like(x, np.nan)
        t = step_no * h
        if not np.all(np.isfinite(x)):
            blown = True
            for name in obs:
                rows.append((label, h, step_no, t, name, float("nan"),
                             "overflow"))
            break
        if step_no % stride and step_no != n_steps:
            continue
        for name, fn in obs.items():
            rows.append((label, h, step_no, t, name, float(fn(t, x)), "ok"))
    # audited cost: every part application of a plain step is counted;
    # a blown-up final step may stop partway through its stages
    done = step_no
    total = sum(c.calls for c in counters)
    expect = method.stages * done
    ok = (total == expect if not blown
          else method.stages * (done - 1) <= total <= expect)
    if not ok:
        raise ConfigurationError(
            f"force-call audit failed for {label!r}: {total} calls over "
            f"{done} steps, expected {expect}")
    return rows


def run_experiment(config: ExperimentConfig, out=None) -> str:
    """Execute the batch and return (optionally write) the CSV text.

    Rows are ordered by the config's method and step grids regardless of
    completion order; identical configs yield byte-identical bodies.
    """
    units = [(entry, h) for entry in config.methods for h in config.h_list]
    results: dict[int, list] = {}
    with ThreadPoolExecutor(max_workers=min(4, len(units))) as pool:
        futures = {i: pool.submit(_run_unit, config, entry, h)
                   for i, (entry, h) in enumerate(units)}
        for i, fut in futures.items():
            results[i] = fut.result()

    buf = io.StringIO()
    echo = json.dumps(config.to_dict(), sort_keys=True)
    buf.write(f"# config {echo}\n")
    buf.write(f"# version {__version__}\n")
    buf.write("method,h,step,t,observable,value,status\n")
    for i in range(len(units)):
        for m, h, s, t, name, val, status in results[i]:
            buf.write(f"{m},{h:.17g},{s},{t:.17g},{name},{val:.17g},{status}\n")
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# work-precision

def efficiency_curve(problem: SplitSystem, methods, budgets, *, t_end: float,
                     x0=None, mode: str | None = None,
                     window=None) -> list[EfficiencyPoint]:
    """Error against force-evaluation budget for each method.

    For each budget the step count is the nearest whole division of the
    budget by the per-step cost, and the realized evaluation count is
    reported.  ``mode`` picks the error measure: ``"energy-window"``
    averages |H - H0| at period marks inside ``window`` (inclusive
    period indices), ``"endpoint"`` takes the final position error
    against a reference state.  The default follows the problem family:
    Kepler-like labels get the windowed energy protocol.
    """
    if mode is None:
        mode = ("energy-window" if "kepler" in problem.label else "endpoint")
    if mode not in ("energy-window", "endpoint"):
        raise ConfigurationError(f"unknown efficiency mode {mode!r}")
    if x0 is None:
        if "kepler" not in problem.label:
            raise ConfigurationError(
                f"problem {problem.label!r} needs an explicit start state")
        from .problems import kepler_initial_condition
        x0 = kepler_initial_condition(0.2)
    periods = t_end / (2.0 * np.pi)
    if mode == "energy-window":
        if window is None:
            lo = int(round(periods * 0.8)) + 1
            window = (lo, int(round(periods)))
        H = problem.invariants["H"]

    points = []
    for entry in methods:
        system = problem
        method = entry if isinstance(entry, Integrator) else _resolve_method(
            entry, system, uncertified=False)
        label = method.label or _method_label(entry)
        per_step = _evals_per_step(method)
        for budget in budgets:
            n = max(1, int(round(budget / per_step)))
            h = t_end / n
            actual = per_step * n
            start = as_state(x0)
            if mode == "energy-window":
                H0 = H(start)
                marks = _period_marks(window, h)
                err = _windowed_energy_error(method, start, h, n, marks, H, H0)
            else:
                final = integrate(method, start, h, n, keep="final").final_state
                ref = reference_state(system, start, t_end, h)
                err = float(np.linalg.norm(final - ref))
            points.append(EfficiencyPoint(label, actual, err, h))
    return points


def _period_marks(window, h: float) -> list[int]:
    lo, hi = window
    if lo > hi:
        raise ConfigurationError("empty sampling window")
    return [max(1, int(round(k * 2.0 * np.pi / h))) for k in range(lo, hi + 1)]


def _windowed_energy_error(method, x0, h, n_steps, marks, H, H0) -> float:
    want = set(marks)
    errs = []
    x = x0.copy()
    try:
        y = method.begin(h, x)
        for step_no in range(1, n_steps + 1):
            y = method.advance(h, y)
            if step_no in want:
                s = method.render(h, y)
                if not np.all(np.isfinite(s)):
                    return float("inf")
                errs.append(abs(H(s) - H0))
    except BlowUpError:
        return float("inf")
    if not errs:
        raise ConfigurationError("sampling window lies outside the run")
    return float(np.mean(errs))


# ---------------------------------------------------------------------------
# presets

def preset_names() -> tuple[str, ...]:
    return ("figure1", "figure2", "figure3", "figure4-subset")


def run_preset(name: str, out=None):
    """Run a canned experiment; returns (csv_text, assertion list).

    Each assertion is ``(description, passed, detail, gating)``; gating
    assertions decide the CLI exit code.
    """
    if name == "figure1":
        return _preset_figure1(out)
    if name == "figure2":
        return _preset_figure2(out)
    if name == "figure3":
        return _preset_figure3(out)
    if name == "figure4-subset":
        return _preset_figure4(out)
    raise ConfigurationError(
        f"unknown preset {name!r}; have {preset_names()}")


def _preset_figure1(out):
    config = ExperimentConfig(
        problem="harmonic", methods=["euler", "symplectic-euler"],
        h_list=[0.1], t_end=10.0, observables=["state0", "state1"],
        sample_every=1, label="figure1")
    text = run_experiment(config, out=out)
    radii: dict[str, list[float]] = {}
    states: dict[str, dict[int, dict[str, float]]] = {}
    for line in text.splitlines():
        if line.startswith("#") or line.startswith("method"):
            continue
        m, h, s, t, obs, val, status = line.split(",")
        states.setdefault(m, {}).setdefault(int(s), {})[obs] = float(val)
    for m, per_step in states.items():
        radii[m] = [np.hypot(v["state0"], v["state1"])
                    for _, v in sorted(per_step.items())]
    se = radii["symplectic-euler"]
    eu = radii["euler"]
    checks = [
        ("symplectic radius stays in [3.6, 4.4]",
         bool(min(se) >= 3.6 and max(se) <= 4.4),
         f"range [{min(se):.3f}, {max(se):.3f}]", True),
        ("explicit-euler radius spirals outward",
         bool(eu[-1] > 4.4 and eu[-1] > eu[0]),
         f"final radius {eu[-1]:.3f}", True),
    ]
    return text, checks


def _preset_figure2(out):
    from .problems import kepler_initial_condition
    start = [float(v) for v in kepler_initial_condition(0.6)]
    rows = []
    checks = []
    for h, periods in ((0.01, 3.0), (0.05, 15.0)):
        config = ExperimentConfig(
            problem="kepler", methods=["euler", "symplectic-euler"],
            h_list=[h], t_end=2.0 * np.pi * periods, x0=start,
            observables=["state0", "state1", "energy_error"],
            sample_every=5, label="figure2")
        rows.append(run_experiment(config))
    text = rows[0] + rows[1]
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    last_h = [float(line.split(",")[5])
              for line in rows[0].splitlines()
              if not line.startswith(("#", "method"))
              and line.split(",")[0] == "symplectic-euler"
              and line.split(",")[4] == "energy_error"]
    checks.append(("symplectic energy error bounded over 3 periods",
                   bool(max(last_h) < 0.5), f"max {max(last_h):.3f}", False))
    return text, checks


def _fit_loglog(xs, ys):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def _preset_figure3(out):
    """Long Kepler run: bounded energy error for the symplectic pair,
    growth for the one-step baselines.

    Energy rows carry the within-period maximum of |H - H0| (the error
    envelope; sampling only at period marks hits the same orbital phase
    every time and hides the oscillatory part).  Position rows hold the
    deviation from the exact orbit at the period mark.
    """
    e = 0.2
    periods = 500
    t_end = 2.0 * np.pi * periods
    specs = [
        ("euler", 2.0 * np.pi / 1500.0),
        ("heun", 2.0 * np.pi / 750.0),
        ("symplectic-euler", 2.0 * np.pi / 1500.0),
        ("strang", 2.0 * np.pi / 1500.0),
    ]
    buf = io.StringIO()
    buf.write(f"# preset figure3 eccentricity {e} periods {periods}\n")
    buf.write(f"# version {__version__}\n")
    buf.write("method,h,step,t,observable,value,status\n")
    slopes_energy = {}
    slopes_pos = {}
    for label, h in specs:
        system = make_problem("kepler")
        method = _resolve_method(label, system, uncertified=False)
        from .problems import kepler_initial_condition
        x0 = kepler_initial_condition(e)
        H = system.invariants["H"]
        H0 = H(x0)
        exact = system.exact_solution
        n = int(round(t_end / h))
        steps_per_period = n // periods
        en, pos, pd = [], [], []
        x = x0.copy()
        envelope = 0.0
        for step_no in range(1, n + 1):
            x = method.step(h, x)
            envelope = max(envelope, abs(H(x) - H0))
            if step_no % steps_per_period == 0:
                k = step_no // steps_per_period
                t = step_no * h
                ref = exact(t, x0)
                pe = float(np.linalg.norm(x[:2] - ref[:2]))
                en.append(envelope); pos.append(pe); pd.append(k)
                buf.write(f"{label},{h:.17g},{step_no},{t:.17g},"
                          f"energy_error,{envelope:.17g},ok\n")
                buf.write(f"{label},{h:.17g},{step_no},{t:.17g},"
                          f"position_error,{pe:.17g},ok\n")
                envelope = 0.0
        sel = [i for i, k in enumerate(pd) if k >= 10]
        slopes_energy[label] = _fit_loglog([pd[i] for i in sel],
                                           [max(en[i], 1e-300) for i in sel])
        slopes_pos[label] = _fit_loglog([pd[i] for i in sel],
                                        [max(pos[i], 1e-300) for i in sel])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    checks = []
    for label in ("symplectic-euler", "strang"):
        checks.append((f"{label} energy-error growth flat",
                       bool(slopes_energy[label] <= 0.1),
                       f"slope {slopes_energy[label]:.3f}", True))
        checks.append((f"{label} position-error growth linear",
                       bool(abs(slopes_pos[label] - 1.0) <= 0.25),
                       f"slope {slopes_pos[label]:.3f}", True))
    for label in ("euler", "heun"):
        checks.append((f"{label} energy-error growth at least linear",
                       bool(slopes_energy[label] >= 0.8),
                       f"slope {slopes_energy[label]:.3f}", True))
    return text, checks


def _preset_figure4(out):
    """Work-precision subset on the perturbed two-body problem."""
    eps = 1e-3
    periods = 500
    t_end = 2.0 * np.pi * periods
    system = make_problem("perturbed_kepler", eps=eps)
    from .methods import triple_jump, suzuki5
    m34 = build_method(triple_jump(2), system)
    m54 = build_method(suzuki5(), system)
    budgets = [250 * periods, 400 * periods, 640 * periods, 1000 * periods]
    pts = efficiency_curve(system, [m34, m54], budgets, t_end=t_end,
                           mode="energy-window", window=(401, 500))
    buf = io.StringIO()
    buf.write(f"# preset figure4-subset eps {eps} periods {periods}\n")
    buf.write(f"# version {__version__}\n")
    buf.write("method,h,step,t,observable,value,status\n")
    for p in pts:
        buf.write(f"{p.method},{p.h:.17g},{p.evaluations},{t_end:.17g},"
                  f"avg_energy_error,{p.error:.17g},ok\n")
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    # points come back method-major in budget order
    nb = len(budgets)
    paired = list(zip(pts[:nb], pts[nb:]))
    dominated = all(p54.error < p34.error for p34, p54 in paired)
    checks = [("five-stage curve dominates three-stage at equal cost",
               bool(dominated and nb >= 4),
               "; ".join(f"{b}: {p54.error:.2e} vs {p34.error:.2e}"
                         for b, (p34, p54) in zip(budgets, paired)),
               True)]
    return text, checks
