"""Model problems with exactly solvable part flows.

Each constructor returns a :class:`~splitkit.flows.SplitSystem` (or the
:class:`HamiltonianProblem` refinement) whose parts carry both the vector
field and its exact flow, so any splitting schedule built on top of them
incurs no inner discretization error.  Mechanical states use the canonical
flat layout ``(q_1..q_d, p_1..p_d)``.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    NumericError,
    SingularityError,
    UnsupportedOperationError,
)
from .flows import FlowMap, Part, SplitSystem


class HamiltonianProblem(SplitSystem):
    """Separable mechanical system ``H = T(p) + V(q)`` on a flat state.

    Beyond the split parts this carries the Hamiltonian itself (always
    registered as invariant ``"H"``), the degree-of-freedom count, an
    optional exact solution map ``(t, x0) -> x(t)``, and an optional
    canonical initial-condition constructor.
    """

    def __init__(self, parts: Sequence[Part | FlowMap], dim: int,
                 hamiltonian: Callable[[np.ndarray], float], label: str = "",
                 exact_solution: Callable | None = None,
                 initial_condition: Callable | None = None, **kw):
        inv = dict(kw.pop("invariants", None) or {})
        inv.setdefault("H", hamiltonian)
        super().__init__(parts, dim, label=label, invariants=inv, **kw)
        if dim % 2:
            raise ConfigurationError("phase space dimension must be even")
        self.hamiltonian = hamiltonian
        self.dof = dim // 2
        self.exact_solution = exact_solution
        self.initial_condition = initial_condition


class RknProblem(SplitSystem):
    """Second-order system ``y'' = g(y)`` embedded as ``(y, v)`` phase space.

    Part 0 is the free drift ``(y + t v, v)`` and part 1 the kick
    ``(y, v + t g(y))``.  When the Jacobian of ``g`` is supplied, the extra
    flow ``"abb"`` advances ``v`` along the modified force
    ``2 g'(y) g(y)``, which commutes with the plain kick.
    """

    def __init__(self, g: Callable[[np.ndarray], np.ndarray],
                 g_jacobian: Callable[[np.ndarray], np.ndarray] | None,
                 d: int, label: str = "rkn"):
        self.g = g
        self.g_jacobian = g_jacobian
        self.d = int(d)
        d = self.d

        def drift(t: float, x: np.ndarray) -> np.ndarray:
            y = x.copy()
            y[:d] += t * x[d:]
            return y

        def kick(t: float, x: np.ndarray) -> np.ndarray:
            y = x.copy()
            y[d:] += t * np.asarray(g(x[:d]), dtype=float)
            return y

        parts = [
            Part(FlowMap(drift, "drift"),
                 field=lambda x: np.concatenate((x[d:], np.zeros(d)))),
            Part(FlowMap(kick, "kick"),
                 field=lambda x: np.concatenate((np.zeros(d), g(x[:d])))),
        ]
        extra = {}
        if g_jacobian is not None:
            def corrected(t: float, x: np.ndarray) -> np.ndarray:
                y = x.copy()
                q = x[:d]
                y[d:] += t * 2.0 * (np.asarray(g_jacobian(q), dtype=float)
                                    @ np.asarray(g(q), dtype=float))
                return y
            extra["abb"] = FlowMap(corrected, "modified-force")

        def full(x: np.ndarray) -> np.ndarray:
            return np.concatenate((x[d:], g(x[:d])))

        super().__init__(parts, 2 * d, label=label, full_field=full,
                         extra_flows=extra)


def _drift_part(d: int) -> Part:
    def fn(t: float, x: np.ndarray) -> np.ndarray:
        y = x.copy()
        y[:d] += t * x[d:]
        return y

    return Part(FlowMap(fn, "drift"),
                field=lambda x: np.concatenate((x[d:], np.zeros(d))))


def _kick_part(d: int, force: Callable[[np.ndarray], np.ndarray],
               label: str = "kick") -> Part:
    def fn(t: float, x: np.ndarray) -> np.ndarray:
        y = x.copy()
        y[d:] += t * force(x[:d])
        return y

    return Part(FlowMap(fn, label),
                field=lambda x: np.concatenate((np.zeros(d), force(x[:d]))))


def _separable(d: int, force: Callable, hamiltonian: Callable, label: str,
               **kw) -> HamiltonianProblem:
    def full(x: np.ndarray) -> np.ndarray:
        return np.concatenate((x[d:], force(x[:d])))

    kw.setdefault("full_field", full)
    return HamiltonianProblem([_drift_part(d), _kick_part(d, force)], 2 * d,
                              hamiltonian, label=label, **kw)


def harmonic_oscillator() -> HamiltonianProblem:
    """Unit harmonic oscillator ``H = (p^2 + q^2)/2`` with exact rotation."""
    def hamiltonian(x: np.ndarray) -> float:
        return 0.5 * float(x[0] * x[0] + x[1] * x[1])

    def exact(t: float, x0) -> np.ndarray:
        q, p = float(x0[0]), float(x0[1])
        c, s = math.cos(t), math.sin(t)
        return np.array([q * c + p * s, p * c - q * s])

    prob = _separable(1, lambda q: -q, hamiltonian, "harmonic",
                      exact_solution=exact)
    prob.grad_v = lambda q: np.asarray(q, dtype=float)
    prob.hess_v = lambda q: np.eye(1)
    return prob


def kepler_initial_condition(e: float) -> np.ndarray:
    """Pericenter start on the ellipse of eccentricity ``e``: energy -1/2,
    period 2*pi."""
    e = float(e)
    if not 0.0 <= e < 1.0:
        raise ConfigurationError(f"eccentricity must lie in [0, 1), got {e}")
    return np.array([1.0 - e, 0.0, 0.0, math.sqrt((1.0 + e) / (1.0 - e))])


def _planar_radius(q: np.ndarray) -> float:
    r = math.hypot(float(q[0]), float(q[1]))
    if r == 0.0:
        raise SingularityError("gravitational singularity at the origin")
    return r


_KEPLER_NEWTON_TOL = 1e-14
_KEPLER_NEWTON_MAXIT = 50


def _solve_eccentric(M: np.ndarray, ecc: np.ndarray) -> np.ndarray:
    """Safeguarded Newton solve of E - ecc*sin(E) = M, elementwise.

    Starts at E = M; the root always lies inside [M - ecc, M + ecc], so any
    Newton step leaving the current bracket falls back to its midpoint.
    Keeps high eccentricities convergent near pericenter, where bare Newton
    overshoots.
    """
    E = M.copy()
    lo = M - ecc
    hi = M + ecc
    done = np.zeros(E.shape, dtype=bool)
    for _ in range(_KEPLER_NEWTON_MAXIT):
        f = E - ecc * np.sin(E) - M
        live = ~done
        hi = np.where(live & (f > 0.0), np.minimum(hi, E), hi)
        lo = np.where(live & (f <= 0.0), np.maximum(lo, E), lo)
        delta = f / (1.0 - ecc * np.cos(E))
        trial = E - delta
        converged = np.abs(delta) <= _KEPLER_NEWTON_TOL
        outside = (trial <= lo) | (trial >= hi)
        trial = np.where(outside & ~converged, 0.5 * (lo + hi), trial)
        E = np.where(live, trial, E)
        done |= converged | (hi - lo <= _KEPLER_NEWTON_TOL)
        if done.all():
            return E
    raise NumericError("eccentric-anomaly iteration did not converge")


def kepler_exact_flow(x, t: float):
    """Exact bound-orbit propagation of the two-body problem.

    Converts to orbital elements, advances the mean anomaly, solves the
    transcendental anomaly equation by Newton iteration, and maps back
    through the Gauss position/velocity functions.  Accepts a single state
    ``(q1, q2, p1, p2)`` or a batch of shape ``(n, 4)`` (``t`` may then be
    an array of matching length).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape != (4,):
            raise ConfigurationError("state must be (q1, q2, p1, p2)")
        return _kepler_flow_scalar(x, float(t))
    if x.ndim != 2 or x.shape[1] != 4:
        raise ConfigurationError("batch must have shape (n, 4)")
    tt = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    return _kepler_flow_batch(x, tt)


def _kepler_flow_scalar(x: np.ndarray, t: float) -> np.ndarray:
    q1, q2, p1, p2 = (float(v) for v in x)
    r0 = math.hypot(q1, q2)
    if r0 == 0.0:
        raise SingularityError("gravitational singularity at the origin")
    energy = 0.5 * (p1 * p1 + p2 * p2) - 1.0 / r0
    if energy >= 0.0:
        raise UnsupportedOperationError(
            "only bound orbits are supported (energy must be negative)")
    a = -0.5 / energy
    sqa = math.sqrt(a)
    n = 1.0 / (a * sqa)
    esin = (q1 * p1 + q2 * p2) / sqa
    ecos = 1.0 - r0 / a
    ecc = math.hypot(esin, ecos)
    if ecc >= 1.0 - 1e-12:
        raise UnsupportedOperationError("degenerate radial orbit")
    E0 = math.atan2(esin, ecos)
    M = E0 - esin + n * t
    # wrap the target anomaly; the unwrapped part shifts E rigidly
    Mw = M - 2.0 * math.pi * round(M / (2.0 * math.pi))
    E = Mw
    lo, hi = Mw - ecc, Mw + ecc
    for _ in range(_KEPLER_NEWTON_MAXIT):
        f = E - ecc * math.sin(E) - Mw
        if f > 0.0:
            hi = min(hi, E)
        else:
            lo = max(lo, E)
        delta = f / (1.0 - ecc * math.cos(E))
        trial = E - delta
        if abs(delta) <= _KEPLER_NEWTON_TOL:
            E = trial
            break
        E = 0.5 * (lo + hi) if (trial <= lo or trial >= hi) else trial
        if hi - lo <= _KEPLER_NEWTON_TOL:
            break
    else:
        raise NumericError("eccentric-anomaly iteration did not converge")
    dE = E + (M - Mw) - E0
    cD, sD = math.cos(dE), math.sin(dE)
    r = a * (1.0 - ecc * math.cos(E))
    f = 1.0 - (a / r0) * (1.0 - cD)
    g = t + (sD - dE) / n
    fd = -sqa / (r * r0) * sD
    gd = 1.0 - (a / r) * (1.0 - cD)
    return np.array([f * q1 + g * p1, f * q2 + g * p2,
                     fd * q1 + gd * p1, fd * q2 + gd * p2])


def _kepler_flow_batch(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    q = x[:, :2]
    p = x[:, 2:]
    r0 = np.hypot(q[:, 0], q[:, 1])
    if np.any(r0 == 0.0):
        raise SingularityError("gravitational singularity at the origin")
    energy = 0.5 * np.einsum("ij,ij->i", p, p) - 1.0 / r0
    if np.any(energy >= 0.0):
        raise UnsupportedOperationError(
            "only bound orbits are supported (energy must be negative)")
    a = -0.5 / energy
    sqa = np.sqrt(a)
    n = 1.0 / (a * sqa)
    esin = np.einsum("ij,ij->i", q, p) / sqa
    ecos = 1.0 - r0 / a
    ecc = np.hypot(esin, ecos)
    if np.any(ecc >= 1.0 - 1e-12):
        raise UnsupportedOperationError("degenerate radial orbit")
    E0 = np.arctan2(esin, ecos)
    M = E0 - esin + n * t
    Mw = M - 2.0 * np.pi * np.round(M / (2.0 * np.pi))
    E = _solve_eccentric(Mw, ecc)
    dE = E + (M - Mw) - E0
    cD, sD = np.cos(dE), np.sin(dE)
    r = a * (1.0 - ecc * np.cos(E))
    f = 1.0 - (a / r0) * (1.0 - cD)
    g = t + (sD - dE) / n
    fd = -sqa / (r * r0) * sD
    gd = 1.0 - (a / r) * (1.0 - cD)
    out = np.empty_like(x)
    out[:, :2] = f[:, None] * q + g[:, None] * p
    out[:, 2:] = fd[:, None] * q + gd[:, None] * p
    return out


def _angular_momentum(x: np.ndarray) -> float:
    return float(x[0] * x[3] - x[1] * x[2])


def kepler() -> HamiltonianProblem:
    """Planar two-body problem, kinetic/potential split with exact flows."""
    def hamiltonian(x: np.ndarray) -> float:
        return (0.5 * float(x[2] * x[2] + x[3] * x[3])
                - 1.0 / _planar_radius(x[:2]))

    def force(q: np.ndarray) -> np.ndarray:
        r = _planar_radius(q)
        return -q / (r * r * r)

    return _separable(
        2, force, hamiltonian, "kepler",
        invariants={"L": _angular_momentum},
        exact_solution=lambda t, x0: kepler_exact_flow(x0, t),
        initial_condition=kepler_initial_condition)


def _perturbation_force(eps: float, alpha_param: float) -> Callable:
    """Momentum push per unit time from the axis-weighted 1/r^3 perturbation.

    The returned callable is the negative gradient of
    ``eps * H_pert`` with ``H_pert = -(1/(2 r^3)) (1 - 3 alpha q1^2 / r^2)``.
    """
    al = float(alpha_param)

    def force(q: np.ndarray) -> np.ndarray:
        q1, q2 = float(q[0]), float(q[1])
        r2 = q1 * q1 + q2 * q2
        if r2 == 0.0:
            raise SingularityError("gravitational singularity at the origin")
        r7 = r2 * r2 * r2 * math.sqrt(r2)
        A = 1.5 * (al * (3.0 * q1 * q1 - 2.0 * q2 * q2) - r2)
        B = 1.5 * (al * 5.0 * q1 * q1 - r2)
        return np.array([eps * A * q1 / r7, eps * B * q2 / r7])

    return force


def perturbed_kepler_modified_kick(eps: float, alpha_param: float,
                                   b: float, c: float) -> FlowMap:
    """Combined momentum kick for the perturbation and its double-bracket
    correction.

    Applying the returned map for time ``h`` updates
    ``p1 += h*eps*(b*A/r^7 - h^2*eps*c*C/r^14) * q1`` and symmetrically for
    ``p2`` with ``B``, ``D``; with ``c = 0`` it reduces to ``b`` times the
    plain perturbation kick.
    """
    al = float(alpha_param)
    eps = float(eps)
    b = float(b)
    c = float(c)

    def fn(h: float, x: np.ndarray) -> np.ndarray:
        q1, q2 = float(x[0]), float(x[1])
        r2 = q1 * q1 + q2 * q2
        if r2 == 0.0:
            raise SingularityError("gravitational singularity at the origin")
        r4 = r2 * r2
        r7 = r4 * r2 * math.sqrt(r2)
        A = 1.5 * (al * (3.0 * q1 * q1 - 2.0 * q2 * q2) - r2)
        B = 1.5 * (al * 5.0 * q1 * q1 - r2)
        C = 9.0 * (2.0 * r4 + 3.0 * al * r2 * (q2 * q2 - 4.0 * q1 * q1)
                   + al * al * (18.0 * q1 ** 4 + q1 * q1 * q2 * q2
                                - 2.0 * q2 ** 4))
        D = 9.0 * (2.0 * r4 - 15.0 * al * r2 * q1 * q1
                   + 5.0 * al * al * q1 * q1 * (5.0 * q1 * q1
                                                + 2.0 * q2 * q2))
        y = x.copy()
        y[2] += h * eps * (b * A / r7 - h * h * eps * c * C / (r7 * r7)) * q1
        y[3] += h * eps * (b * B / r7 - h * h * eps * c * D / (r7 * r7)) * q2
        return y

    return FlowMap(fn, "modified-kick")


def perturbed_kepler(eps: float, alpha_param: float = 1.0,
                     split: str = "integrable") -> HamiltonianProblem:
    """Two-body problem with an axis-weighted 1/r^3 perturbation.

    ``split="integrable"`` pairs the exact Keplerian propagator with the
    perturbation kick, the natural near-integrable splitting;
    ``split="tv"`` is the plain kinetic/potential splitting of the same
    Hamiltonian.  ``eps = 0`` reduces to :func:`kepler` in either split.
    """
    eps = float(eps)
    if eps < 0.0:
        raise ConfigurationError("perturbation strength must be nonnegative")
    al = float(alpha_param)
    pert_force = _perturbation_force(eps, al)

    def h_pert(q: np.ndarray) -> float:
        q1 = float(q[0])
        r2 = float(q[0] * q[0] + q[1] * q[1])
        if r2 == 0.0:
            raise SingularityError("gravitational singularity at the origin")
        r3 = r2 * math.sqrt(r2)
        return -0.5 / r3 * (1.0 - 3.0 * al * q1 * q1 / r2)

    def hamiltonian(x: np.ndarray) -> float:
        q = x[:2]
        return (0.5 * float(x[2] * x[2] + x[3] * x[3])
                - 1.0 / _planar_radius(q) + eps * h_pert(q))

    def full(x: np.ndarray) -> np.ndarray:
        q = x[:2]
        r = _planar_radius(q)
        return np.concatenate((x[2:], -q / r ** 3 + pert_force(q)))

    common = dict(
        full_field=full,
        invariants={"L": _angular_momentum},
        initial_condition=kepler_initial_condition,
        epsilon=eps,
    )
    if split == "tv":
        def force(q: np.ndarray) -> np.ndarray:
            r = _planar_radius(q)
            return -q / (r * r * r) + pert_force(q)
        prob = _separable(2, force, hamiltonian, "perturbed-kepler-tv",
                          **common)
    elif split == "integrable":
        def kepler_field(x: np.ndarray) -> np.ndarray:
            q = x[:2]
            r = _planar_radius(q)
            return np.concatenate((x[2:], -q / r ** 3))

        parts = [
            Part(FlowMap(lambda t, x: kepler_exact_flow(x, t), "kepler-flow"),
                 field=kepler_field),
            _kick_part(2, pert_force, label="perturbation-kick"),
        ]
        prob = HamiltonianProblem(parts, 4, hamiltonian,
                                  label="perturbed-kepler", **common)
    else:
        raise ConfigurationError(f"unknown split {split!r}")
    prob.modified_kick = lambda b, c: perturbed_kepler_modified_kick(
        eps, al, b, c)
    return prob


def henon_heiles() -> HamiltonianProblem:
    """Cubic two-degree-of-freedom oscillator with the modified-force flow.

    ``V = (q1^2 + q2^2)/2 + q1^2 q2 - q2^3/3``; the extra flow ``"abb"``
    pushes momenta along ``2 V''(q) V'(q)``, the gradient of
    ``|V'(q)|^2``.
    """
    def grad_v(q: np.ndarray) -> np.ndarray:
        q1, q2 = float(q[0]), float(q[1])
        return np.array([q1 + 2.0 * q1 * q2, q2 + q1 * q1 - q2 * q2])

    def hess_v(q: np.ndarray) -> np.ndarray:
        q1, q2 = float(q[0]), float(q[1])
        return np.array([[1.0 + 2.0 * q2, 2.0 * q1],
                         [2.0 * q1, 1.0 - 2.0 * q2]])

    def hamiltonian(x: np.ndarray) -> float:
        q1, q2, p1, p2 = (float(v) for v in x)
        return (0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2)
                + q1 * q1 * q2 - q2 ** 3 / 3.0)

    def corrected(t: float, x: np.ndarray) -> np.ndarray:
        y = x.copy()
        q = x[:2]
        y[2:] += t * 2.0 * (hess_v(q) @ grad_v(q))
        return y

    prob = _separable(2, lambda q: -grad_v(q), hamiltonian, "henon-heiles",
                      extra_flows={"abb": FlowMap(corrected,
                                                  "modified-force")})
    prob.grad_v = grad_v
    prob.hess_v = hess_v
    return prob


def volterra_lotka() -> SplitSystem:
    """Predator-prey flow on the positive quadrant, split by frozen variable.

    Part 0 evolves ``u' = u(v - 2)`` with ``v`` frozen, part 1 evolves
    ``v' = v(1 - u)`` with ``u`` frozen; both are exact exponentials.  The
    conserved quantity ``log u - u + 2 log v - v`` is registered as ``"I"``.
    """
    def check(x: np.ndarray):
        if x[0] <= 0.0 or x[1] <= 0.0:
            raise DomainError("state left the positive quadrant")

    def flow_u(t: float, x: np.ndarray) -> np.ndarray:
        check(x)
        y = x.copy()
        y[0] *= math.exp(t * (x[1] - 2.0))
        return y

    def flow_v(t: float, x: np.ndarray) -> np.ndarray:
        check(x)
        y = x.copy()
        y[1] *= math.exp(t * (1.0 - x[0]))
        return y

    def first_integral(x: np.ndarray) -> float:
        check(x)
        u, v = float(x[0]), float(x[1])
        return math.log(u) - u + 2.0 * math.log(v) - v

    parts = [
        Part(FlowMap(flow_u, "prey"),
             field=lambda x: np.array([x[0] * (x[1] - 2.0), 0.0])),
        Part(FlowMap(flow_v, "predator"),
             field=lambda x: np.array([0.0, x[1] * (1.0 - x[0])])),
    ]
    return SplitSystem(
        parts, 2, label="volterra-lotka",
        full_field=lambda x: np.array([x[0] * (x[1] - 2.0),
                                       x[1] * (1.0 - x[0])]),
        invariants={"I": first_integral})


def lorenz(sigma: float = 10.0, r: float = 28.0,
           b: float = 8.0 / 3.0) -> SplitSystem:
    """Lorenz flow split into its linear part and a frozen-x rotation.

    The linear part is advanced by a closed-form matrix exponential
    (eigendecomposition computed once per parameter set); the nonlinear
    part ``(0, -xz, xy)`` rotates ``(y, z)`` by the angle ``x t`` exactly.
    """
    mat = np.array([[-sigma, sigma, 0.0],
                    [r, -1.0, 0.0],
                    [0.0, 0.0, -b]])
    lam, vec = np.linalg.eig(mat)
    try:
        vec_inv = np.linalg.inv(vec)
    except np.linalg.LinAlgError:
        raise ConfigurationError(
            "linear part is not diagonalizable for these parameters")
    if np.abs((vec * lam) @ vec_inv - mat).max() > 1e-9:
        raise ConfigurationError(
            "linear part is not diagonalizable for these parameters")

    def flow_linear(t: float, x: np.ndarray) -> np.ndarray:
        return ((vec * np.exp(lam * t)) @ (vec_inv @ x)).real

    def flow_rotation(t: float, x: np.ndarray) -> np.ndarray:
        ang = x[0] * t
        c, s = math.cos(ang), math.sin(ang)
        return np.array([x[0], c * x[1] - s * x[2], s * x[1] + c * x[2]])

    parts = [
        Part(FlowMap(flow_linear, "linear"), field=lambda x: mat @ x),
        Part(FlowMap(flow_rotation, "rotation"),
             field=lambda x: np.array([0.0, -x[0] * x[2], x[0] * x[1]])),
    ]
    return SplitSystem(
        parts, 3, label="lorenz",
        full_field=lambda x: mat @ x + np.array([0.0, -x[0] * x[2],
                                                 x[0] * x[1]]))


def abc_flow(a: float = 1.0, b: float = 1.0, c: float = 1.0) -> SplitSystem:
    """Steady periodic volume-preserving flow split into three shears.

    Each part depends on a single frozen coordinate, so its flow is a
    straight-line translation of the other two; every part field is
    divergence free.
    """
    def flow_a(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[0], x[1] + t * a * math.sin(x[0]),
                         x[2] + t * a * math.cos(x[0])])

    def flow_b(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[0] + t * b * math.cos(x[1]), x[1],
                         x[2] + t * b * math.sin(x[1])])

    def flow_c(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[0] + t * c * math.sin(x[2]),
                         x[1] + t * c * math.cos(x[2]), x[2]])

    parts = [
        Part(FlowMap(flow_a, "shear-x"),
             field=lambda x: np.array([0.0, a * math.sin(x[0]),
                                       a * math.cos(x[0])])),
        Part(FlowMap(flow_b, "shear-y"),
             field=lambda x: np.array([b * math.cos(x[1]), 0.0,
                                       b * math.sin(x[1])])),
        Part(FlowMap(flow_c, "shear-z"),
             field=lambda x: np.array([c * math.sin(x[2]),
                                       c * math.cos(x[2]), 0.0])),
    ]

    def full(x: np.ndarray) -> np.ndarray:
        return (parts[0].field(x) + parts[1].field(x) + parts[2].field(x))

    return SplitSystem(parts, 3, label="abc-flow", full_field=full)


def rkn_problem(g: Callable[[np.ndarray], np.ndarray],
                g_jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
                *, d: int, label: str = "rkn") -> RknProblem:
    """Wrap an acceleration field ``y'' = g(y)`` as a two-part system."""
    return RknProblem(g, g_jacobian, d, label=label)


PROBLEMS: dict[str, Callable[..., SplitSystem]] = {
    "harmonic": harmonic_oscillator,
    "kepler": kepler,
    "perturbed_kepler": perturbed_kepler,
    "henon_heiles": henon_heiles,
    "volterra_lotka": volterra_lotka,
    "lorenz": lorenz,
    "abc_flow": abc_flow,
}


def make_problem(name: str, **params) -> SplitSystem:
    """Instantiate a registered problem by name with keyword parameters."""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        known = ", ".join(sorted(PROBLEMS))
        raise ConfigurationError(f"unknown problem {name!r} (known: {known})")
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {name!r}: {exc}")
