"""Order-condition engine and convergence measurement.

Algebraic side: a composition built from 2s alternating basic steps has
one polynomial condition per Lyndon multi-index and weight; this module
enumerates the indices, evaluates the condition polynomials by a
prefix-sum recursion, applies the structural reductions available to
symmetric compositions, and cross-checks a family of published
identities between the polynomials.  Numerical side: global-error slope
fits against exact or fine-step references.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import methods as _methods
from .errors import (
    ConfigurationError,
    ContractViolationError,
    InconclusiveFitError,
    PreconditionError,
)
from .flows import (
    BlowUpError,
    Integrator,
    SplitSystem,
    build_method,
    compose_symmetric_of_symmetric,
    integrate,
    strang,
)

CONDITION_SETS = ("general", "time_symmetric", "odd_only", "both")

_TOL = 1e-12

# condition counts for the second-order-in-each-part case, stored for
# reporting only; no generator for them is shipped
RKN_CONDITION_COUNTS = (1, 2, 2, 4, 5, 10, 14, 25, 39, 69)


def rkn_condition_counts() -> tuple[int, ...]:
    """Per-weight condition counts for the reduced kick-commutator case."""
    return RKN_CONDITION_COUNTS


# ---------------------------------------------------------------------------
# Lyndon multi-indices

def _is_lyndon(t: tuple[int, ...]) -> bool:
    # proper prefix < suffix at every split; tuple comparison already
    # treats a proper prefix as strictly smaller
    return all(t[:k] < t[k:] for k in range(1, len(t)))


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def lyndon_multiindices(n: int) -> tuple[tuple[int, ...], ...]:
    """All Lyndon multi-indices of weight exactly n, in lexicographic order."""
    if n < 1:
        raise ConfigurationError(f"weight must be >= 1, got {n}")
    found = sorted(t for t in _compositions(n) if _is_lyndon(t))
    return tuple(found)


def count_conditions(n: int) -> tuple[int, int]:
    """(number of weight-n Lyndon multi-indices, number with all odd entries)."""
    idx = lyndon_multiindices(n)
    odd = sum(1 for t in idx if all(e % 2 == 1 for e in t))
    return len(idx), odd


def symmetric_condition_counts(order: int) -> tuple[int, int]:
    """Condition totals for symmetric methods of the given even order.

    First count: palindromic coefficient lists (only odd weights below the
    order remain).  Second count: the same with an inner symmetric base,
    which further removes every index with an even entry.
    """
    if order < 2 or order % 2 != 0:
        raise ConfigurationError(f"order must be a positive even integer, "
                                 f"got {order}")
    n_total, m_total = 0, 0
    for k in range(1, order, 2):
        nk, mk = count_conditions(k)
        n_total += nk
        m_total += mk
    return n_total, m_total


# ---------------------------------------------------------------------------
# condition polynomials

def _signed_powers(alphas: np.ndarray, i: int) -> np.ndarray:
    # alpha_j^(i) = (-1)^(j (i-1)) alpha_j^i with 1-based j
    p = alphas ** i
    if i % 2 == 0:
        signs = np.where(np.arange(1, len(alphas) + 1) % 2 == 1, -1.0, 1.0)
        p = p * signs
    return p


def eval_u(index: Sequence[int], alphas: Sequence[float]) -> float:
    """Evaluate one condition polynomial by the prefix-sum recursion.

    Chains j_1 <= j_2*, ..., j_{m-1} <= j_m*, j_m <= 2s contribute the
    product of signed powers, where j* = j-1 for even j and j otherwise.
    The prefix cutoffs make a running-sum recursion exact in O(m s).
    """
    idx = tuple(int(i) for i in index)
    if not idx or any(i < 1 for i in idx):
        raise ConfigurationError(f"multi-index entries must be >= 1: {idx}")
    al = np.asarray(alphas, dtype=float)
    if al.ndim != 1 or len(al) == 0 or len(al) % 2 != 0:
        raise ConfigurationError("alphas must be a non-empty even-length list")
    n = len(al)
    # star-prefix of a running sum S: at position j (1-based), chains may
    # use j' <= j-1 for even j, j' <= j for odd j
    cur = _signed_powers(al, idx[0])
    for i in idx[1:]:
        run = np.cumsum(cur)
        star = np.empty(n)
        star[0::2] = run[0::2]          # odd 1-based positions keep j' <= j
        star[1::2] = run[0::2]          # even positions drop the diagonal
        cur = _signed_powers(al, i) * star
    return float(cur.sum())


def eval_v211(alphas: Sequence[float]) -> float:
    """Direct evaluation of the squared-prefix weight-4 polynomial."""
    al = np.asarray(alphas, dtype=float)
    if al.ndim != 1 or len(al) % 2 != 0:
        raise ConfigurationError("alphas must be a non-empty even-length list")
    run = np.cumsum(al)
    star = np.empty(len(al))
    star[0::2] = run[0::2]
    star[1::2] = run[0::2]
    signs = np.where(np.arange(1, len(al) + 1) % 2 == 1, -1.0, 1.0)
    return float((signs * al ** 2 * star ** 2).sum())


def w_low_order(alphas: Sequence[float]) -> dict[str, float]:
    """The three lowest log-expansion coefficients in the alternating form."""
    al = np.asarray(alphas, dtype=float)
    signs = np.where(np.arange(1, len(al) + 1) % 2 == 1, -1.0, 1.0)
    return {"w1": float(al.sum()),
            "w2": float((signs * al ** 2).sum()),
            "w3": float((al ** 3).sum())}


def bch_low_order(a_list: Sequence[float],
                  b_list: Sequence[float]) -> dict[str, float]:
    """Closed-form log-expansion coefficients of a paired-list splitting.

    Covers the identity, the first commutator, and the two weight-3
    nested commutators; b may have one more entry than a (trailing
    arrangement), shorter b is padded with a zero.
    """
    a = tuple(float(v) for v in a_list)
    b = tuple(float(v) for v in b_list)
    s = len(a)
    if len(b) == s:
        b = b + (0.0,)
    if len(b) != s + 1:
        raise ConfigurationError(
            f"need len(b) in (len(a), len(a)+1), got {len(a)}/{len(b)}")
    va = sum(a)
    vb = sum(b)
    v_ab = 0.5 * va * vb - sum(b[i] * a[j]
                               for i in range(s) for j in range(i, s))
    t_aba = sum(a[i] * b[j] * a[k]
                for i in range(s) for j in range(i + 1, s)
                for k in range(j, s))
    t_abb = sum(b[i] * a[j] * b[k]
                for i in range(s + 1) for j in range(i, s)
                for k in range(j + 1, s + 1))
    v_aba = 0.5 * (-va * va * vb / 6.0 + t_aba)
    v_abb = 0.5 * (va * vb * vb / 6.0 - t_abb)
    return {"v_a": va, "v_b": vb, "v_ab": v_ab, "v_aba": v_aba,
            "v_abb": v_abb}


def cross_identities(alphas: Sequence[float]) -> dict[str, float]:
    """Residuals of the published identities between condition polynomials.

    Each residual compares two genuinely different evaluation routes:
    chain evaluation of a non-Lyndon index against a polynomial in the
    Lyndon values, or a paired-list closed form against the alternating
    ones.  Several of the printed identities circulate with sign or
    subscript slips; the versions implemented here were rederived and
    verified exactly in rational arithmetic, and the test suite pins
    them.
    """
    al = tuple(float(v) for v in alphas)
    u1 = eval_u((1,), al)
    u2 = eval_u((2,), al)
    u3 = eval_u((3,), al)
    u4 = eval_u((4,), al)
    u12 = eval_u((1, 2), al)
    u21 = eval_u((2, 1), al)
    u112 = eval_u((1, 1, 2), al)
    u22 = eval_u((2, 2), al)
    spec = _methods.alpha_to_ab(al)
    v = bch_low_order(spec.a, spec.b)
    res = {
        "u11": eval_u((1, 1), al) - 0.5 * (u1 * u1 - u2),
        "u21": u21 - (u1 * u2 - u12 - u3),
        "u111": eval_u((1, 1, 1), al)
        - (u1 ** 3 / 6.0 - u1 * u2 / 2.0 + u3 / 3.0),
        "u22": u22 - 0.5 * (u2 * u2 - u4),
        "v_ab": v["v_ab"] - 0.5 * u2,
        "v_abb": v["v_abb"] - (u3 - 3.0 * u12 + 3.0 * u21) / 12.0,
        "v_aba": v["v_aba"] - (-u3 - 3.0 * u12 + 3.0 * u21) / 12.0,
        "v211": eval_v211(al) - (2.0 * u112 + u22),
    }
    return res


# ---------------------------------------------------------------------------
# certification

@dataclass
class OrderReport:
    """Result of certifying one coefficient list.

    ``certified_order`` is the largest order whose full filtered
    condition set is satisfied at ``tol``; ``residuals`` keeps every
    evaluated condition, including the failing ones above that order,
    keyed by multi-index.
    """

    certified_order: int
    residuals: dict[tuple[int, ...], float]
    condition_set_used: str
    tol: float = _TOL

    def failing(self) -> dict[tuple[int, ...], float]:
        return {k: v for k, v in self.residuals.items()
                if k != (1,) and abs(v) > self.tol}


def _check_structure(al: tuple[float, ...], assumption: str,
                     tol: float) -> None:
    if assumption in ("time_symmetric", "both"):
        if any(abs(x - y) > tol for x, y in zip(al, reversed(al))):
            raise ContractViolationError(
                "time-symmetric condition set requested but the "
                "coefficient list is not palindromic")
    if assumption in ("odd_only", "both"):
        pairs = zip(al[0::2], al[1::2])
        if any(abs(x - y) > tol for x, y in pairs):
            raise ContractViolationError(
                "odd-entry condition set requested but the coefficients "
                "are not duplicated pairs over a symmetric base")


def _condition_applies(index: tuple[int, ...], weight: int,
                       assumption: str) -> bool:
    if assumption == "general":
        return True
    odd_weight = weight % 2 == 1
    odd_entries = all(e % 2 == 1 for e in index)
    if assumption == "time_symmetric":
        return odd_weight
    if assumption == "odd_only":
        return odd_entries
    return odd_weight and odd_entries


def certify(alphas: Sequence[float], max_order: int,
            symmetry_assumptions: str = "general",
            tol: float = _TOL) -> OrderReport:
    """Evaluate all order conditions up to ``max_order`` and classify.

    Symmetry assumptions shrink the condition set (palindromic lists
    satisfy even-weight conditions automatically; duplicated-pair lists
    satisfy every condition with an even entry), but are trusted only
    after the corresponding structure is verified on the input; a
    mismatch raises instead of silently over-certifying.
    """
    if symmetry_assumptions not in CONDITION_SETS:
        raise ConfigurationError(
            f"symmetry_assumptions must be one of {CONDITION_SETS}, "
            f"got {symmetry_assumptions!r}")
    if max_order < 1:
        raise ConfigurationError(f"max_order must be >= 1, got {max_order}")
    al = tuple(float(v) for v in alphas)
    if len(al) == 0 or len(al) % 2 != 0:
        raise ConfigurationError("alphas must be a non-empty even-length list")

    u1 = eval_u((1,), al)
    if abs(u1 - 1.0) > tol:
        raise PreconditionError(
            f"not a consistent method: leading coefficient sum is {u1!r}")
    _check_structure(al, symmetry_assumptions, tol)

    residuals: dict[tuple[int, ...], float] = {(1,): u1 - 1.0}
    certified = max_order
    for w in range(2, max_order + 1):
        weight_ok = True
        for idx in lyndon_multiindices(w):
            if not _condition_applies(idx, w, symmetry_assumptions):
                continue
            r = eval_u(idx, al)
            residuals[idx] = r
            if abs(r) > tol:
                weight_ok = False
        if not weight_ok and certified == max_order:
            certified = w - 1
    return OrderReport(certified_order=certified, residuals=residuals,
                       condition_set_used=symmetry_assumptions, tol=tol)


def negative_coefficient_certificate(
        spec: "_methods.CompositionSpec") -> tuple[int, int]:
    """Exhibit the unavoidable backward steps of a high-order splitting.

    Any paired-list method of order three or higher must contain a
    negative a coefficient and a negative b coefficient; this checks the
    order-3 condition actually holds and returns one witness index into
    each of the spec's own lists.
    """
    al = _methods.ab_to_alpha(spec).alpha
    u3 = eval_u((3,), al)
    if abs(u3) > _TOL:
        raise PreconditionError(
            f"method not actually order >= 3: cube-sum condition is {u3!r}")
    ia = next((i for i, v in enumerate(spec.a) if v < 0.0), None)
    ib = next((i for i, v in enumerate(spec.b) if v < 0.0), None)
    if ia is None or ib is None:
        raise ContractViolationError(
            "order >= 3 coefficients with no negative entry contradict "
            "the order barrier")
    return ia, ib


# ---------------------------------------------------------------------------
# empirical order

@dataclass
class FitResult:
    """Least-squares slope of log error against log step size."""

    slope: float
    errors: dict[float, float]
    excluded: tuple[float, ...] = ()
    intercept: float = 0.0

    def __float__(self):
        return self.slope


def reference_state(problem: SplitSystem, x0, t_end: float,
                    h_hint: float) -> np.ndarray:
    """Reference solution at ``t_end``: exact when the problem has one,
    otherwise a sixth-order composition run at a 128-fold smaller step."""
    exact = getattr(problem, "exact_solution", None)
    if exact is not None:
        return np.asarray(exact(t_end, x0), dtype=float)
    h_ref = abs(h_hint) / 128.0
    n = max(1, int(round(t_end / h_ref)))
    h_ref = t_end / n
    fine = compose_symmetric_of_symmetric(
        _methods.triple_jump(3).beta, strang(problem), check=False,
        label="reference", nominal_order=6)
    # fusing adjacent outer-part applications halves the flow-call count
    return integrate(fine.flatten().merged(), x0, h_ref, n,
                     keep="final").final_state


def empirical_order(method: Integrator, problem: SplitSystem, x0,
                    t_end: float, h_list: Sequence[float]) -> FitResult:
    """Fit the global-error order of ``method`` over a step-size ladder.

    Each step size integrates to ``t_end`` (rounded to a whole number of
    steps) and the Euclidean error against the reference is fitted with
    a straight line in log-log.  Step sizes that blow up are dropped
    with a warning; fewer than three surviving points, or errors at the
    round-off floor, abort as inconclusive.
    """
    hs = sorted(float(h) for h in h_list)
    if len(hs) < 3:
        raise InconclusiveFitError("need at least 3 step sizes")
    x0 = np.asarray(x0, dtype=float)
    ref = reference_state(problem, x0, t_end, min(hs))
    scale = 1.0 + float(np.linalg.norm(ref))

    errors: dict[float, float] = {}
    excluded: list[float] = []
    for h in hs:
        n = max(1, int(round(t_end / h)))
        h_run = t_end / n
        try:
            final = integrate(method, x0, h_run, n, keep="final").final_state
        except BlowUpError as exc:
            warnings.warn(f"step size {h:.6g} blew up at step "
                          f"{exc.step_index}; excluded from the fit")
            excluded.append(h)
            continue
        errors[h] = float(np.linalg.norm(final - ref))
    if len(errors) < 3:
        raise InconclusiveFitError(
            f"only {len(errors)} step sizes survived; cannot fit a slope")
    if max(errors.values()) < 1e-13 * scale:
        raise InconclusiveFitError(
            "errors are at the round-off floor; slope is meaningless")
    floor = 1e-300
    xs = np.log([h for h in errors])
    ys = np.log([max(e, floor) for e in errors.values()])
    slope, intercept = np.polyfit(xs, ys, 1)
    return FitResult(slope=float(slope), errors=errors,
                     excluded=tuple(excluded), intercept=float(intercept))


def _slope_with_ci(xs: np.ndarray, ys: np.ndarray) -> tuple[float, tuple[float, float]]:
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    n = len(xs)
    if n > 2:
        se = math.sqrt(float(resid @ resid) / (n - 2)
                       / float(((xs - xs.mean()) ** 2).sum()))
    else:
        se = 0.0
    return float(slope), (float(slope - 2 * se), float(slope + 2 * se))


def near_integrable_error_profile(spec, problem_factory: Callable[[float], SplitSystem],
                                  eps_list: Sequence[float],
                                  h_list: Sequence[float], x0,
                                  t_end: float) -> dict:
    """Leading error exponents of a method on a perturbed problem family.

    The error of a splitting adapted to a small perturbation carries
    separate powers of the step size and of the perturbation strength.
    Holding the smallest perturbation fixed and sweeping the step size
    estimates the step-size exponent; holding the step fixed at its
    smallest value and sweeping the perturbation estimates the leading
    perturbation power.  Both come back with rough two-sigma intervals.
    """
    eps_list = sorted(float(e) for e in eps_list)
    h_list = sorted(float(h) for h in h_list)
    if len(eps_list) < 2 or len(h_list) < 3:
        raise InconclusiveFitError("need >= 3 step sizes and >= 2 strengths")
    x0 = np.asarray(x0, dtype=float)

    def sweep(eps: float, hs: Sequence[float]) -> dict[float, float]:
        # one problem build and one reference run per strength
        prob = problem_factory(eps)
        meth = build_method(spec, prob)
        ref = reference_state(prob, x0, t_end, min(h_list))
        out = {}
        for h in hs:
            n = max(1, int(round(t_end / h)))
            h_run = t_end / n
            final = integrate(meth, x0, h_run, n, keep="final").final_state
            out[h] = float(np.linalg.norm(final - ref))
        return out

    h_errors = sweep(eps_list[0], h_list)
    if max(h_errors.values()) <= 0.0:
        raise InconclusiveFitError("zero errors in the step-size sweep")
    sh, sh_ci = _slope_with_ci(np.log(list(h_errors)),
                               np.log([max(v, 1e-300)
                                       for v in h_errors.values()]))

    h_fix = h_list[0]
    e_errors = {eps_list[0]: h_errors[h_fix]}
    for e in eps_list[1:]:
        e_errors[e] = sweep(e, [h_fix])[h_fix]
    if max(e_errors.values()) <= 0.0:
        raise InconclusiveFitError("zero errors in the perturbation sweep")
    se_, se_ci = _slope_with_ci(np.log(list(e_errors)),
                                np.log([max(v, 1e-300)
                                        for v in e_errors.values()]))
    return {"h_exponent": sh, "h_ci": sh_ci, "h_errors": h_errors,
            "eps_exponent": se_, "eps_ci": se_ci, "eps_errors": e_errors}
