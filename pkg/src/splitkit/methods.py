"""Coefficient catalog, coefficient-form conversions, and method files.

Splitting coefficients travel in a handful of equivalent layouts: paired
a/b lists in four arrangements (AB, BA, ABA, BAB), a single alternating
list for adjoint-chain compositions (ALPHA), scaled-step weights over a
symmetric base method (BETA), and post-processor chains
(GAMMA_PROCESSOR).  This module owns the container type, the conversions
between layouts, a small catalog of closed-form schemes, and a JSON file
format for coefficients taken from the literature.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .errors import ConversionError, ValidationError

FORMS = ("AB", "BA", "ABA", "BAB", "ALPHA", "BETA", "GAMMA_PROCESSOR")

# key under which the single coefficient list is stored, per form
_LIST_KEY = {"ALPHA": "alpha", "BETA": "beta", "GAMMA_PROCESSOR": "gamma"}

_SUM_TOL = 1e-14
_PALIN_TOL = 1e-12
_CONVERT_TOL = 1e-12


def _as_floats(xs, name: str) -> tuple[float, ...]:
    if xs is None:
        raise ValidationError(f"{name}: coefficient list is required")
    try:
        out = tuple(float(v) for v in xs)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: expected a sequence of reals") from exc
    if not out:
        raise ValidationError(f"{name}: coefficient list is empty")
    if not all(math.isfinite(v) for v in out):
        raise ValidationError(f"{name}: entries must be finite")
    return out


def _is_palindrome(xs: Sequence[float], tol: float = _PALIN_TOL) -> bool:
    return all(abs(x - y) <= tol for x, y in zip(xs, reversed(xs)))


@dataclass(frozen=True)
class CompositionSpec:
    """Immutable coefficient set for one splitting or composition method.

    ``a``/``b`` hold the paired lists of the splitting forms; ``weights``
    holds the single list of the ALPHA, BETA, and GAMMA_PROCESSOR forms.
    ``claimed_order`` is the order asserted by the source of the
    coefficients, checked elsewhere; consistency sums are validated here
    whenever an order of at least one is claimed.
    """

    form: str
    a: tuple[float, ...] | None = None
    b: tuple[float, ...] | None = None
    weights: tuple[float, ...] | None = None
    claimed_order: int | None = None
    symmetric: bool = False
    label: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValidationError(
                f"form: expected one of {FORMS}, got {self.form!r}")
        if self.form in _LIST_KEY:
            object.__setattr__(self, "weights",
                               _as_floats(self.weights, _LIST_KEY[self.form]))
            if self.a is not None or self.b is not None:
                raise ValidationError(
                    f"{self.form} form takes a single weight list, not a/b")
            self._validate_single()
        else:
            object.__setattr__(self, "a", _as_floats(self.a, "a"))
            object.__setattr__(self, "b", _as_floats(self.b, "b"))
            if self.weights is not None:
                raise ValidationError(
                    f"{self.form} form takes a and b lists, not weights")
            self._validate_pair()
        if self.claimed_order is not None:
            if not isinstance(self.claimed_order, int) or self.claimed_order < 1:
                raise ValidationError(
                    f"claimed_order: expected a positive integer, "
                    f"got {self.claimed_order!r}")
            self._validate_sums()

    # length and palindrome rules for the paired forms
    def _validate_pair(self):
        na, nb = len(self.a), len(self.b)
        ok = {"AB": na == nb, "BA": na == nb,
              "ABA": na == nb + 1, "BAB": nb == na + 1}[self.form]
        if not ok:
            raise ValidationError(
                f"{self.form} form: incompatible lengths len(a)={na}, "
                f"len(b)={nb}")
        if self.symmetric:
            for name, xs in (("a", self.a), ("b", self.b)):
                if not _is_palindrome(xs):
                    raise ValidationError(
                        f"{name}: symmetric spec requires a palindromic list")

    def _validate_single(self):
        key = _LIST_KEY[self.form]
        if self.form == "ALPHA" and len(self.weights) % 2 != 0:
            raise ValidationError("alpha: list length must be even")
        if self.symmetric and not _is_palindrome(self.weights):
            raise ValidationError(
                f"{key}: symmetric spec requires a palindromic list")

    def _validate_sums(self):
        if self.form == "GAMMA_PROCESSOR":
            return
        if self.form in _LIST_KEY:
            s = sum(self.weights)
            if abs(s - 1.0) > _SUM_TOL * max(1.0, len(self.weights)):
                raise ValidationError(
                    f"{_LIST_KEY[self.form]}: weights must sum to 1 for a "
                    f"consistent method, got {s!r}")
            return
        for name, xs in (("a", self.a), ("b", self.b)):
            s = sum(xs)
            if abs(s - 1.0) > _SUM_TOL * max(1.0, len(xs)):
                raise ValidationError(
                    f"{name}: coefficients must sum to 1 for a consistent "
                    f"method, got {s!r}")

    # single-list accessors guard the form so callers fail loudly
    @property
    def alpha(self) -> tuple[float, ...]:
        if self.form != "ALPHA":
            raise ValidationError(f"spec {self.label!r} is {self.form}, "
                                  "not ALPHA")
        return self.weights

    @property
    def beta(self) -> tuple[float, ...]:
        if self.form != "BETA":
            raise ValidationError(f"spec {self.label!r} is {self.form}, "
                                  "not BETA")
        return self.weights

    @property
    def gamma(self) -> tuple[float, ...]:
        if self.form != "GAMMA_PROCESSOR":
            raise ValidationError(f"spec {self.label!r} is {self.form}, "
                                  "not GAMMA_PROCESSOR")
        return self.weights

    @property
    def n_stages(self) -> int:
        """Flow applications per step, zero coefficients excluded."""
        if self.form in _LIST_KEY:
            return sum(1 for w in self.weights if w != 0.0)
        a, b = self.canonical_ab()
        return sum(1 for v in a + b if v != 0.0)

    def canonical_ab(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Collapse the arrangement into one layout: len(b) = len(a) + 1
        with b[0] applied first; zeros pad the missing end applications.
        """
        if self.form == "AB":
            return self.a, self.b + (0.0,)
        if self.form == "BA":
            return self.a, (0.0,) + self.b
        if self.form == "ABA":
            return self.a, (0.0,) + self.b + (0.0,)
        if self.form == "BAB":
            return self.a, self.b
        spec = self
        if spec.form == "BETA":
            spec = beta_to_alpha(spec)
        return alpha_to_ab(spec).canonical_ab()

    def with_label(self, label: str) -> "CompositionSpec":
        return replace(self, label=label)


def ab_to_alpha(spec: CompositionSpec) -> CompositionSpec:
    """Rewrite a paired-list spec as one alternating coefficient list.

    The zigzag recursion b1 = alpha1, a_j = alpha_{2j-1} + alpha_{2j},
    b_{j+1} = alpha_{2j} + alpha_{2j+1} closes only when the two lists
    have equal sums; otherwise the trailing coefficient cannot vanish.
    """
    if spec.form in _LIST_KEY:
        raise ValidationError(f"spec {spec.label!r} has no a/b lists")
    sa, sb = sum(spec.a), sum(spec.b)
    if abs(sa - sb) > _CONVERT_TOL:
        raise ConversionError(
            f"a and b must have equal sums to convert, got {sa!r} vs {sb!r}")
    a, b = spec.canonical_ab()
    alphas: list[float] = []
    prev = 0.0
    for j, aj in enumerate(a):
        odd = b[j] - prev
        even = aj - odd
        alphas.extend((odd, even))
        prev = even
    return CompositionSpec(form="ALPHA", weights=tuple(alphas),
                           claimed_order=spec.claimed_order,
                           symmetric=spec.symmetric, label=spec.label,
                           provenance=spec.provenance)


def alpha_to_ab(spec_or_weights) -> CompositionSpec:
    """Merge an alternating coefficient list back into paired lists.

    Inverse of :func:`ab_to_alpha`; the result is in BAB arrangement,
    possibly with a trailing zero b coefficient.
    """
    if isinstance(spec_or_weights, CompositionSpec):
        src = spec_or_weights
        if src.form not in ("ALPHA", "GAMMA_PROCESSOR"):
            raise ValidationError(
                f"spec {src.label!r} is {src.form}, expected a single-list form")
        al = src.weights
        # a processor chain is not a consistent method, so its converted
        # form must not claim an order and trip the sum checks
        order = src.claimed_order if src.form == "ALPHA" else None
        symmetric = src.symmetric
        label, provenance = src.label, src.provenance
    else:
        al = _as_floats(spec_or_weights, "alpha")
        order, symmetric, label, provenance = None, False, "", ""
    if len(al) % 2 != 0:
        raise ValidationError("alpha: list length must be even")
    s = len(al) // 2
    a = tuple(al[2 * j] + al[2 * j + 1] for j in range(s))
    b = (al[0],) + tuple(al[2 * j + 1] + (al[2 * j + 2] if j < s - 1 else 0.0)
                         for j in range(s))
    return CompositionSpec(form="BAB", a=a, b=b, claimed_order=order,
                           symmetric=symmetric, label=label,
                           provenance=provenance)


def beta_to_alpha(spec_or_weights) -> CompositionSpec:
    """Expand scaled-step weights over a symmetric base into alpha form.

    Each base step of weight beta_j contributes an adjacent equal pair
    alpha = beta_j / 2, beta_j / 2.
    """
    if isinstance(spec_or_weights, CompositionSpec):
        src = spec_or_weights
        betas = src.beta
        order, symmetric = src.claimed_order, src.symmetric
        label, provenance = src.label, src.provenance
    else:
        betas = _as_floats(spec_or_weights, "beta")
        order, symmetric, label, provenance = None, False, "", ""
    alphas: list[float] = []
    for w in betas:
        alphas.extend((w / 2.0, w / 2.0))
    return CompositionSpec(form="ALPHA", weights=tuple(alphas),
                           claimed_order=order, symmetric=symmetric,
                           label=label, provenance=provenance)


# ---------------------------------------------------------------------------
# catalog

def symplectic_euler() -> CompositionSpec:
    """First-order splitting: one full drift, then one full kick.

    This orientation updates positions with the old momenta and momenta
    with the new positions; on the harmonic oscillator it conserves the
    shifted quadratic (p^2 + h p q + q^2)/2 exactly.
    """
    return CompositionSpec(form="BA", a=(1.0,), b=(1.0,), claimed_order=1,
                           label="symplectic-euler",
                           provenance="first-order splitting, closed form")


def strang() -> CompositionSpec:
    """Second-order symmetric splitting with half kicks on the outside."""
    return CompositionSpec(form="BAB", a=(1.0,), b=(0.5, 0.5),
                           claimed_order=2, symmetric=True, label="strang",
                           provenance="second-order splitting, closed form")


def triple_jump(k: int) -> CompositionSpec:
    """Recursive symmetric composition of order 2k.

    Each level wraps the previous method in three scaled steps
    (x, 1 - 2x, x) with x = 1/(2 - 2^(1/(2j+1))) chosen to cancel the
    leading error of the level below; the weight list has length 3^(k-1).
    """
    if not isinstance(k, int) or k < 1:
        raise ValidationError(f"k: expected an integer >= 1, got {k!r}")
    weights = [1.0]
    for j in range(1, k):
        x = 1.0 / (2.0 - 2.0 ** (1.0 / (2 * j + 1)))
        weights = ([x * w for w in weights]
                   + [(1.0 - 2.0 * x) * w for w in weights]
                   + [x * w for w in weights])
    return CompositionSpec(form="BETA", weights=tuple(weights),
                           claimed_order=2 * k, symmetric=True,
                           label=f"triple-jump-{2 * k}",
                           provenance="triple-jump recursion, closed form")


def suzuki5() -> CompositionSpec:
    """Five-stage fourth-order symmetric composition.

    Weights (x, x, 1-4x, x, x) with x = 1/(4 - 4^(1/3)); the negative
    middle step is shorter than in the triple jump, which buys a smaller
    error constant at five stages instead of three.
    """
    x = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
    return CompositionSpec(form="BETA",
                           weights=(x, x, 1.0 - 4.0 * x, x, x),
                           claimed_order=4, symmetric=True, label="suzuki-5",
                           provenance="five-stage fourth-order composition, "
                                      "closed form")


@dataclass(frozen=True)
class ModifiedPotentialSpec:
    """Stage list for schemes that interleave a modified-force flow.

    Stages are (role, coefficient) pairs; roles "a" and "b" run the part
    flows at step power one, role "abb" runs the nested-commutator
    corrector flow at step power three.
    """

    stages: tuple[tuple[str, float], ...]
    claimed_order: int | None = None
    symmetric: bool = False
    label: str = ""
    provenance: str = ""

    def coefficients(self, role: str) -> tuple[float, ...]:
        return tuple(c for r, c in self.stages if r == role)


def chin_abb() -> ModifiedPotentialSpec:
    """Fourth-order four-force-evaluation scheme with one corrector flow.

    Kick sixth, drift half, kick third, corrector, kick third, drift
    half, kick sixth.  The corrector pushes momenta along the gradient of
    the squared force for duration h^3/72, which cancels the one
    remaining third-order error of the symmetric skeleton and upgrades it
    to order four without negative time steps in the part flows.
    """
    s = (("b", 1.0 / 6.0), ("a", 0.5), ("b", 1.0 / 3.0),
         ("abb", 1.0 / 72.0), ("b", 1.0 / 3.0), ("a", 0.5),
         ("b", 1.0 / 6.0))
    return ModifiedPotentialSpec(stages=s, claimed_order=4, symmetric=True,
                                 label="chin-abb",
                                 provenance="modified-potential scheme, "
                                            "closed form")


def catalog() -> dict[str, CompositionSpec | ModifiedPotentialSpec]:
    """All closed-form schemes shipped with the package, by label."""
    entries = [symplectic_euler(), strang(), triple_jump(2), triple_jump(3),
               suzuki5(), chin_abb()]
    return {e.label: e for e in entries}


# ---------------------------------------------------------------------------
# file format

def _format_number(x: float) -> str:
    return format(float(x), ".17g")


def _parse_number(v, where: str) -> float:
    if isinstance(v, bool):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    try:
        x = float(v)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: expected a number, got {v!r}") from exc
    if not math.isfinite(x):
        raise ValidationError(f"{where}: number must be finite")
    return x


def save_spec(spec: CompositionSpec, path) -> None:
    """Write a spec as JSON, coefficients as 17-significant-digit strings.

    Decimal strings rather than JSON numbers make the files round-trip
    bit-exactly through writers that repack floats.
    """
    if not isinstance(spec, CompositionSpec):
        raise ValidationError(f"expected a CompositionSpec, got {spec!r}")
    doc: dict = {"form": spec.form}
    if spec.form in _LIST_KEY:
        doc[_LIST_KEY[spec.form]] = [_format_number(v) for v in spec.weights]
    else:
        doc["a"] = [_format_number(v) for v in spec.a]
        doc["b"] = [_format_number(v) for v in spec.b]
    doc["claimed_order"] = spec.claimed_order
    doc["symmetric"] = spec.symmetric
    doc["label"] = spec.label
    doc["provenance"] = spec.provenance
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_spec(path) -> CompositionSpec:
    """Read and validate a JSON method file written by :func:`save_spec`."""
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise ValidationError(f"{p}: cannot read file: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{p}: top level must be an object")

    form = doc.get("form")
    if form not in FORMS:
        raise ValidationError(f"{p}: form: expected one of {FORMS}, "
                              f"got {form!r}")
    kwargs: dict = {"form": form}
    if form in _LIST_KEY:
        key = _LIST_KEY[form]
        lst = doc.get(key)
        if not isinstance(lst, list):
            raise ValidationError(f"{p}: {key}: expected a list")
        kwargs["weights"] = tuple(_parse_number(v, f"{p}: {key}[{i}]")
                                  for i, v in enumerate(lst))
    else:
        for key in ("a", "b"):
            lst = doc.get(key)
            if not isinstance(lst, list):
                raise ValidationError(f"{p}: {key}: expected a list")
            kwargs[key] = tuple(_parse_number(v, f"{p}: {key}[{i}]")
                                for i, v in enumerate(lst))
    order = doc.get("claimed_order")
    if order is not None and not isinstance(order, int):
        raise ValidationError(f"{p}: claimed_order: expected an integer "
                              f"or null, got {order!r}")
    kwargs["claimed_order"] = order
    symmetric = doc.get("symmetric", False)
    if not isinstance(symmetric, bool):
        raise ValidationError(f"{p}: symmetric: expected true/false")
    kwargs["symmetric"] = symmetric
    for key in ("label", "provenance"):
        v = doc.get(key, "")
        if not isinstance(v, str):
            raise ValidationError(f"{p}: {key}: expected a string")
        kwargs[key] = v
    try:
        return CompositionSpec(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{p}: {exc}") from exc
