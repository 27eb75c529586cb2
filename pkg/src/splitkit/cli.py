"""Command-line front end.

Subcommands mirror the library layers: ``method`` inspects and converts
coefficient specs, ``order`` runs the certification machinery,
``stability`` scans the unit-oscillator stability interval, and
``bench`` drives the experiment runner and its canned presets.  All
numeric output keeps 17 significant digits so files written here
round-trip losslessly.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import SplitkitError, ConfigurationError
from .methods import (CompositionSpec, ModifiedPotentialSpec, ab_to_alpha,
                      alpha_to_ab, beta_to_alpha, catalog, load_spec,
                      save_spec)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _resolve_spec(name_or_path: str):
    """A catalog label, or a path to a JSON spec file."""
    cat = catalog()
    if name_or_path in cat:
        return cat[name_or_path]
    if os.path.exists(name_or_path):
        return load_spec(name_or_path)
    raise ConfigurationError(
        f"{name_or_path!r} is neither a catalog label {sorted(cat)} "
        "nor an existing file")


def _alphas_of(spec) -> tuple[float, ...]:
    if isinstance(spec, ModifiedPotentialSpec):
        raise ConfigurationError(
            f"{spec.label!r} interleaves a corrector flow and has no "
            "alternating-coefficient expansion")
    if spec.form == "ALPHA":
        return spec.weights
    if spec.form == "BETA":
        return beta_to_alpha(spec).weights
    if spec.form == "GAMMA_PROCESSOR":
        raise ConfigurationError("a processor chain is not a complete method")
    return ab_to_alpha(spec).weights


# ---------------------------------------------------------------------------
# method

def _print_spec(spec) -> None:
    print(f"label:         {spec.label or '(unnamed)'}")
    if isinstance(spec, ModifiedPotentialSpec):
        print("form:          modified-potential stage list")
        print(f"claimed order: {spec.claimed_order}")
        print(f"symmetric:     {spec.symmetric}")
        for role, c in spec.stages:
            print(f"  {role:4s} {_fmt(c)}")
        return
    print(f"form:          {spec.form}")
    print(f"claimed order: {spec.claimed_order}")
    print(f"symmetric:     {spec.symmetric}")
    if spec.form in ("ALPHA", "BETA", "GAMMA_PROCESSOR"):
        key = {"ALPHA": "alpha", "BETA": "beta",
               "GAMMA_PROCESSOR": "gamma"}[spec.form]
        print(f"{key}: " + "  ".join(_fmt(v) for v in spec.weights))
    else:
        print("a: " + "  ".join(_fmt(v) for v in spec.a))
        print("b: " + "  ".join(_fmt(v) for v in spec.b))
    if spec.provenance:
        print(f"provenance:    {spec.provenance}")


def _cmd_method_show(args) -> int:
    _print_spec(_resolve_spec(args.spec))
    return 0


def _cmd_method_convert(args) -> int:
    spec = _resolve_spec(args.spec)
    if isinstance(spec, ModifiedPotentialSpec):
        raise ConfigurationError(
            "modified-potential stage lists have no pair/alpha conversion")
    if args.to == "alpha":
        if spec.form == "ALPHA":
            out = spec
        elif spec.form == "BETA":
            out = beta_to_alpha(spec)
        else:
            out = ab_to_alpha(spec)
    else:
        if spec.form == "BETA":
            spec = beta_to_alpha(spec)
        out = alpha_to_ab(spec) if spec.form == "ALPHA" else \
            alpha_to_ab(ab_to_alpha(spec))
    _print_spec(out)
    if args.out:
        save_spec(out, args.out)
        print(f"written: {args.out}")
    return 0


def _cmd_method_validate(args) -> int:
    from .order import certify
    spec = _resolve_spec(args.spec)  # invariants checked on load
    print(f"{spec.label or args.spec}: structurally valid")
    if isinstance(spec, ModifiedPotentialSpec):
        print("claimed order not re-certified (corrector-flow scheme)")
        return 0
    if spec.form == "GAMMA_PROCESSOR":
        print("processor chain: no standalone order to certify")
        return 0
    claimed = spec.claimed_order
    if claimed is None:
        print("no claimed order to certify")
        return 0
    rep = certify(_alphas_of(spec), max_order=claimed)
    print(f"claimed order {claimed}, certified order {rep.certified_order}")
    if rep.certified_order < claimed:
        worst = max(rep.failing.items(), key=lambda kv: abs(kv[1]))
        print(f"first failure at {worst[0]}: residual {_fmt(worst[1])}")
        return 1
    return 0


# ---------------------------------------------------------------------------
# order

def _cmd_order_certify(args) -> int:
    from .order import certify
    spec = _resolve_spec(args.method)
    assume = "time_symmetric" if args.assume_symmetric else "general"
    rep = certify(_alphas_of(spec), max_order=args.max_order,
                  symmetry_assumptions=assume)
    for idx in sorted(rep.residuals, key=lambda k: (sum(k), k)):
        r = rep.residuals[idx]
        mark = "ok " if abs(r) <= rep.tol else "VIOLATED"
        print(f"  {' '.join(map(str, idx)):12s} {_fmt(r):>24s}  {mark}")
    print(f"certified order: {rep.certified_order}")
    return 0


def _cmd_order_lyndon(args) -> int:
    from .order import lyndon_multiindices
    for idx in lyndon_multiindices(args.weight):
        print(" ".join(map(str, idx)))
    return 0


def _cmd_order_counts(args) -> int:
    from .order import count_conditions
    print("k   n_k  m_k")
    for k in range(1, args.max + 1):
        n, m = count_conditions(k)
        print(f"{k:<3d} {n:<4d} {m:<4d}")
    return 0


def _cmd_order_effective(args) -> int:
    from .processing import effective_order_conditions, processor_conditions
    kernel = _resolve_spec(args.kernel)
    ka = _alphas_of(kernel)
    res = effective_order_conditions(ka, target=args.target)
    print(f"kernel conditions (target {args.target}):")
    worst = 0.0
    for key, val in res.items():
        worst = max(worst, abs(val))
        print(f"  {key:24s} {_fmt(val)}")
    if args.processor:
        proc = load_spec(args.processor)
        if proc.form in ("GAMMA_PROCESSOR", "ALPHA"):
            gammas = proc.weights
        else:
            raise ConfigurationError(
                f"processor file must hold a gamma or alpha list, "
                f"got form {proc.form}")
        pres = processor_conditions(ka, gammas, target=args.target)
        print(f"processor conditions (target {args.target}):")
        for key, val in pres.items():
            worst = max(worst, abs(val))
            print(f"  {key:32s} {_fmt(val)}")
    verdict = "satisfied" if worst <= 1e-12 else "violated"
    print(f"max |residual| = {_fmt(worst)} -> {verdict} at 1e-12")
    return 0


# ---------------------------------------------------------------------------
# stability

def _cmd_stability(args) -> int:
    from .linear import (stability_functions, stability_matrix,
                         stability_threshold)
    spec = _resolve_spec(args.method)
    if isinstance(spec, ModifiedPotentialSpec):
        raise ConfigurationError(
            "modified-potential stage lists have no scalar stability matrix")
    thr = stability_threshold(spec, hmax=args.hmax)
    rows = []
    for k in range(1, args.points + 1):
        h = args.hmax * k / args.points
        fns = stability_functions(stability_matrix(spec, h))
        rows.append((h, fns["p"], fns["stable"]))
    if args.emit == "csv":
        print(f"# method {spec.label or args.method}")
        print(f"# threshold {_fmt(thr)}")
        print("h,p,stable")
        for h, p, ok in rows:
            print(f"{_fmt(h)},{_fmt(p)},{int(ok)}")
    else:
        print(f"stability of {spec.label or args.method} "
              f"on (0, {_fmt(args.hmax)}]")
        print(f"threshold: {_fmt(thr)}")
        for h, p, ok in rows:
            print(f"  h={_fmt(h):<22s} p={_fmt(p):<24s} "
                  f"{'stable' if ok else 'unstable'}")
    return 0


# ---------------------------------------------------------------------------
# bench

def _parse_params(text: str) -> dict:
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ConfigurationError(
                f"parameter {item!r} is not of the form name=value")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigurationError(f"parameter {key!r}: bad number {val!r}")
    return out


def _cmd_bench_run(args) -> int:
    from .bench import ExperimentConfig, run_experiment
    if args.config:
        config = ExperimentConfig.from_json(args.config)
    else:
        if not (args.problem and args.methods and args.h):
            raise ConfigurationError(
                "direct mode needs --problem, --methods and --h "
                "(or use --config)")
        config = ExperimentConfig(
            problem=args.problem,
            problem_params=_parse_params(args.param),
            methods=args.methods.split(","),
            h_list=[float(v) for v in args.h.split(",")],
            t_end=args.t_end,
            observables=(args.observables.split(",") if args.observables
                         else ["energy_error"]),
            x0=([float(v) for v in args.x0.split(",")] if args.x0 else None),
            sample_every=args.sample_every,
            uncertified=args.uncertified,
        )
    text = run_experiment(config, out=args.out)
    if args.out:
        print(f"written: {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench_preset(args) -> int:
    from .bench import run_preset
    _, checks = run_preset(args.name, out=args.out)
    failed_gating = False
    for desc, ok, detail, gating in checks:
        tag = "PASS" if ok else "FAIL"
        print(f"{tag} {desc}  ({detail})")
        if gating and not ok:
            failed_gating = True
    if args.out:
        print(f"written: {args.out}")
    return 1 if failed_gating else 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    from .bench import preset_names
    ap = argparse.ArgumentParser(
        prog="splitkit",
        description="splitting-method construction, certification, "
                    "stability, and benchmarks")
    sub = ap.add_subparsers(dest="group", required=True)

    m = sub.add_parser("method", help="inspect and convert coefficient specs")
    msub = m.add_subparsers(dest="command", required=True)
    p = msub.add_parser("show", help="print a spec")
    p.add_argument("spec", help="catalog label or spec file")
    p.set_defaults(fn=_cmd_method_show)
    p = msub.add_parser("convert", help="rewrite a spec in another form")
    p.add_argument("spec", help="catalog label or spec file")
    p.add_argument("--to", choices=("alpha", "ab"), required=True)
    p.add_argument("--out", help="write the converted spec here")
    p.set_defaults(fn=_cmd_method_convert)
    p = msub.add_parser("validate", help="check invariants and claimed order")
    p.add_argument("spec", help="catalog label or spec file")
    p.set_defaults(fn=_cmd_method_validate)

    o = sub.add_parser("order", help="order conditions and certification")
    osub = o.add_subparsers(dest="command", required=True)
    p = osub.add_parser("certify", help="evaluate order conditions")
    p.add_argument("--method", required=True)
    p.add_argument("--max-order", type=int, required=True)
    p.add_argument("--assume-symmetric", action="store_true",
                   help="skip conditions settled by time symmetry")
    p.set_defaults(fn=_cmd_order_certify)
    p = osub.add_parser("lyndon", help="list condition multi-indices")
    p.add_argument("--weight", type=int, required=True)
    p.set_defaults(fn=_cmd_order_lyndon)
    p = osub.add_parser("counts", help="condition counts per weight")
    p.add_argument("--max", type=int, default=11)
    p.set_defaults(fn=_cmd_order_counts)
    p = osub.add_parser("effective",
                        help="kernel/processor condition residuals")
    p.add_argument("--kernel", required=True)
    p.add_argument("--processor")
    p.add_argument("--target", type=int, choices=(4, 5), default=4)
    p.set_defaults(fn=_cmd_order_effective)

    s = sub.add_parser("stability", help="unit-oscillator stability scan")
    s.add_argument("--method", required=True)
    s.add_argument("--hmax", type=float, default=4.0)
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--emit", choices=("csv", "text"), default="text")
    s.set_defaults(fn=_cmd_stability)

    b = sub.add_parser("bench", help="experiment runner")
    bsub = b.add_subparsers(dest="command", required=True)
    p = bsub.add_parser("run", help="run a configured batch")
    p.add_argument("--config", help="experiment JSON file")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--problem", help="problem name (direct mode)")
    p.add_argument("--param", default="",
                   help="problem parameters, e.g. eps=0.001,e=0.2")
    p.add_argument("--methods", help="comma-separated method names")
    p.add_argument("--h", help="comma-separated step sizes")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--observables", default="")
    p.add_argument("--x0", default="",
                   help="comma-separated initial state override")
    p.add_argument("--sample-every", type=int, default=0)
    p.add_argument("--uncertified", action="store_true",
                   help="run file-loaded methods without the order check")
    p.set_defaults(fn=_cmd_bench_run)
    p = bsub.add_parser("preset", help="run a canned figure experiment")
    p.add_argument("name", choices=preset_names())
    p.add_argument("--out", help="write the preset CSV here")
    p.set_defaults(fn=_cmd_bench_preset)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SplitkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
