"""``twoweight`` command line: characteristics, norms, verification suites,
weight generation and parameter sweeps.

Exit codes: 0 success, 1 asserted-verdict failure, 2 usage or configuration
error, 3 invariant violation (non-positive leaf, FKP slack), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .characteristics import CarlesonSequence, theorem_constants, weight_report
from .dyadic import DEFAULT_DEPTH, DyadicError, DyadicTree, NonPositiveWeight, StepWeight
from .factory import (
    FkpCoefficients,
    SlackViolation,
    SpecError,
    fkp_product,
    parse_weight_spec,
    power_weight,
    random_doubling_weight,
    weight_algebra,
    weight_to_spec,
)
from .norms import (
    EigenFailure,
    haar_multiplier_norm,
    linear_operator_norm,
    square_function_norm_result,
    uniform_sigma_norm,
)
from .operators import HaarMultiplierSpec, NearSingular, SignPattern, apply_positive_operator, lambda_from_weights
from .verify import (
    CLAIM_IDS,
    Case,
    check_claims,
    failures,
    run_claims,
    slack_histogram,
    sort_verdicts,
    verdicts_to_csv,
    verdicts_to_json,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INVARIANT, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _weight(spec: Optional[str], depth: Optional[int], seed: Optional[int] = None, stream: int = 0,
            default: Optional[str] = None) -> Optional[StepWeight]:
    spec = spec if spec is not None else default
    if spec is None:
        return None
    text = spec.strip()
    if text.startswith("{"):
        obj = json.loads(text)
        if obj.get("type") == "random":
            obj.setdefault("stream", stream)
        return parse_weight_spec(obj, depth, seed)
    return parse_weight_spec(text, depth, seed)


def _common_depth(args, *specs) -> int:
    """Explicit ``--depth`` wins; otherwise the depth of any leaves/explicit spec; otherwise the default."""
    if args.depth is not None:
        DyadicTree(args.depth)
        return args.depth
    for s in specs:
        if s and s.strip().startswith("{"):
            obj = json.loads(s)
            if "depth" in obj:
                return int(obj["depth"])
            if "leaves" in obj:
                return int(np.log2(len(obj["leaves"])))
    return DEFAULT_DEPTH


# ---------------------------------------------------------------------------
# subcommands


def cmd_characteristics(args) -> int:
    depth = _common_depth(args, args.w, args.u, args.v)
    w = _weight(args.w, depth, args.seed, 2)
    ps = args.p or [2.0]
    if args.u is None and args.v is None:
        rep = weight_report(w, ps)
    else:
        u = _weight(args.u, depth, args.seed, 0, "const1")
        v = _weight(args.v, depth, args.seed, 1, "const1")
        rep = theorem_constants(u, v, w, ps)
    _emit(rep.to_json())
    return EXIT_OK


def cmd_norm(args) -> int:
    depth = _common_depth(args, args.w, args.u, args.v)
    u = _weight(args.u, depth, args.seed, 0, "const1")
    v = _weight(args.v, depth, args.seed, 1, "const1")
    w = _weight(args.w, depth, args.seed, 2, "const1")
    if args.op == "squarefn":
        res = square_function_norm_result(u, v, w, args.method)
        _emit(res.to_json())
        return EXIT_OK
    if args.op == "haarmult":
        if args.sigma_sup:
            sig = uniform_sigma_norm(w, args.t, u, v, budget=args.budget, seed=args.seed or 0)
            _emit({"value": sig.value, "method": f"sigma-sup-{sig.mode}", "depth": depth,
                   "patterns": sig.patterns, "sigma": sig.pattern.to_json()})
            return EXIT_OK
        raw = args.sigma or "all+"
        pattern = SignPattern.from_json(w.tree, json.loads(raw) if raw.strip().startswith("{") else raw)
        value = haar_multiplier_norm(HaarMultiplierSpec(w, args.t, pattern), u, v)
        _emit({"value": value, "method": "eigen", "depth": depth})
        return EXIT_OK
    lam = lambda_from_weights(u, v, w)
    if args.lam:
        lam = CarlesonSequence(w.tree, json.loads(args.lam))
    value = linear_operator_norm(lambda f: apply_positive_operator(w, lam, f), u, v)
    _emit({"value": value, "method": "eigen", "depth": depth})
    return EXIT_OK


@dataclass
class ExperimentConfig:
    depth: int = 5
    weightSpecs: dict = field(default_factory=dict)
    suite: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [1])
    outputDir: str = "results"
    tolerancesOverride: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.depth = int(cfg.depth)
        DyadicTree(cfg.depth)
        cfg.seeds = _seed_range(cfg.seeds)
        try:
            check_claims(cfg.suite)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
        for claim in cfg.tolerancesOverride:
            if claim not in CLAIM_IDS:
                raise UsageError(f"tolerance override for unknown claim {claim!r}")
        return cfg


def _seed_range(seeds) -> list[int]:
    if isinstance(seeds, int):
        return [seeds]
    if isinstance(seeds, dict):
        return list(range(int(seeds["start"]), int(seeds["stop"])))
    if isinstance(seeds, str) and ".." in seeds:
        a, b = seeds.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in seeds]


def _config_case(cfg: ExperimentConfig, seed: int) -> Case:
    specs = dict(cfg.weightSpecs)
    out = {}
    for i, name in enumerate("uvw"):
        spec = specs.get(name, {"type": "random", "epsilon": 0.5})
        if isinstance(spec, dict) and spec.get("type") == "random":
            spec = {"stream": i, **spec}
        out[name] = parse_weight_spec(spec, cfg.depth, seed)
    return Case(f"config-seed{seed}", out["u"], out["v"], out["w"], seed)


def _write_csv(path: Path, rows: list[dict], columns) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def cmd_verify(args) -> int:
    try:
        obj = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    cfg = ExperimentConfig.from_json(obj)
    out = Path(args.output_dir or cfg.outputDir)
    if not out.parent.exists():
        raise UsageError(f"output directory parent {out.parent} does not exist")
    out.mkdir(exist_ok=True)
    verdicts, series = [], []
    try:
        for seed in cfg.seeds:
            case = _config_case(cfg, seed)
            vs = run_claims(case, cfg.suite, cfg.tolerancesOverride)
            verdicts += vs
            if vs:
                rep = theorem_constants(case.u, case.v, case.w)
                for v in vs:
                    ratio = v.lhs / v.rhs if v.asserted and v.rhs not in (0.0,) and np.isfinite(v.rhs) else v.lhs
                    for char in ("jointA2w", "thm1C1", "doubling"):
                        series.append({"claimId": v.claimId, "seed": seed, "depth": case.depth,
                                       "characteristic": char, "charValue": getattr(rep, char), "ratio": ratio})
    finally:
        verdicts = sort_verdicts(verdicts)
        (out / "verdicts.csv").write_text(verdicts_to_csv(verdicts))
        (out / "verdicts.json").write_text(verdicts_to_json(verdicts))
        _write_csv(out / "slack_histogram.csv", slack_histogram(verdicts), ["claimId", "binLow", "binHigh", "count"])
        _write_csv(out / "ratio_series.csv", series,
                   ["claimId", "seed", "depth", "characteristic", "charValue", "ratio"])
    bad = failures(verdicts)
    print(json.dumps({"verdicts": len(verdicts), "failures": len(bad), "outputDir": str(out)}))
    return EXIT_FAIL if bad else EXIT_OK


def cmd_generate(args) -> int:
    depth = args.depth if args.depth is not None else DEFAULT_DEPTH
    tree = DyadicTree(depth)
    if args.type == "power":
        w = power_weight(args.alpha, tree)
    elif args.type == "random":
        w = random_doubling_weight(args.seed, args.epsilon, tree, args.stream)
    elif args.type == "fkp":
        w = fkp_product(FkpCoefficients.from_map(tree, json.loads(args.b or "{}")))
    else:
        if not args.expr:
            raise UsageError("--expr is required for algebra")
        named = {n: _weight(getattr(args, n), depth, args.seed, i, "const1") for i, n in enumerate("uvw")}
        w = weight_algebra(args.expr, **named)
    _emit(weight_to_spec(w))
    return EXIT_OK


SWEEP_COLUMNS = ["param", "depth", "ap2", "rhp2", "aInf", "rh1", "doubling", "squareNorm", "squareNormOnW"]


def _sweep_weight(family: str, x: float, args) -> StepWeight:
    if family == "power":
        return power_weight(x, DyadicTree(args.depth or 6))
    if family == "epsilon":
        return random_doubling_weight(args.seed or 0, x, DyadicTree(args.depth or 6))
    # depth family: every b_I at the same fraction r of sqrt|I|
    d = int(x)
    tree = DyadicTree(d)
    lens = np.concatenate([np.full(1 << j, 2.0 ** (-j / 2)) for j in range(d)])
    return fkp_product(FkpCoefficients(tree, args.ratio * lens, 1.0 - args.ratio))


def cmd_sweep(args) -> int:
    values = [float(s) for s in args.values.split(",")]
    rows = []
    for x in values:
        w = _sweep_weight(args.family, x, args)
        one = StepWeight.constant(w.tree)
        rep = weight_report(w, [2.0])
        rows.append({
            "param": x, "depth": w.depth, "ap2": rep.ap[2], "rhp2": rep.rhp[2], "aInf": rep.aInf,
            "rh1": rep.rh1, "doubling": rep.doubling,
            "squareNorm": square_function_norm_result(one, one, w).value,
            "squareNormOnW": square_function_norm_result(w, w, one).value,
        })
    if args.output:
        _write_csv(Path(args.output), rows, SWEEP_COLUMNS)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoweight", description="Two-weight dyadic operator toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def weights(p, w_required=False):
        p.add_argument("--u", help="weight spec (JSON or constC)")
        p.add_argument("--v", help="weight spec (JSON or constC)")
        p.add_argument("--w", required=w_required, help="weight spec (JSON or constC)")
        p.add_argument("--depth", type=int)
        p.add_argument("--seed", type=int, help="seed for random specs without one")

    p = sub.add_parser("characteristics", help="weight characteristics and theorem constants")
    weights(p, w_required=True)
    p.add_argument("--p", type=float, action="append", help="exponent (repeatable)")
    p.set_defaults(func=cmd_characteristics)

    p = sub.add_parser("norm", help="exact operator norm")
    weights(p)
    p.add_argument("--op", choices=["squarefn", "haarmult", "positive"], required=True)
    p.add_argument("--t", type=float, default=1.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigma", help="all+, all- or {\"default\":1,\"overrides\":{\"j,k\":-1}}")
    g.add_argument("--sigma-sup", action="store_true", help="supremum over sign patterns")
    p.add_argument("--budget", type=int, default=1024, help="sampled sign patterns when not exhaustive")
    p.add_argument("--method", choices=["eigh", "power"], default="eigh")
    p.add_argument("--lam", help="explicit heap-ordered lambda for the positive operator")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("verify", help="run a verification suite from a config file")
    p.add_argument("config")
    p.add_argument("--output-dir", help="overrides outputDir from the config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="emit a weight spec")
    p.add_argument("--type", choices=["power", "random", "fkp", "algebra"], required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--b", help="FKP coefficients {\"j,k\": value}")
    p.add_argument("--expr", help="e.g. \"u^-1*w^2\"")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--w")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="characteristics and norms along a weight family")
    p.add_argument("--family", choices=["power", "epsilon", "depth"], required=True)
    p.add_argument("--values", required=True, help="comma-separated parameter values")
    p.add_argument("--depth", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--ratio", type=float, default=0.5, help="b_I / sqrt|I| for the depth family")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NonPositiveWeight, SlackViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (EigenFailure, NearSingular, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, SpecError, DyadicError, json.JSONDecodeError, KeyError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
