"""Command-line surface for the symmetry-discovery pipeline.

One subcommand per stage so experiments compose as shell scripts: generate
data, fit a function / level set / density, find annihilating vector
fields, extract invariants and flow parameters, integrate flows, score
similarity, fit discrete symmetries, pull back metrics, and export
transformed coordinates or gridded function values.

Exit codes: 0 success, 2 validation error, 3 numerical failure.  The
environment variable SYMFIELD_SEED overrides every configured seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import datasets, discrete, geometry, model_fit, vfield
from .features import monomial_basis, trig_extend
from .manifold import (
    DivergenceError,
    OptimizerConfig,
    RetractionSingularError,
)
from .model_fit import EmptyLevelSetError, KdeModel, ScalarFunctionModel
from .serialize import (
    load_json,
    load_model,
    model_to_dict,
    read_csv,
    save_json,
    save_model,
    write_csv,
    _write_table,
)
from .similarity import IntegrationDomain, domain_from_data, similarity
from .vfield import FlowDivergedError

NUMERICAL_ERRORS = (
    DivergenceError,
    FlowDivergedError,
    RetractionSingularError,
    EmptyLevelSetError,
    np.linalg.LinAlgError,
    FloatingPointError,
)


class ValidationError(ValueError):
    pass


def _effective_seed(args, config_seed: int | None = None) -> int:
    env = os.environ.get("SYMFIELD_SEED")
    if env is not None:
        return int(env)
    if getattr(args, "seed", None) is not None:
        return args.seed
    return config_seed if config_seed is not None else 0


def _opt_config(args) -> OptimizerConfig:
    if getattr(args, "opt_config", None):
        cfg = OptimizerConfig.from_dict(load_json(args.opt_config))
    else:
        cfg = OptimizerConfig()
    seed = _effective_seed(args, cfg.seed)
    return OptimizerConfig(
        cfg.algorithm, cfg.loss, cfg.learning_rate, cfg.epochs, seed,
        cfg.adagrad_epsilon,
    )


def _basis_for(args, n: int, include_constant: bool = True):
    basis = monomial_basis(n, args.degree, include_constant=include_constant)
    if getattr(args, "trig", False):
        basis = trig_extend(basis)
    return basis


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(",")], dtype=float)


def cmd_gen(args) -> None:
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        if not _:
            raise ValidationError(f"--param expects NAME=VALUE, got {item!r}")
        params[key] = float(value)
    spec = datasets.GeneratorSpec(
        args.name, args.size, _effective_seed(args), params
    )
    data, targets = datasets.generate(spec)
    write_csv(args.out, data, targets)
    save_json(spec.to_dict(), os.path.splitext(args.out)[0] + ".json")


def cmd_fit_fn(args) -> None:
    data, targets = read_csv(args.data)
    if targets is None:
        raise ValidationError("fit-fn needs a CSV with a target column")
    model = model_fit.fit_regression(
        data, targets, _basis_for(args, data.shape[1])
    )
    out = model_to_dict(model)
    out["residual"] = model.residual
    out["ridge_fallback"] = model.ridge_fallback
    save_json(out, args.out)


def _elbow_fit(data, basis, args, config):
    """(model, trace-dict-or-None) with elbow or explicit component count."""
    if args.k is not None:
        model, loss = model_fit.fit_level_set(data, basis, args.k, config)
        return model, None
    k_max = args.k_max if args.k_max is not None else min(len(basis), 8)
    trace = model_fit.select_components_elbow(
        data, basis, k_max, config, elbow_ratio=args.elbow_ratio
    )
    model, _ = model_fit.fit_level_set(data, basis, trace.selected, config)
    return model, trace.to_dict()


def cmd_fit_levelset(args) -> None:
    data, _ = read_csv(args.data)
    config = _opt_config(args)
    os.makedirs(args.out, exist_ok=True)
    out = lambda name: os.path.join(args.out, name)

    if args.strategy == "project-affine":
        affine, trace = _elbow_fit(
            data, monomial_basis(data.shape[1], 1), args, config
        )
        save_model(affine, out("affine_model.json"))
        if trace is not None:
            save_json(trace, out("affine_elbow.json"))
        reduced, frame = model_fit.project_onto_affine(data, affine)
        write_csv(out("reduced.csv"), reduced)
        save_json(
            {
                "origin": frame.origin.tolist(),
                "axes": [col.tolist() for col in frame.axes.T],
            },
            out("frame.json"),
        )
        if reduced.shape[1] == 0:
            return
        basis = _basis_for(args, reduced.shape[1])
        model, trace = _elbow_fit(reduced, basis, args, config)
        save_model(model, out("reduced_model.json"))
        if trace is not None:
            save_json(trace, out("reduced_elbow.json"))
        return

    basis = _basis_for(args, data.shape[1])
    if args.strategy == "extend-columns":
        known = [load_model(p) for p in args.known or []]
        for m in known:
            if not isinstance(m, ScalarFunctionModel):
                raise ValidationError("--known files must hold scalar models")
        basis = model_fit.extend_degenerate_columns(basis, known, args.degree)
    model, trace = _elbow_fit(data, basis, args, config)
    if args.strategy == "extend-columns":
        save_model(model, out("model_full.json"))
        model = model.strip_artificial()
    save_model(model, out("model.json"))
    if trace is not None:
        save_json(trace, out("elbow.json"))


def cmd_fit_kde(args) -> None:
    data, targets = read_csv(args.data)
    weights = None
    if args.weights == "target":
        if targets is None:
            raise ValidationError("--weights target needs a target column")
        weights = targets**args.weight_power
        weights = weights / weights.sum()
    bandwidth = args.bandwidth if args.bandwidth == "scott" else float(args.bandwidth)
    save_model(model_fit.kde_fit(data, weights, bandwidth), args.out)


def cmd_find_vf(args) -> None:
    provider = vfield.as_provider(load_model(args.model))
    data, _ = read_csv(args.data)
    config = _opt_config(args)
    if args.escalate:
        model, trace = vfield.escalate_vector_fields(
            provider, data, args.c, config
        )
    else:
        basis = monomial_basis(data.shape[1], args.vf_degree)
        model, trace = vfield.estimate_vector_fields(
            provider, data, basis, args.c, config
        )
    save_model(model, args.out)
    if args.trace_out:
        save_json({"final_loss": trace.final_loss}, args.trace_out)


def cmd_find_invariants(args) -> None:
    fields = load_model(args.vf)
    data, _ = read_csv(args.data)
    basis = _basis_for(args, data.shape[1], include_constant=False)
    models, trace = vfield.estimate_invariants(
        fields, data, basis, args.q, _opt_config(args)
    )
    out = {
        "type": "invariants",
        "models": [model_to_dict(m) for m in models],
        "final_loss": trace.final_loss,
    }
    if len(models) > 1:
        values = np.column_stack([m(data) for m in models])
        out["value_correlations"] = np.corrcoef(values.T).tolist()
    save_json(out, args.out)


def cmd_flow_param(args) -> None:
    fields = load_model(args.vf)
    data, _ = read_csv(args.data)
    basis = _basis_for(args, data.shape[1], include_constant=False)
    result = vfield.estimate_flow_parameter(fields, data, basis)
    out = model_to_dict(result.model)
    out["residual"] = result.residual
    out["no_polynomial_flow_parameter"] = result.flagged
    save_json(out, args.out)


def cmd_flow(args) -> None:
    field = load_model(args.field)
    trajectory = vfield.flow_integrate(
        field, _parse_vector(args.x0), args.t, args.steps
    )
    write_csv(args.out, trajectory)


def cmd_sim(args) -> None:
    X = load_model(args.truth)
    X_hat = load_model(args.estimate)
    if args.data:
        domain = domain_from_data(read_csv(args.data)[0])
    elif args.lower and args.upper:
        domain = IntegrationDomain(
            _parse_vector(args.lower), _parse_vector(args.upper)
        )
    else:
        raise ValidationError("sim needs --data or both --lower and --upper")
    report = similarity(
        X, X_hat, domain,
        method=args.method,
        mc_samples=args.mc_samples,
        mc_seed=_effective_seed(args),
    )
    save_json(report.to_dict(), args.out)


def cmd_discrete(args) -> None:
    data, _ = read_csv(args.data)
    model = load_model(args.model)
    if args.family == "density-rotation":
        if not isinstance(model, KdeModel):
            raise ValidationError("density-rotation needs a KDE model")
        result = discrete.fit_density_rotation(model, data, args.theta_min)
        out = result.to_dict()
        if args.reference:
            ref = np.array(load_json(args.reference)["matrix"], dtype=float)
            out["generator_similarity"] = discrete.similarity_matrix(
                result.parameters[0], ref
            )
        save_json(out, args.out)
        return
    if not isinstance(model, ScalarFunctionModel):
        raise ValidationError("discrete fitting needs a scalar model")
    if args.family == "reflection":
        family = discrete.reflection_family()
    elif args.family == "rotation":
        family = discrete.rotation_family(args.lo, args.hi)
    else:
        family = discrete.user_linear_family(
            load_json(args.entries)["entries"],
            args.n_params,
            constraint="interval" if args.lo is not None else "unit-norm",
            interval=(args.lo, args.hi) if args.lo is not None else None,
        )
    result = discrete.fit_discrete(model, data, family, _opt_config(args))
    save_json(result.to_dict(), args.out)


def cmd_pullback(args) -> None:
    source, _ = read_csv(args.source)
    image, _ = read_csv(args.image)
    map_model = geometry.fit_map(
        source, image, monomial_basis(source.shape[1], args.degree)
    )
    g = geometry.pullback_metric(map_model, _parse_vector(args.point))
    save_json({"point": _parse_vector(args.point).tolist(),
               "metric": g.tolist()}, args.out)


def cmd_transform(args) -> None:
    data, _ = read_csv(args.data)
    columns, header = [], []
    if args.invariants:
        spec = load_json(args.invariants)
        for i, d in enumerate(spec["models"]):
            from .serialize import model_from_dict

            model = model_from_dict(d)
            if model.basis.dimension != data.shape[1]:
                raise ValidationError("invariant dimension mismatch")
            columns.append(model(data))
            header.append(f"h{i + 1}")
    if args.angle:
        if data.shape[1] != 2:
            raise ValidationError("--angle needs two-dimensional data")
        columns.append(np.arctan2(data[:, 1], data[:, 0]))
        header.append("theta")
    elif args.flow_param:
        model = load_model(args.flow_param)
        if model.basis.dimension != data.shape[1]:
            raise ValidationError("flow-parameter dimension mismatch")
        columns.append(model(data))
        header.append("theta")
    if not columns:
        raise ValidationError("transform needs invariants, --flow-param, or --angle")
    _write_table(args.out, np.column_stack(columns), header)


def cmd_grid(args) -> None:
    model = load_model(args.model)
    lower = _parse_vector(args.lower)
    upper = _parse_vector(args.upper)
    if lower.size != upper.size or np.any(lower >= upper):
        raise ValidationError("need lower < upper of equal length")
    axes = [np.linspace(lo, hi, args.resolution) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    if isinstance(model, KdeModel):
        values = model_fit.kde_eval(model, points)
    elif isinstance(model, ScalarFunctionModel):
        values = model(points)
    else:
        values = model(points)[:, 0]
    header = [f"x{i + 1}" for i in range(points.shape[1])] + ["value"]
    _write_table(args.out, np.column_stack([points, values]), header)


def _add_common(p, opt=True):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    if opt:
        p.add_argument("--opt-config", default=None,
                       help="JSON optimizer configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symfield",
        description="Symmetry discovery for functions fitted to tabular data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--name", required=True, choices=datasets.GENERATOR_NAMES)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--param", action="append")
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit-fn", help="regress targets over a dictionary")
    p.add_argument("--data", required=True)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--trig", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_fit_fn)

    p = sub.add_parser("fit-levelset", help="constrained level-set estimation")
    p.add_argument("--data", required=True)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--trig", action="store_true")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--elbow-ratio", type=float, default=10.0)
    p.add_argument(
        "--strategy",
        choices=("plain", "project-affine", "extend-columns"),
        default="plain",
    )
    p.add_argument("--known", action="append",
                   help="scalar model JSON for extend-columns")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_fit_levelset)

    p = sub.add_parser("fit-kde", help="weighted kernel density estimation")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", choices=("none", "target"), default="none")
    p.add_argument("--weight-power", type=float, default=1.0)
    p.add_argument("--bandwidth", default="scott")
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_fit_kde)

    p = sub.add_parser("find-vf", help="estimate annihilating vector fields")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--vf-degree", type=int, default=1)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--escalate", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_find_vf)

    p = sub.add_parser("find-invariants", help="estimate invariant features")
    p.add_argument("--vf", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--trig", action="store_true")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_find_invariants)

    p = sub.add_parser("flow-param", help="fit a flow parameter")
    p.add_argument("--vf", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--trig", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_flow_param)

    p = sub.add_parser("flow", help="integrate a vector-field flow")
    p.add_argument("--field", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("sim", help="score two vector fields")
    p.add_argument("--truth", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--lower", default=None)
    p.add_argument("--upper", default=None)
    p.add_argument("--method", default="auto")
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("discrete", help="fit a discrete parametric symmetry")
    p.add_argument("--model", required=True,
                   help="scalar model JSON, or KDE JSON for density-rotation")
    p.add_argument("--data", required=True)
    p.add_argument(
        "--family",
        choices=("reflection", "rotation", "user-linear", "density-rotation"),
        required=True,
    )
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--theta-min", type=float, default=np.pi / 6)
    p.add_argument("--entries", default=None,
                   help="user-linear matrix entries JSON")
    p.add_argument("--n-params", type=int, default=1)
    p.add_argument("--reference", default=None,
                   help="reference generator JSON for similarity scoring")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_discrete)

    p = sub.add_parser("pullback", help="pull back the ambient metric")
    p.add_argument("--source", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--point", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("transform", help="export invariant/flow coordinates")
    p.add_argument("--data", required=True)
    p.add_argument("--invariants", default=None)
    p.add_argument("--flow-param", default=None)
    p.add_argument("--angle", action="store_true",
                   help="append the polar angle of 2-D data")
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("grid", help="gridded function-value CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--lower", required=True)
    p.add_argument("--upper", required=True)
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--out", required=True)
    _add_common(p, opt=False)
    p.set_defaults(func=cmd_grid)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
