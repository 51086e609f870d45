"""Command-line front end.

Subcommands: ``samplesize`` (training-size planning), ``calibrate``
(build one uncertainty set), ``coverage`` (consistency experiment),
``raster`` (set and density images), and ``solve`` (robust LP).  Every
file-writing command drops a ``manifest.json`` beside its outputs that
records the fully resolved configuration; feeding that manifest back
through ``--config`` reproduces the run byte for byte.

Exit codes: 0 success, 2 configuration or domain error, 3 calibration
guarantee violation (undersampled training data in strict mode), 4
solver finished with a non-optimal status.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (
    CalibrationSpec,
    UndersampledError,
    calibrate_radius,
    chernoff_violation_bounds,
    planning_constant,
)
from .experiments import (
    ConsistencyConfig,
    raster_density,
    raster_set,
    run_consistency_experiment,
    write_grid_csv,
    write_pgm,
)
from .geometry import Norm
from .mixtures import RandomStream, bundled_mixture
from .robust import RobustLinearProgram, bundled_example, solve as solve_robust
from .simplex import LPStatus

__all__ = ["main"]

_NORM_NAMES = ("l1", "l2", "linf")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(_dump_json(payload))


def _print_json(payload: dict) -> None:
    sys.stdout.write(_dump_json(payload))


def _load_config(path: str, command: str) -> dict:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    if "command" in data and "config" in data:
        if data["command"] != command:
            raise ValueError(
                f"manifest was written by {data['command']!r}, not {command!r}"
            )
        data = data["config"]
        if not isinstance(data, dict):
            raise ValueError("manifest config must be a JSON object")
    return data


def _resolve_config(defaults: dict, args) -> dict:
    """defaults, overlaid by the --config file, overlaid by explicit flags."""
    config = dict(defaults)
    if getattr(args, "config", None) is not None:
        for key, value in _load_config(args.config, args.command).items():
            if key not in defaults:
                raise ValueError(f"unknown config key {key!r} for {args.command}")
            config[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _resolve_lambda(config: dict) -> CalibrationSpec:
    """Build the calibration spec and echo the numeric lambda back."""
    lam = config["lambda"]
    if isinstance(lam, str) and lam != "optimal":
        lam = float(lam)
    spec = CalibrationSpec(
        alpha=float(config["alpha"]),
        epsilon=float(config["epsilon"]),
        delta=float(config["delta"]),
        lam=lam,
    )
    config["alpha"] = spec.alpha
    config["epsilon"] = spec.epsilon
    config["delta"] = spec.delta
    config["lambda"] = spec.lam
    return spec


def _check_norm(value: str) -> Norm:
    if value not in _NORM_NAMES:
        raise ValueError(f"norm must be one of {_NORM_NAMES}, got {value!r}")
    return Norm(value)


def _positive_int(config: dict, key: str) -> int:
    value = int(config[key])
    if value < 1:
        raise ValueError(f"{key} must be a positive integer, got {value}")
    config[key] = value
    return value


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out_dir", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(
    out: Path, command: str, seed, config: dict, outputs: list[str]
) -> None:
    _write_json(
        out / "manifest.json",
        {
            "command": command,
            "version": __version__,
            "seed": seed,
            "config": config,
            "outputs": sorted(outputs + ["manifest.json"]),
        },
    )


def _load_csv(path: str) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if data.size == 0:
        raise ValueError(f"no rows in {path}")
    return data


_SET_DEFAULTS = {
    "alpha": 0.9,
    "epsilon": 0.05,
    "delta": 0.05,
    "lambda": "optimal",
    "norm": "l2",
    "seed": 0,
    "strict": True,
    "mixture": None,
    "m": None,
    "shape_csv": None,
    "n": None,
    "train_csv": None,
}


def _build_set(config: dict):
    """Calibrate one set from CSV files and/or the generator spec.

    Returns (set, mixture or None); fills the resolved generator sizes
    back into ``config`` so the manifest pins them.
    """
    norm = _check_norm(config["norm"])
    spec = _resolve_lambda(config)
    seed = int(config["seed"])
    config["seed"] = seed
    mixture = None
    if config["mixture"] is not None:
        mixture = bundled_mixture(config["mixture"])

    if config["shape_csv"] is not None:
        if config["m"] is not None:
            raise ValueError("--m sizes generated shapes; drop it with --shape-csv")
        shape = _load_csv(config["shape_csv"])
    else:
        if mixture is None or config["m"] is None:
            raise ValueError("shape sample needs --shape-csv, or --mixture and --m")
        shape = mixture.sample(RandomStream(seed, 0), _positive_int(config, "m"))

    if config["train_csv"] is not None:
        if config["n"] is not None:
            raise ValueError("--n sizes generated training data; drop it with --train-csv")
        if config["shape_csv"] is not None and (
            Path(config["train_csv"]).resolve() == Path(config["shape_csv"]).resolve()
        ):
            raise ValueError(
                "shape and training data must come from different sources"
            )
        training = _load_csv(config["train_csv"])
    else:
        if mixture is None:
            raise ValueError("training sample needs --train-csv, or --mixture")
        if config["n"] is None:
            config["n"] = spec.n_min
        training = mixture.sample(RandomStream(seed, 1), _positive_int(config, "n"))

    strict = bool(config["strict"])
    config["strict"] = strict
    uset = calibrate_radius(shape, norm, training, spec, strict=strict)
    return uset, mixture


def _cmd_samplesize(args) -> int:
    defaults = {"alpha": 0.9, "epsilon": 0.05, "delta": 0.05, "lambda": "optimal"}
    config = _resolve_config(defaults, args)
    spec = _resolve_lambda(config)
    under, over = chernoff_violation_bounds(
        spec.n_min, spec.alpha, spec.epsilon, spec.alpha_n
    )
    _print_json(
        {
            "alpha": spec.alpha,
            "epsilon": spec.epsilon,
            "delta": spec.delta,
            "lambda": spec.lam,
            "c": planning_constant(spec.alpha, spec.epsilon, spec.lam),
            "alpha_n": spec.alpha_n,
            "n_min": spec.n_min,
            "bounds_at_n_min": {"undershoot": under, "overshoot": over},
        }
    )
    return 0


def _cmd_calibrate(args) -> int:
    config = _resolve_config(_SET_DEFAULTS, args)
    out = _out_dir(args)
    uset, _ = _build_set(config)
    payload = uset.to_dict()
    _write_json(out / "set.json", payload)
    _write_manifest(out, "calibrate", config["seed"], config, ["set.json"])
    _print_json(payload)
    return 0


def _cmd_coverage(args) -> int:
    defaults = {
        "alpha": 0.9,
        "epsilon": 0.05,
        "delta": 0.05,
        "lambda": "optimal",
        "norm": "l2",
        "seed": 0,
        "mixture": None,
        "m": None,
        "trials": 200,
        "coverage_samples": 100_000,
    }
    config = _resolve_config(defaults, args)
    spec = _resolve_lambda(config)
    if config["mixture"] is None or config["m"] is None:
        raise ValueError("the coverage experiment needs --mixture and --m")
    cfg = ConsistencyConfig(
        mixture=bundled_mixture(config["mixture"]),
        num_centers=_positive_int(config, "m"),
        calibration=spec,
        trials=_positive_int(config, "trials"),
        coverage_samples=_positive_int(config, "coverage_samples"),
        seed=int(config["seed"]),
        norm=_check_norm(config["norm"]),
    )
    config["seed"] = cfg.seed
    report = run_consistency_experiment(cfg)
    out = _out_dir(args)
    report.write_csv(out / "coverage.csv")
    summary = report.summary()
    _write_json(out / "summary.json", summary)
    _write_manifest(
        out, "coverage", cfg.seed, config, ["coverage.csv", "summary.json"]
    )
    _print_json(summary)
    return 0


def _cmd_raster(args) -> int:
    defaults = dict(_SET_DEFAULTS, resolution=128, bbox=None)
    config = _resolve_config(defaults, args)
    out = _out_dir(args)
    uset, mixture = _build_set(config)
    resolution = _positive_int(config, "resolution")
    if config["bbox"] is None:
        lo = uset.centers.min(axis=0) - 3.0 * uset.radius
        hi = uset.centers.max(axis=0) + 3.0 * uset.radius
        bbox = ((float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1])))
    else:
        x0, x1, y0, y1 = (float(v) for v in config["bbox"])
        bbox = ((x0, x1), (y0, y1))
    config["bbox"] = [bbox[0][0], bbox[0][1], bbox[1][0], bbox[1][1]]

    grid = raster_set(uset, bbox, resolution)
    write_pgm(out / "set.pgm", grid)
    write_grid_csv(out / "set_grid.csv", grid)
    _write_json(out / "set.json", uset.to_dict())
    outputs = ["set.pgm", "set_grid.csv", "set.json", "raster.json"]
    if mixture is not None:
        write_pgm(out / "density.pgm", raster_density(mixture, bbox, resolution))
        outputs.append("density.pgm")
    box_area = (bbox[0][1] - bbox[0][0]) * (bbox[1][1] - bbox[1][0])
    payload = {
        "bbox": config["bbox"],
        "resolution": resolution,
        "inside_fraction": float(grid.mean()),
        "box_area": box_area,
        "radius": float(uset.radius),
        "num_centers": uset.num_balls,
        "norm": config["norm"],
    }
    _write_json(out / "raster.json", payload)
    _write_manifest(out, "raster", config["seed"], config, outputs)
    _print_json(payload)
    return 0


def _cmd_solve(args) -> int:
    defaults = {"model": None, "bundled_example": False}
    config = _resolve_config(defaults, args)
    if bool(config["bundled_example"]) == (config["model"] is not None):
        raise ValueError("pass exactly one of --model or --bundled-example")
    config["bundled_example"] = bool(config["bundled_example"])
    if config["bundled_example"]:
        model = bundled_example()
    else:
        model = RobustLinearProgram.from_dict(
            json.loads(Path(config["model"]).read_text())
        )
    report = solve_robust(model)
    payload = report.to_dict()
    out = _out_dir(args)
    _write_json(out / "report.json", payload)
    _write_manifest(out, "solve", None, config, ["report.json"])
    _print_json(payload)
    return 0 if report.status is LPStatus.OPTIMAL else 4


def _add_level_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="target probability mass")
    parser.add_argument(
        "--eps", type=float, dest="epsilon", help="mass overshoot tolerance"
    )
    parser.add_argument("--delta", type=float, help="failure probability budget")
    parser.add_argument(
        "--lambda",
        dest="lambda",
        metavar="VALUE",
        help='quantile mixing weight in (0, 1), or "optimal"',
    )


def _add_source_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--norm", choices=_NORM_NAMES)
    parser.add_argument("--seed", type=int, help="base seed for all randomness")
    parser.add_argument(
        "--mixture", help="bundled mixture name (isotropic, peaked, fourmode)"
    )
    parser.add_argument("--m", type=int, help="number of shape-sample centers")
    parser.add_argument("--shape-csv", dest="shape_csv", help="headerless CSV of centers")
    parser.add_argument("--n", type=int, help="generated training-sample size")
    parser.add_argument(
        "--train-csv", dest="train_csv", help="headerless CSV of training points"
    )
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument(
        "--strict",
        dest="strict",
        action="store_true",
        default=None,
        help="refuse training samples below n_min (default)",
    )
    mode.add_argument(
        "--advisory",
        dest="strict",
        action="store_false",
        help="warn instead of failing below n_min",
    )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config or a previous manifest.json")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballcover",
        description="Calibrated union-of-balls uncertainty sets and robust LPs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("samplesize", help="plan the training-sample size")
    _add_level_flags(p)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_samplesize)

    p = sub.add_parser("calibrate", help="calibrate one uncertainty set")
    _add_level_flags(p)
    _add_source_flags(p)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_calibrate)

    p = sub.add_parser("coverage", help="run the coverage-consistency experiment")
    _add_level_flags(p)
    p.add_argument("--norm", choices=_NORM_NAMES)
    p.add_argument("--seed", type=int, help="base seed for all randomness")
    p.add_argument("--mixture", help="bundled mixture name")
    p.add_argument("--m", type=int, help="number of shape-sample centers")
    p.add_argument("--trials", type=int, help="number of recalibration trials")
    p.add_argument(
        "--mc-samples",
        type=int,
        dest="coverage_samples",
        help="coverage draws per trial",
    )
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_coverage)

    p = sub.add_parser("raster", help="rasterize a calibrated set")
    _add_level_flags(p)
    _add_source_flags(p)
    p.add_argument("--resolution", type=int, help="pixels per axis")
    p.add_argument(
        "--bbox",
        type=float,
        nargs=4,
        metavar=("XMIN", "XMAX", "YMIN", "YMAX"),
        help="raster window (default: centers padded by three radii)",
    )
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_raster)

    p = sub.add_parser("solve", help="solve a robust linear program")
    p.add_argument("--model", help="model JSON file")
    p.add_argument(
        "--bundled-example",
        dest="bundled_example",
        action="store_true",
        default=None,
        help="solve the built-in two-variable demo",
    )
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_solve)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UndersampledError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
