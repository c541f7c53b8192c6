"""Batch command line for the detection pipeline.

Subcommands mirror the pipeline stages (``synth``, ``segment``, ``dict``,
``detect``, ``eval``) plus a single-shot ``run`` that wires them together
with content-hash stage caching.  Every stage reads its inputs from disk and
writes a JSON summary next to its artifacts, so individual subcommands
compose to exactly what ``run`` produces.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import raster
from .core import HsiCube, flatten, normalize_scores
from .dictionary import AtomSource, UnionDictionary, build_union_dictionary
from .errors import ConfigError, HsiadError, NumericError, RasterFormatError
from .evaluation import PERCENTILE_LEVELS, roc, separability
from .rx import fit_stats, rx_scores
from .segmentation import SuperpixelMap, segment
from .solver import (
    SolverConfig,
    kernel_cache,
    score_knjcr,
    score_njcr,
    solve_knjcr,
    solve_njcr,
)
from .svgplot import roc_svg, separability_svg, superpixel_overlay_svg
from .synth import (
    default_layout,
    default_panel_specs,
    generate_background,
    held_out_target,
    implant_panels,
    panel_placements,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_NONCONVERGED = 5

_METHODS = ("njcr", "knjcr", "rx")

DEFAULT_CONFIG = {
    "method": "njcr",
    "paths": {"cube": None, "truth": None},
    "synth": {
        "width": 100,
        "height": 100,
        "bands": 50,
        "materials": 5,
        "seed": 7,
        "noise_std": 0.01,
        "target_scale": 1.0,
    },
    "segmentation": {
        "superpixels": 100,
        "sigma_g": None,
        "seed": 1,
        "connectivity": 4,
    },
    "dictionary": {"m_per_superpixel": 5, "p_anomaly": 50, "ridge_eps": 1e-6},
    "solver": {
        "lambda": 0.5,
        "rho": 1.0,
        "epsilon": 1e-4,
        "max_iter": 60,
        "kernel": "rbf",
        "sigma": 4.0,
    },
    "evaluation": {"svg": True},
}


def _fail(message: str) -> None:
    print(f"hsiad: {message}", file=sys.stderr)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _cache_key(params: dict, *input_files) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(params, sort_keys=True).encode())
    for f in input_files:
        h.update(b"\x00")
        h.update(_file_digest(f).encode())
    return h.hexdigest()[:16]


def _is_cached(summary_path: Path, key: str, outputs) -> bool:
    if not summary_path.exists() or not all(Path(o).exists() for o in outputs):
        return False
    try:
        meta = json.loads(summary_path.read_text())
    except (OSError, json.JSONDecodeError):
        return False
    return meta.get("cache_key") == key


def _solver_config(params: dict, method: str) -> SolverConfig:
    kernel = "linear" if method == "njcr" else params.get("kernel", "rbf")
    try:
        return SolverConfig(
            lam=float(params["lambda"]),
            rho=float(params["rho"]),
            epsilon=float(params["epsilon"]),
            max_iter=int(params["max_iter"]),
            kernel=kernel,
            sigma=float(params.get("sigma", 4.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


# ---------------------------------------------------------------------------
# stages


def stage_synth(params: dict, out_dir: Path, cache_key: str = "") -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    width, height = int(params["width"]), int(params["height"])
    bands, materials = int(params["bands"]), int(params["materials"])
    seed = int(params["seed"])
    base = generate_background(
        width, height, bands, materials, seed, noise_std=float(params["noise_std"])
    )
    target = held_out_target(bands, materials, seed, scale=float(params["target_scale"]))
    specs = default_panel_specs()
    layout = default_layout(width, height)
    cube, truth = implant_panels(base, target, specs, layout)
    raster.save_cube(cube, out_dir / "cube.raster")
    raster.save_mask(truth, out_dir / "truth.raster")
    summary = {
        "cache_key": cache_key,
        "params": params,
        "anomaly_pixels": truth.anomaly_count,
        "panels": panel_placements(specs, layout),
    }
    _write_json(out_dir / "scene.json", summary)
    return summary


def stage_segment(cube_path: Path, params: dict, out_dir: Path, cache_key: str = "") -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    cube = raster.load_cube(cube_path)
    sigma_g = params.get("sigma_g")
    labels = segment(
        cube,
        int(params["superpixels"]),
        sigma_g=None if sigma_g is None else float(sigma_g),
        seed=int(params["seed"]),
        connectivity=int(params.get("connectivity", 4)),
    )
    raster.save_labels(labels.labels, out_dir / "labels.raster")
    if params.get("svg"):
        (out_dir / "segment.svg").write_text(superpixel_overlay_svg(labels.labels))
    sizes = np.bincount(labels.labels.reshape(-1))
    summary = {
        "cache_key": cache_key,
        "params": params,
        "superpixel_count": labels.superpixel_count,
        "smallest_superpixel": int(sizes.min()),
        "largest_superpixel": int(sizes.max()),
    }
    _write_json(out_dir / "segment.json", summary)
    return summary


def stage_dict(
    cube_path: Path, labels_path: Path, params: dict, out_dir: Path, cache_key: str = ""
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    cube = raster.load_cube(cube_path)
    X = flatten(cube)
    labels = raster.load_labels(labels_path)
    superpixels = SuperpixelMap(cube.width, cube.height, labels.astype(np.int64))
    stats = fit_stats(X, float(params["ridge_eps"]))
    scores = rx_scores(X, stats)
    dictionary = build_union_dictionary(
        X,
        superpixels,
        scores,
        m_per_superpixel=int(params["m_per_superpixel"]),
        p=int(params["p_anomaly"]),
    )
    atoms = dictionary.atoms
    raster.save_cube(
        HsiCube(atoms.shape[1], 1, atoms.shape[0], atoms),
        out_dir / "dictionary.raster",
    )
    summary = {
        "cache_key": cache_key,
        "params": params,
        "k_background": dictionary.k_background,
        "k_anomaly": dictionary.k_anomaly,
        "rx_ridge": stats.ridge,
        "sources": [
            {"kind": s.kind, "pixel_index": s.pixel_index, "group": s.group}
            for s in dictionary.sources
        ],
    }
    _write_json(out_dir / "dictionary.json", summary)
    return summary


def _load_dictionary(dict_dir: Path) -> UnionDictionary:
    atoms_cube = raster.load_cube(Path(dict_dir) / "dictionary.raster")
    meta = json.loads((Path(dict_dir) / "dictionary.json").read_text())
    atoms = atoms_cube.values.reshape(atoms_cube.bands, atoms_cube.width)
    sources = tuple(
        AtomSource(s["kind"], int(s["pixel_index"]), int(s["group"]))
        for s in meta["sources"]
    )
    return UnionDictionary(
        atoms, int(meta["k_background"]), int(meta["k_anomaly"]), sources
    )


def stage_detect(
    cube_path: Path,
    dict_dir: Path | None,
    method: str,
    solver_params: dict,
    ridge_eps: float,
    out_dir: Path,
    cache_key: str = "",
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    cube = raster.load_cube(cube_path)
    X = flatten(cube)
    summary: dict = {"cache_key": cache_key, "method": method}
    if method == "rx":
        stats = fit_stats(X, ridge_eps)
        scores = rx_scores(X, stats)
        summary["rx_ridge"] = stats.ridge
        summary["converged"] = True
    else:
        if dict_dir is None:
            raise ConfigError(f"method {method!r} needs a dictionary (--dict)")
        dictionary = _load_dictionary(dict_dir)
        cfg = _solver_config(solver_params, method)
        if method == "njcr":
            result = solve_njcr(X, dictionary, cfg)
            scores = score_njcr(X, dictionary, result.coefficients)
        else:
            cache = kernel_cache(dictionary, X, cfg.kernel, cfg.sigma)
            result = solve_knjcr(X, dictionary, cfg, cache=cache)
            scores = score_knjcr(X, dictionary, result.coefficients, cfg, cache=cache)
        summary["solver"] = {
            "lambda": cfg.lam,
            "rho": cfg.rho,
            "epsilon": cfg.epsilon,
            "max_iter": cfg.max_iter,
            "kernel": cfg.kernel,
            "sigma": cfg.sigma,
        }
        summary["converged"] = result.converged
        summary["iterations"] = result.iterations
        summary["primal_residuals"] = [float(v) for v in result.primal_history]
        summary["dual_residuals"] = [float(v) for v in result.dual_history]
    raster.save_scores(scores, out_dir / "scores.raster")
    raster.write_score_csv(scores, out_dir / "scores.csv")
    _write_json(out_dir / "detect.json", summary)
    return summary


def stage_eval(
    scores_path: Path, truth_path: Path, out_dir: Path, svg: bool = True, cache_key: str = ""
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    scores = raster.load_scores(scores_path)
    truth = raster.load_mask(truth_path)
    report = roc(scores, truth)
    stats = separability(normalize_scores(scores), truth)
    with open(out_dir / "roc.csv", "w") as fh:
        fh.write("tau,pf,pd\n")
        for t, f, d in zip(report.thresholds, report.pf, report.pd):
            fh.write(f"{t!r},{f!r},{d!r}\n")
    with open(out_dir / "separability.csv", "w") as fh:
        fh.write("class," + ",".join(f"p{p}" for p in PERCENTILE_LEVELS) + "\n")
        fh.write("background," + ",".join(repr(float(v)) for v in stats.background) + "\n")
        fh.write("anomaly," + ",".join(repr(float(v)) for v in stats.anomaly) + "\n")
    if svg:
        (out_dir / "roc.svg").write_text(roc_svg(report))
        (out_dir / "separability.svg").write_text(separability_svg(stats))
    summary = {
        "cache_key": cache_key,
        "auc_pd_pf": report.auc_pd_pf,
        "auc_pf_tau": report.auc_pf_tau,
        "separation_gap": stats.separation_gap,
        "background_percentiles": [float(v) for v in stats.background],
        "anomaly_percentiles": [float(v) for v in stats.anomaly],
    }
    _write_json(out_dir / "eval.json", summary)
    return summary


# ---------------------------------------------------------------------------
# configuration


def _merge_config(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and base[key] is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge_config(base[key], value, where)
        else:
            out[key] = value
    return out


def _load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = _merge_config(cfg, user)
    return cfg


def _apply_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    if args.method is not None:
        cfg["method"] = args.method
    for section, names in (
        ("synth", ("width", "height", "bands", "materials", "noise_std")),
        ("segmentation", ("superpixels", "sigma_g", "connectivity")),
        ("dictionary", ("m_per_superpixel", "p_anomaly", "ridge_eps")),
        ("solver", ("rho", "epsilon", "max_iter", "kernel", "sigma")),
    ):
        for name in names:
            value = getattr(args, name, None)
            if value is not None:
                cfg[section][name] = value
    if getattr(args, "lam", None) is not None:
        cfg["solver"]["lambda"] = args.lam
    if getattr(args, "seed", None) is not None:
        cfg["synth"]["seed"] = args.seed
    return cfg


def _validate_config(cfg: dict) -> None:
    if cfg["method"] not in _METHODS:
        raise ConfigError(f"method must be one of {_METHODS}, got {cfg['method']!r}")
    paths = cfg["paths"]
    have_paths = paths.get("cube") is not None or paths.get("truth") is not None
    if have_paths and (paths.get("cube") is None or paths.get("truth") is None):
        raise ConfigError("paths.cube and paths.truth must be given together")
    if have_paths:
        for key in ("cube", "truth"):
            if not Path(paths[key]).exists():
                raise ConfigError(f"paths.{key} does not exist: {paths[key]}")
    _solver_config(cfg["solver"], cfg["method"])


# ---------------------------------------------------------------------------
# run orchestration


def _run_pipeline(cfg: dict, out_dir: Path, force: bool, strict: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    stages: dict[str, dict] = {}

    def timed(name, key, marker, outputs, producer):
        t0 = time.perf_counter()
        if not force and _is_cached(marker, key, outputs):
            summary = json.loads(marker.read_text())
            summary["cached"] = True
        else:
            try:
                summary = producer(key)
            except Exception as exc:
                _write_json(
                    marker.parent / "failed.json",
                    {"stage": name, "error": f"{type(exc).__name__}: {exc}"},
                )
                _fail(f"stage {name} failed: {exc}")
                raise
            summary["cached"] = False
        timings[name] = round(time.perf_counter() - t0, 3)
        stages[name] = summary
        return summary

    if cfg["paths"]["cube"] is not None:
        cube_path = Path(cfg["paths"]["cube"])
        truth_path = Path(cfg["paths"]["truth"])
    else:
        synth_dir = out_dir / "synth"
        key = _cache_key({"synth": cfg["synth"]})
        timed(
            "synth",
            key,
            synth_dir / "scene.json",
            [synth_dir / "cube.raster", synth_dir / "truth.raster"],
            lambda k: stage_synth(cfg["synth"], synth_dir, k),
        )
        cube_path = synth_dir / "cube.raster"
        truth_path = synth_dir / "truth.raster"

    seg_dir = out_dir / "segment"
    key = _cache_key({"segmentation": cfg["segmentation"]}, cube_path)
    timed(
        "segment",
        key,
        seg_dir / "segment.json",
        [seg_dir / "labels.raster"],
        lambda k: stage_segment(cube_path, cfg["segmentation"], seg_dir, k),
    )

    dict_dir = out_dir / "dict"
    key = _cache_key({"dictionary": cfg["dictionary"]}, cube_path, seg_dir / "labels.raster")
    timed(
        "dict",
        key,
        dict_dir / "dictionary.json",
        [dict_dir / "dictionary.raster"],
        lambda k: stage_dict(cube_path, seg_dir / "labels.raster", cfg["dictionary"], dict_dir, k),
    )

    ridge_eps = float(cfg["dictionary"]["ridge_eps"])
    methods = [cfg["method"]]
    if "rx" not in methods:
        methods.append("rx")  # baseline comparison always reported
    metrics = {}
    convergence = {}
    for method in methods:
        det_dir = out_dir / f"detect-{method}"
        needs_dict = method != "rx"
        params = {
            "method": method,
            "solver": cfg["solver"] if needs_dict else None,
            "ridge_eps": ridge_eps,
        }
        inputs = [cube_path] + ([dict_dir / "dictionary.raster"] if needs_dict else [])
        key = _cache_key(params, *inputs)
        det = timed(
            f"detect-{method}",
            key,
            det_dir / "detect.json",
            [det_dir / "scores.raster"],
            lambda k, m=method, d=det_dir: stage_detect(
                cube_path, dict_dir if m != "rx" else None, m, cfg["solver"], ridge_eps, d, k
            ),
        )
        convergence[method] = {
            "converged": det.get("converged", True),
            "iterations": det.get("iterations"),
        }
        eval_dir = out_dir / f"eval-{method}"
        key = _cache_key(
            {"evaluation": cfg["evaluation"]}, det_dir / "scores.raster", truth_path
        )
        ev = timed(
            f"eval-{method}",
            key,
            eval_dir / "eval.json",
            [eval_dir / "roc.csv"],
            lambda k, d=det_dir, e=eval_dir: stage_eval(
                d / "scores.raster", truth_path, e, bool(cfg["evaluation"].get("svg", True)), k
            ),
        )
        metrics[method] = {
            "auc_pd_pf": ev["auc_pd_pf"],
            "auc_pf_tau": ev["auc_pf_tau"],
            "separation_gap": ev["separation_gap"],
        }

    summary = {
        "method": cfg["method"],
        "config": cfg,
        "metrics": metrics,
        "convergence": convergence,
        "stages": {k: {"cached": v.get("cached", False)} for k, v in stages.items()},
    }
    _write_json(out_dir / "summary.json", summary)
    # Timings are volatile, so they live outside the deterministic summary.
    _write_json(out_dir / "timings.json", {"seconds": timings})
    print(json.dumps({"out_dir": str(out_dir), "metrics": metrics}, indent=2, sort_keys=True))
    main_conv = convergence.get(cfg["method"], {"converged": True})
    if strict and not main_conv["converged"]:
        _fail("solver did not converge within max_iter (strict mode)")
        return EXIT_NONCONVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def _cmd_synth(args) -> int:
    params = {
        "width": args.width,
        "height": args.height,
        "bands": args.bands,
        "materials": args.materials,
        "seed": args.seed,
        "noise_std": args.noise_std,
        "target_scale": args.target_scale,
    }
    stage_synth(params, Path(args.out_dir), _cache_key({"synth": params}))
    return EXIT_OK


def _cmd_segment(args) -> int:
    params = {
        "superpixels": args.superpixels,
        "sigma_g": args.sigma_g,
        "seed": args.seed,
        "connectivity": args.connectivity,
        "svg": args.svg,
    }
    key = _cache_key({"segmentation": params}, args.cube)
    stage_segment(Path(args.cube), params, Path(args.out_dir), key)
    return EXIT_OK


def _cmd_dict(args) -> int:
    params = {
        "m_per_superpixel": args.m_per_superpixel,
        "p_anomaly": args.p_anomaly,
        "ridge_eps": args.ridge_eps,
    }
    key = _cache_key({"dictionary": params}, args.cube, args.labels)
    stage_dict(Path(args.cube), Path(args.labels), params, Path(args.out_dir), key)
    return EXIT_OK


def _cmd_detect(args) -> int:
    solver_params = {
        "lambda": args.lam,
        "rho": args.rho,
        "epsilon": args.eps,
        "max_iter": args.max_iter,
        "kernel": args.kernel or ("rbf" if args.method == "knjcr" else "linear"),
        "sigma": args.sigma,
    }
    inputs = [args.cube] + ([Path(args.dict) / "dictionary.raster"] if args.dict else [])
    key = _cache_key(
        {"method": args.method, "solver": solver_params, "ridge_eps": args.ridge_eps},
        *inputs,
    )
    summary = stage_detect(
        Path(args.cube),
        Path(args.dict) if args.dict else None,
        args.method,
        solver_params,
        args.ridge_eps,
        Path(args.out_dir),
        key,
    )
    if args.strict_convergence and not summary.get("converged", True):
        _fail("solver did not converge within max_iter (strict mode)")
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_eval(args) -> int:
    key = _cache_key({"evaluation": {"svg": args.svg}}, args.scores, args.truth)
    stage_eval(Path(args.scores), Path(args.truth), Path(args.out_dir), args.svg, key)
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    _validate_config(cfg)
    return _run_pipeline(cfg, Path(args.out_dir), args.force, args.strict_convergence)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsiad",
        description="Hyperspectral anomaly detection with a union dictionary "
        "and constrained joint collaborative representation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene with target panels")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--height", type=int, default=100)
    p.add_argument("--bands", type=int, default=50)
    p.add_argument("--materials", type=int, default=5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise-std", type=float, default=0.01)
    p.add_argument("--target-scale", type=float, default=1.0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("segment", help="superpixel segmentation of a cube")
    p.add_argument("--cube", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--superpixels", type=int, default=100)
    p.add_argument("--sigma-g", type=float, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    p.add_argument("--svg", action="store_true", help="write a boundary overlay SVG")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("dict", help="build the union dictionary")
    p.add_argument("--cube", required=True)
    p.add_argument("--labels", required=True, help="superpixel label raster")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--m-per-superpixel", type=int, default=5)
    p.add_argument("--p-anomaly", type=int, default=50)
    p.add_argument("--ridge-eps", type=float, default=1e-6)
    p.set_defaults(func=_cmd_dict)

    p = sub.add_parser("detect", help="score a cube with one detector")
    p.add_argument("--cube", required=True)
    p.add_argument("--dict", default=None, help="directory produced by `hsiad dict`")
    p.add_argument("--method", choices=_METHODS, default="njcr")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--kernel", choices=("linear", "rbf"), default=None)
    p.add_argument("--sigma", type=float, default=4.0)
    p.add_argument("--ridge-eps", type=float, default=1e-6)
    p.add_argument("--strict-convergence", action="store_true")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval", help="ROC/AUC and separability of a score map")
    p.add_argument("--scores", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("run", help="full pipeline with stage caching")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="JSON config; flags override it")
    p.add_argument("--method", choices=_METHODS, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--bands", type=int, default=None)
    p.add_argument("--materials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=None)
    p.add_argument("--superpixels", type=int, default=None)
    p.add_argument("--sigma-g", dest="sigma_g", type=float, default=None)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=None)
    p.add_argument("--m-per-superpixel", dest="m_per_superpixel", type=int, default=None)
    p.add_argument("--p-anomaly", dest="p_anomaly", type=int, default=None)
    p.add_argument("--ridge-eps", dest="ridge_eps", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--eps", dest="epsilon", type=float, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--kernel", choices=("linear", "rbf"), default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="advisory worker cap; computation is vectorized, not pooled")
    p.add_argument("--force", action="store_true", help="ignore stage caches")
    p.add_argument("--strict-convergence", action="store_true")
    p.set_defaults(func=_cmd_run)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail(str(exc))
        return EXIT_CONFIG
    except RasterFormatError as exc:
        _fail(f"raster format error: {exc}")
        return EXIT_IO
    except FileNotFoundError as exc:
        _fail(f"missing file: {exc}")
        return EXIT_IO
    except OSError as exc:
        _fail(f"io error: {exc}")
        return EXIT_IO
    except NumericError as exc:
        _fail(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        _fail(f"invalid parameter: {exc}")
        return EXIT_CONFIG
    except HsiadError as exc:
        _fail(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
