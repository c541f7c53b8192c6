"""Shared fixtures: the seeded 100x100 reference scene and its pipeline stages.

The scene is written to disk and read back before use so every test sees the
same float32 quantization that the command-line flow sees; measured values
frozen into tests (dictionary hit rate, AUC floors) then agree bit for bit
with batch runs.  Expensive stages are session-scoped and built lazily.
"""

from __future__ import annotations

import time

import pytest

from hsiad import raster
from hsiad.core import flatten
from hsiad.dictionary import build_union_dictionary
from hsiad.rx import fit_stats, rx_scores
from hsiad.segmentation import segment
from hsiad.solver import SolverConfig, score_njcr, solve_njcr
from hsiad.synth import (
    default_layout,
    default_panel_specs,
    generate_background,
    held_out_target,
    implant_panels,
)

SCENE = dict(width=100, height=100, bands=50, materials=5, seed=7, noise_std=0.01)
SEGMENT = dict(target_count=100, seed=1, connectivity=4)
DICTIONARY = dict(m_per_superpixel=5, p=50)
SOLVER = dict(lam=0.5, rho=1.0, epsilon=1e-4, max_iter=60)


@pytest.fixture(scope="session")
def pipeline_scene(tmp_path_factory):
    """Reference scene plus the stage outputs leading up to the solver.

    Returns a dict with the loaded cube, truth mask, pixel matrix, superpixel
    map, RX stats/scores, union dictionary, and per-stage wall times.
    """
    out = tmp_path_factory.mktemp("scene100")
    base = generate_background(
        SCENE["width"], SCENE["height"], SCENE["bands"],
        SCENE["materials"], SCENE["seed"], noise_std=SCENE["noise_std"],
    )
    target = held_out_target(SCENE["bands"], SCENE["materials"], SCENE["seed"])
    cube, truth = implant_panels(
        base, target, default_panel_specs(),
        default_layout(SCENE["width"], SCENE["height"]),
    )
    raster.save_cube(cube, out / "cube.raster")
    raster.save_mask(truth, out / "truth.raster")
    cube = raster.load_cube(out / "cube.raster")
    truth = raster.load_mask(out / "truth.raster")

    timings = {}
    t0 = time.perf_counter()
    superpixels = segment(cube, SEGMENT["target_count"],
                          seed=SEGMENT["seed"], connectivity=SEGMENT["connectivity"])
    timings["segment"] = time.perf_counter() - t0

    X = flatten(cube)
    t0 = time.perf_counter()
    stats = fit_stats(X)
    rx_map = rx_scores(X, stats)
    timings["rx"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dictionary = build_union_dictionary(
        X, superpixels, rx_map,
        m_per_superpixel=DICTIONARY["m_per_superpixel"], p=DICTIONARY["p"],
    )
    timings["dict"] = time.perf_counter() - t0

    return dict(cube=cube, truth=truth, X=X, superpixels=superpixels,
                rx_stats=stats, rx_scores=rx_map, dictionary=dictionary,
                timings=timings)


@pytest.fixture(scope="session")
def pipeline_njcr(pipeline_scene):
    """Full-model solve and residual scores on the reference scene, timed."""
    cfg = SolverConfig(**SOLVER)
    t0 = time.perf_counter()
    result = solve_njcr(pipeline_scene["X"], pipeline_scene["dictionary"], cfg)
    scores = score_njcr(pipeline_scene["X"], pipeline_scene["dictionary"],
                        result.coefficients)
    elapsed = time.perf_counter() - t0
    return dict(config=cfg, result=result, scores=scores, seconds=elapsed)
