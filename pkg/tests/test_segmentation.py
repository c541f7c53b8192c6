"""Pixel graphs, cut values against brute force, and spectral splitting."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from hsiad.core import HsiCube
from hsiad.segmentation import (
    PixelGraph,
    SuperpixelMap,
    build_graph,
    cut_value,
    ncut_value,
    segment,
)

from oracles import best_bipartition_brute, cut_brute, ncut_brute


def _graph(n, edges):
    i, j, w = (np.array(x) for x in zip(*edges))
    return PixelGraph(n, i, j, w)


def _random_edges(n, rng, p=0.6):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, float(rng.random()) + 0.05))
    if not edges:  # keep the graph non-trivial
        edges.append((0, n - 1, 1.0))
    return edges


# ---------------------------------------------------------------------------
# PixelGraph


def test_graph_rejects_self_loops_duplicates_negative():
    with pytest.raises(ValueError):
        _graph(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        _graph(3, [(0, 1, 1.0), (1, 0, 0.5)])  # same edge twice
    with pytest.raises(ValueError):
        _graph(3, [(0, 1, -0.1)])


def test_graph_symmetric_lookup_and_degree():
    g = _graph(3, [(0, 1, 0.4), (2, 1, 0.6)])
    assert g.weight(0, 1) == g.weight(1, 0) == 0.4
    assert g.weight(0, 2) == 0.0
    assert_allclose(g.degree, [0.4, 1.0, 0.6])


def test_graph_affinity_matches_edges():
    edges = _random_edges(5, np.random.default_rng(2))
    g = _graph(5, edges)
    aff = g.affinity().toarray()
    dense = np.zeros((5, 5))
    for i, j, w in edges:
        dense[i, j] = dense[j, i] = w
    assert_array_equal(aff, dense)


# ---------------------------------------------------------------------------
# build_graph


def test_build_graph_edge_counts():
    rng = np.random.default_rng(0)
    cube2x1 = HsiCube(2, 1, 3, rng.random((3, 1, 2)))
    assert build_graph(cube2x1).edge_i.size == 1
    cube3x3 = HsiCube(3, 3, 3, rng.random((3, 3, 3)))
    assert build_graph(cube3x3, connectivity=4).edge_i.size == 12
    assert build_graph(cube3x3, connectivity=8).edge_i.size == 20


def test_build_graph_identical_pixels_weight_one():
    cube = HsiCube(2, 1, 4, np.tile(np.arange(4.0)[:, None, None], (1, 1, 2)))
    g = build_graph(cube, sigma_g=0.5)
    assert_array_equal(g.edge_w, [1.0])


def test_build_graph_weight_formula():
    rng = np.random.default_rng(5)
    cube = HsiCube(3, 2, 4, rng.random((4, 2, 3)))
    sigma = 0.37
    g = build_graph(cube, sigma_g=sigma)
    for i, j, w in zip(g.edge_i, g.edge_j, g.edge_w):
        ri, ci = divmod(int(i), 3)
        rj, cj = divmod(int(j), 3)
        d2 = float(np.sum((cube.spectrum(ri, ci) - cube.spectrum(rj, cj)) ** 2))
        assert_allclose(w, np.exp(-d2 / (2.0 * sigma * sigma)), rtol=1e-14)


def test_build_graph_default_sigma_is_median_distance():
    rng = np.random.default_rng(9)
    cube = HsiCube(4, 3, 5, rng.random((5, 3, 4)))
    g = build_graph(cube)
    dists = []
    for i, j in zip(g.edge_i, g.edge_j):
        ri, ci = divmod(int(i), 4)
        rj, cj = divmod(int(j), 4)
        dists.append(np.linalg.norm(cube.spectrum(ri, ci) - cube.spectrum(rj, cj)))
    med = float(np.median(dists))
    d2 = np.array(dists) ** 2
    assert_allclose(g.edge_w, np.exp(-d2 / (2.0 * med * med)), rtol=1e-12)


def test_build_graph_rejects_bad_sigma():
    cube = HsiCube(2, 2, 2, np.zeros((2, 2, 2)) + 0.5)
    with pytest.raises(ValueError):
        build_graph(cube, sigma_g=0.0)
    with pytest.raises(ValueError):
        build_graph(cube, connectivity=6)


# ---------------------------------------------------------------------------
# cut / ncut


def test_cut_two_node_graph():
    g = _graph(2, [(0, 1, 0.7)])
    assert cut_value(g, [0]) == 0.7


def test_cut_disconnected_components():
    g = _graph(4, [(0, 1, 0.9), (2, 3, 0.8)])
    assert cut_value(g, [0, 1]) == 0.0


def test_cut_matches_brute_and_complement():
    rng = np.random.default_rng(3)
    edges = _random_edges(6, rng)
    g = _graph(6, edges)
    for part in ([0], [1, 4], [0, 2, 3], [5, 1]):
        expected = cut_brute(6, edges, np.array(part))
        comp = np.setdiff1d(np.arange(6), part)
        assert_allclose(cut_value(g, part), expected, rtol=1e-14)
        assert_allclose(cut_value(g, comp), expected, rtol=1e-14)


def test_cut_rejects_empty_and_full():
    g = _graph(2, [(0, 1, 1.0)])
    with pytest.raises(ValueError):
        cut_value(g, [])
    with pytest.raises(ValueError):
        cut_value(g, [0, 1])


def test_ncut_path_graph_hand_case():
    # unit-weight path 0-1-2-3, A = {0,1}: cut = 1, assoc(A) = assoc(B) = 3
    g = _graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert_allclose(ncut_value(g, [0, 1]), 1.0 / 3.0 + 1.0 / 3.0, rtol=1e-15)


def test_ncut_symmetric_split_terms_equal():
    g = _graph(4, [(0, 1, 0.5), (2, 3, 0.5), (0, 2, 0.2), (1, 3, 0.2)])
    edges = [(0, 1, 0.5), (2, 3, 0.5), (0, 2, 0.2), (1, 3, 0.2)]
    cut = cut_brute(4, edges, np.array([0, 1]))
    from oracles import assoc_brute
    a = assoc_brute(4, edges, np.array([0, 1]))
    b = assoc_brute(4, edges, np.array([2, 3]))
    assert a == b  # mirror halves
    assert_allclose(ncut_value(g, [0, 1]), 2.0 * cut / a, rtol=1e-15)


def test_ncut_isolated_part_is_infinite():
    g = _graph(3, [(0, 1, 1.0), (0, 2, 0.0), (1, 2, 0.0)])
    assert ncut_value(g, [2]) == np.inf


def test_ncut_matches_brute_and_bounds():
    rng = np.random.default_rng(14)
    edges = _random_edges(7, rng)
    g = _graph(7, edges)
    rest = list(range(1, 7))
    best_op = np.inf
    best_set = None
    for r in range(0, 6):
        for combo in itertools.combinations(rest, r):
            part = np.array((0,) + combo)
            val = ncut_value(g, part)
            assert_allclose(val, ncut_brute(7, edges, part), rtol=1e-12)
            assert 0.0 <= val <= 2.0 or val == np.inf
            if val < best_op:
                best_op, best_set = val, tuple(part.tolist())
    brute_val, brute_set = best_bipartition_brute(7, edges)
    assert_allclose(best_op, brute_val, rtol=1e-12)
    assert best_set == brute_set


# ---------------------------------------------------------------------------
# SuperpixelMap / segment


def test_superpixel_map_requires_contiguous_labels():
    ok = SuperpixelMap(2, 2, np.array([[0, 0], [1, 1]]))
    assert ok.superpixel_count == 2
    assert_array_equal(ok.pixel_indices(1), [2, 3])
    with pytest.raises(ValueError):
        SuperpixelMap(2, 2, np.array([[0, 0], [2, 2]]))  # label 1 skipped


def _two_region_cube(width=20, height=10, bands=6, seed=0):
    rng = np.random.default_rng(seed)
    s1 = rng.random(bands) * 0.3
    s2 = rng.random(bands) * 0.3 + 0.6
    vals = np.empty((bands, height, width))
    vals[:, :, : width // 2] = s1[:, None, None]
    vals[:, :, width // 2:] = s2[:, None, None]
    vals += rng.normal(0.0, 0.004, size=vals.shape)
    return HsiCube(width, height, bands, np.clip(vals, 0.0, 1.0)), width // 2


def test_segment_two_planted_regions():
    cube, split_col = _two_region_cube()
    sp = segment(cube, 2, seed=0)
    labels = sp.labels
    truth = np.zeros((cube.height, cube.width), dtype=int)
    truth[:, split_col:] = 1
    agree = max(np.mean(labels == truth), np.mean(labels == 1 - truth))
    assert agree >= 0.99


def test_segment_every_pixel_escape_hatch():
    cube, _ = _two_region_cube(width=5, height=4)
    sp = segment(cube, 20, seed=1)
    assert sp.superpixel_count == 20
    assert_array_equal(np.sort(sp.labels.ravel()), np.arange(20))


def test_segment_label_count_within_slack():
    rng = np.random.default_rng(44)
    cube = HsiCube(24, 24, 8, rng.random((8, 24, 24)))
    target = 12
    sp = segment(cube, target, seed=3)
    assert target // 2 <= sp.superpixel_count <= 2 * target


def test_segment_deterministic_per_seed():
    cube, _ = _two_region_cube(width=16, height=12, seed=5)
    a = segment(cube, 6, seed=9)
    b = segment(cube, 6, seed=9)
    assert_array_equal(a.labels, b.labels)


def test_segment_labels_spatially_connected():
    rng = np.random.default_rng(77)
    cube = HsiCube(18, 15, 6, rng.random((6, 15, 18)))
    sp = segment(cube, 9, seed=2)
    h, w = cube.height, cube.width
    idx = np.arange(h * w).reshape(h, w)
    rows, cols = [], []
    for (a, b) in ((idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])):
        rows.extend(a.ravel())
        cols.extend(b.ravel())
    flat = sp.labels.ravel()
    for lab in range(sp.superpixel_count):
        nodes = np.flatnonzero(flat == lab)
        pos = {int(n): k for k, n in enumerate(nodes)}
        ii, jj = [], []
        for r, c in zip(rows, cols):
            if flat[r] == lab and flat[c] == lab:
                ii.append(pos[int(r)])
                jj.append(pos[int(c)])
        adj = csr_matrix((np.ones(len(ii)), (ii, jj)), shape=(len(nodes), len(nodes)))
        ncomp, _ = connected_components(adj, directed=False)
        assert ncomp == 1


def test_segment_rejects_bad_target():
    cube, _ = _two_region_cube(width=4, height=3)
    with pytest.raises(ValueError):
        segment(cube, 1)
    with pytest.raises(ValueError):
        segment(cube, 13)  # more superpixels than pixels
