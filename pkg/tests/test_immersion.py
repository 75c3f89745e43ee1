import math

import numpy as np
import pytest

from conftest import random_orthogonal
from wintgen.ambient import SpaceForm
from wintgen.errors import IncompatibleModelError, InvariantError
from wintgen.immersion import (
    CATALOG,
    clifford_torus,
    frame_at,
    from_catalog,
    graph,
    holomorphic_graph,
    load_polynomial_immersion,
    polynomial_immersion,
    product_spheres,
    round_sphere,
    verify_immersion,
)
from wintgen.inequalities import InequalityId
from wintgen.invariants import full_report, k_n_from_components, mean_curvature, surface_invariants


def test_plane_is_totally_geodesic():
    plane = graph(lambda u: np.zeros(2), 2, 2)
    for u in plane.grid(3):
        assert np.max(np.abs(frame_at(plane, u).h.h)) < 1e-7
    for res in verify_immersion(plane, plane.grid(2)):
        assert abs(res.gap) < 1e-7


def test_unit_sphere_in_e4():
    imm = round_sphere(2, 1.0, m=4)
    h = frame_at(imm, [1.1, 0.7]).h
    # rotate the normal frame so that the first normal is the unit mean-curvature direction
    Hvec = mean_curvature(h).components
    M = np.column_stack([Hvec / np.linalg.norm(Hvec), np.eye(2)])
    q, r = np.linalg.qr(M[:, :2])
    N = q * np.sign(np.diagonal(r))
    aligned = h.rotated(np.eye(2), N).h
    np.testing.assert_allclose(aligned[0], np.eye(2), atol=1e-5)
    np.testing.assert_allclose(aligned[1], 0.0, atol=1e-5)


def test_frames_are_orthonormal():
    pf = frame_at(product_spheres(1, 1.0, 2, 0.5), [0.4, 1.0, 2.0])
    E, N = pf.tangent_frame, pf.normal_frame
    np.testing.assert_allclose(E.T @ E, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(N.T @ N, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(E.T @ N, 0.0, atol=1e-12)


def test_clifford_torus_closed_form():
    imm = clifford_torus()
    for u in imm.grid(3):
        h = frame_at(imm, u).h
        inv = surface_invariants(h)
        assert inv.gauss == pytest.approx(0.0, abs=1e-6)
        assert mean_curvature(h).norm_sq == pytest.approx(1.0, abs=1e-6)
        assert k_n_from_components(h) == pytest.approx(0.0, abs=1e-6)


def test_clifford_torus_grid_gaps_nonnegative():
    imm = clifford_torus()
    results = verify_immersion(imm, imm.grid(10), ids=[InequalityId.WINTGEN_SURFACE])
    assert len(results) == 100
    assert min(r.gap for r in results) >= -1e-4


def test_holomorphic_graph_is_wintgen_equality():
    imm = holomorphic_graph()
    for u in imm.grid(4):
        res = verify_immersion(imm, [u], ids=[InequalityId.WINTGEN_SURFACE])[0]
        assert abs(res.gap) < 1e-5


def test_rigid_motion_invariance(rng):
    imm = round_sphere(3, 2.0)
    moved = imm.moved(random_orthogonal(rng, 4), rng.standard_normal(4))
    u = [1.0, 1.2, 0.4]
    a = full_report(frame_at(imm, u).h, SpaceForm(0.0), 4)
    b = full_report(frame_at(moved, u).h, SpaceForm(0.0), 4)
    assert a.rho == pytest.approx(b.rho, abs=1e-7)
    assert a.h_norm_sq == pytest.approx(b.h_norm_sq, abs=1e-7)
    assert a.rho == pytest.approx(0.25, abs=1e-6)


def test_normal_gauge_does_not_matter():
    imm = product_spheres(1, 1.0, 1, 2.0)
    u = [0.3, 1.9]
    r1 = full_report(frame_at(imm, u, normal_seed=1).h, SpaceForm(0.0), 4)
    r2 = full_report(frame_at(imm, u, normal_seed=2).h, SpaceForm(0.0), 4)
    assert (r1.rho, r1.h_norm_sq, r1.k_n) == pytest.approx((r2.rho, r2.h_norm_sq, r2.k_n), abs=1e-9)


def test_rank_deficiency_detected():
    imm = polynomial_immersion([[[1.0, [2, 0]]], [[1.0, [0, 2]]], [[1.0, [1, 1]]]], 2)
    with pytest.raises(InvariantError):
        frame_at(imm, [0.0, 0.0])


def test_bad_step():
    with pytest.raises(ValueError):
        frame_at(clifford_torus(), [0.1, 0.2], step=0.0)


def test_only_euclidean_ambient():
    imm = clifford_torus()
    with pytest.raises(IncompatibleModelError):
        verify_immersion(imm, imm.grid(1), model=SpaceForm(1.0))


def test_catalog_parsing():
    imm = from_catalog("sphere:n=3,r=2")
    assert (imm.n, imm.m) == (3, 4)
    assert set(CATALOG) >= {"sphere", "clifford_torus", "holomorphic_graph", "product_spheres"}
    with pytest.raises(KeyError):
        from_catalog("nope")


def test_polynomial_file(tmp_path):
    path = tmp_path / "paraboloid.toml"
    path.write_text(
        "n = 2\n"
        "domain = [[-0.5, 0.5], [-0.5, 0.5]]\n"
        "components = [[[1.0, [1, 0]]], [[1.0, [0, 1]]], [[0.5, [2, 0]], [0.5, [0, 2]]]]\n",
        encoding="utf-8",
    )
    imm = load_polynomial_immersion(path).padded(4)
    inv = surface_invariants(frame_at(imm, [0.0, 0.0]).h)
    assert inv.gauss == pytest.approx(1.0, abs=1e-6)


def test_step_halving_is_second_order():
    imm = round_sphere(3, 1.0)
    u = np.array([0.9, 1.3, 2.1])
    errs = []
    for step in (0.08, 0.04, 0.02, 0.01):
        r = full_report(frame_at(imm, u, step=step, richardson=False).h, SpaceForm(0.0), 4)
        errs.append(abs(r.rho - 1.0))
    ratios = [errs[k] / errs[k + 1] for k in range(3)]
    assert all(3.5 <= q <= 4.5 for q in ratios[:2])
    assert not math.isnan(ratios[2])
