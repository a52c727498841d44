import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixsim.constitutive import BoundaryCoeffs
from mixsim.errors import ConfigurationError, StateError
from mixsim.grid import (
    BoundarySpec,
    FieldState,
    Grid,
    center_to_face,
    div,
    face_inner,
    grad,
    orthonormal_complement,
    project_complement,
    project_ell,
    read_field_csv,
    write_field_csv,
)

from .conftest import random_state


def test_rect_geometry():
    g = Grid.rect(4, 5, 2.0, 1.0)
    assert (g.hx, g.hy, g.vol) == (0.5, 0.2, 0.1)
    assert g.shape == (4, 5)
    assert g.segments == ("left", "right", "bottom", "top")
    assert g.x_centers == pytest.approx([0.25, 0.75, 1.25, 1.75])
    assert g.face_area("left") == 0.2 and g.face_area("top") == 0.5
    assert g.normal_spacing("left") == 0.5 and g.normal_spacing("bottom") == 0.2


def test_line_is_one_cell_thick():
    g = Grid.line(10, 2.0)
    assert g.dim == 1 and g.shape == (10, 1) and g.ly == 1.0
    assert g.segments == ("left", "right")
    with pytest.raises(ConfigurationError):
        g.trace(np.zeros(g.shape), "top")


@pytest.mark.parametrize("args", [(0, 4), (4, 0), (-1, 2)])
def test_rect_rejects_bad_sizes(args):
    with pytest.raises(ConfigurationError):
        Grid.rect(*args)


def test_rect_rejects_nonpositive_length():
    with pytest.raises(ConfigurationError):
        Grid.rect(4, 4, 0.0, 1.0)


@given(st.integers(2, 9), st.integers(2, 9), st.integers(0, 2**31))
@settings(max_examples=30)
def test_grad_is_minus_adjoint_of_div(nx, ny, seed):
    rng = np.random.default_rng(seed)
    g = Grid.rect(nx, ny, 1.0, 1.3)
    s = rng.standard_normal(g.shape)
    fx = rng.standard_normal((nx + 1, ny))
    fy = rng.standard_normal((nx, ny + 1))
    fx[0] = fx[-1] = 0.0
    fy[:, 0] = fy[:, -1] = 0.0
    gx, gy = grad(g, s)
    lhs = face_inner(g, gx, gy, fx, fy)
    rhs = -g.vol * float(np.sum(s * div(g, fx, fy)))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_divergence_of_boundary_flux_integrates_to_boundary_sum(grid2, rng):
    fx = np.zeros((grid2.nx + 1, grid2.ny))
    fy = np.zeros((grid2.nx, grid2.ny + 1))
    out = {}
    for seg in grid2.segments:
        out[seg] = rng.standard_normal(grid2.segment_size(seg))
        grid2.set_outward_flux(fx, fy, seg, out[seg])
    assert grid2.integral(div(grid2, fx, fy)) == pytest.approx(grid2.boundary_integral(out), rel=1e-13)


def test_center_to_face_of_constant(grid2):
    fx, fy = center_to_face(grid2, np.full(grid2.shape, 3.0))
    assert np.all(fx == 3.0) and np.all(fy == 3.0)


def test_project_ell(rng):
    w = rng.standard_normal((4, 5))
    p = project_ell(w)
    assert np.allclose(p.sum(axis=0), 0.0, atol=1e-15)
    assert np.allclose(project_ell(p), p, atol=1e-15)


def test_orthonormal_complement():
    B = orthonormal_complement([np.ones(3), [1.0, -1.0, 0.0]], 3)
    assert B.shape == (3, 1)
    assert np.allclose(np.abs(B[:, 0]), np.array([1, 1, 2]) / np.sqrt(6))
    assert orthonormal_complement([np.ones(3), np.zeros(3)], 3).shape == (3, 2)
    w = np.array([[1.0], [2.0], [4.0]])
    assert np.allclose(project_complement(w, B).ravel(), (B @ (B.T @ w)).ravel())


def test_field_csv_round_trip(tmp_path, grid2, rng):
    vals = rng.standard_normal(grid2.shape) * 1e-7
    p = tmp_path / "f.csv"
    write_field_csv(p, "phi", 0.125, grid2, vals)
    meta, back = read_field_csv(p)
    assert meta["field"] == "phi" and float(meta["t"]) == 0.125
    assert np.array_equal(back, vals)


def test_field_csv_rejects_truncated_file(tmp_path, grid2):
    p = tmp_path / "f.csv"
    write_field_csv(p, "e", 0.0, grid2, np.ones(grid2.shape))
    p.write_text("\n".join(p.read_text().splitlines()[:-1]))
    with pytest.raises(ConfigurationError):
        read_field_csv(p)


def test_state_validation(grid2, rng):
    st_ = random_state(grid2, rng)
    st_.validate(grid2, 3)
    bad = st_.copy()
    bad.c[0, 0, 0] = -1e-3
    with pytest.raises(StateError):
        bad.validate(grid2)
    bad = st_.copy()
    bad.c[0] *= 1.01
    with pytest.raises(StateError):
        bad.validate(grid2)
    bad = st_.copy()
    bad.u[0, 1] = 1.0
    with pytest.raises(StateError):
        bad.validate(grid2)
    with pytest.raises(StateError):
        st_.validate(grid2, 4)


def test_state_copy_is_deep(grid2, rng):
    a = random_state(grid2, rng)
    b = a.copy()
    b.c[:] = 0.0
    assert a.c.min() > 0


def test_boundary_spec_expands_profiles(grid2):
    segs = {s: BoundaryCoeffs(lambda_G=1.0, zeta_G=[0.1, 0.2, 0.3]) for s in grid2.segments}
    segs["left"] = BoundaryCoeffs(lambda_G=np.linspace(0, 1, grid2.ny))
    bc = BoundarySpec(grid2, segs, 3)
    assert bc.face("left", "lambda_G").shape == (grid2.ny,)
    assert bc.face("top", "zeta_G").shape == (3, grid2.nx)
    assert bc.integral("lambda_G") == pytest.approx(0.75 * 0.5 + 0.75 + 2 * 1.0)


def test_boundary_spec_requires_every_segment(grid2):
    with pytest.raises(ConfigurationError):
        BoundarySpec(grid2, {"left": BoundaryCoeffs()}, 3)
    segs = {s: BoundaryCoeffs() for s in grid2.segments}
    segs["front"] = BoundaryCoeffs()
    with pytest.raises(ConfigurationError):
        BoundarySpec(grid2, segs, 3)


def test_boundary_spec_rejects_wrong_profile_length(grid2):
    segs = {s: BoundaryCoeffs() for s in grid2.segments}
    segs["top"] = BoundaryCoeffs(d=np.ones(3))
    with pytest.raises(ConfigurationError):
        BoundarySpec(grid2, segs, 3)
