import numpy as np
import pytest

from ricci_disk.family import (
    FamilyParams,
    NoRootError,
    boundary_equation,
    family_boundary_radius,
    family_metric,
    family_profile,
    gaussian_curvature,
    profile,
    provenance,
    verify_P1_P2,
)
from ricci_disk.geometry import boundary_geodesic_curvature, scalar_curvature


@pytest.mark.parametrize("eps, r0", [(0.01, 1.5913), (0.02, 1.6130), (0.05, 1.68665), (0.1, 1.8579)])
def test_known_roots(eps, r0):
    root = family_boundary_radius(FamilyParams(eps))
    assert root.r0 == pytest.approx(r0, abs=1e-4)
    lo, hi = root.bracket
    assert boundary_equation(lo, eps) * boundary_equation(hi, eps) <= 0
    assert root.slope < 0


@pytest.mark.parametrize("eps", [0.5, 0.9])
def test_no_root_reports_endpoints(eps):
    with pytest.raises(NoRootError) as exc:
        family_boundary_radius(FamilyParams(eps))
    a, b = exc.value.endpoint_values
    assert a == pytest.approx(boundary_equation(np.pi / 2, eps))
    assert b == pytest.approx(boundary_equation(np.pi, eps))


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
def test_epsilon_validation(eps):
    with pytest.raises(ValueError):
        FamilyParams(eps)


def test_bracket_validation():
    with pytest.raises(ValueError):
        FamilyParams(0.05, bracket=(2.0, 1.0))


def test_curvature_closed_form():
    m = family_profile(0.5, 2.0, 512)
    R = scalar_curvature(m).R
    np.testing.assert_allclose(R, 2 * gaussian_curvature(m.rho, 0.5), atol=1e-4)
    assert gaussian_curvature(0.0, 0.5) == pytest.approx(0.5)


def test_boundary_curvature_negative_and_provenance():
    p = FamilyParams(0.05)
    root = family_boundary_radius(p)
    m = family_metric(p, 256)
    k = boundary_geodesic_curvature(m)
    prov = provenance(p, root)
    assert k < 0
    assert prov["k0"] == pytest.approx(k, rel=1e-3)
    assert prov["k0"] == pytest.approx(root.slope / profile(root.r0, 0.05))


@pytest.mark.parametrize("eps", [0.02, 0.05])
def test_P1_P2_hold_at_root(eps):
    rep = verify_P1_P2(family_metric(FamilyParams(eps), 256))
    assert rep.p1
    assert rep.p2 < 1e-4


def test_P2_fails_away_from_root():
    rep = verify_P1_P2(family_profile(0.05, 1.9, 256))
    assert rep.p2 > 1e-2
