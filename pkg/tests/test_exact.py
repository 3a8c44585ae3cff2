import numpy as np
import pytest

from ricci_disk import exact
from ricci_disk.geometry import scalar_curvature


def test_shrinking_cap_oracle():
    u, R = exact.shrinking_cap_oracle(2.0, 0.25)
    assert u == pytest.approx(0.5)
    assert R == pytest.approx(4.0)
    with pytest.raises(exact.PastBlowupError):
        exact.shrinking_cap_oracle(2.0, 0.5)
    with pytest.raises(ValueError):
        exact.shrinking_cap_oracle(2.0, -1.0)


@pytest.mark.parametrize("K, rmax", [(0.0, 1.0), (1.0, np.pi), (4.0, 2.0), (1.0, -0.1)])
def test_cap_validation(K, rmax):
    with pytest.raises(ValueError):
        exact.spherical_cap_metric(K, rmax, 32)


def test_invalid_radii():
    with pytest.raises(ValueError):
        exact.flat_disk_metric(0.0, 32)
    with pytest.raises(ValueError):
        exact.cigar_metric(-1.0, 32)


def test_bumped_hemisphere_curvature_closed_form():
    m = exact.bumped_hemisphere_metric(512)
    R = scalar_curvature(m).R
    Rex = exact.bumped_hemisphere_curvature(m.rho)
    np.testing.assert_allclose(R, Rex, atol=1e-4)
    assert Rex.min() > 0
    assert Rex.max() / Rex.min() > 1.5


def test_bumped_hemisphere_has_geodesic_boundary():
    m = exact.bumped_hemisphere_metric(256)
    assert abs(m.f[-1] - m.f[-2]) < 1e-4
