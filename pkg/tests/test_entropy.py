import math

import numpy as np
import pytest

from ricci_disk import exact
from ricci_disk.entropy import (
    ConstraintError,
    EntropyOptions,
    TailMassError,
    annulus_area,
    cigar_entropy_probe,
    constraint_value,
    cutoff_profile,
    f_functional,
    mu,
    normalized_constant,
    w_functional,
    w_functional_f_form,
)
from ricci_disk.geometry import resample


def test_f_functional_examples():
    flat = exact.flat_disk_metric(1.0, 128)
    assert f_functional(flat, np.zeros(129)) == 0.0
    hm = exact.hemisphere_metric(512)
    assert f_functional(hm, np.zeros(513)) == pytest.approx(4 * np.pi, rel=1e-5)
    assert f_functional(hm, np.full(513, 0.7)) == pytest.approx(4 * np.pi * math.exp(-0.7), rel=1e-5)


def test_w_constant_hemisphere_and_flat():
    hm = exact.hemisphere_metric(2048)
    assert w_functional(hm, normalized_constant(hm, 1.0), 1.0) == pytest.approx(-math.log(2), abs=1e-6)
    flat = exact.flat_disk_metric(1.0, 128)
    assert w_functional(flat, normalized_constant(flat, 1.0), 1.0) == pytest.approx(-math.log(4) - 2, abs=1e-12)


def test_w_constant_error_is_second_order():
    e = []
    for N in (256, 512):
        hm = exact.hemisphere_metric(N)
        e.append(abs(w_functional(hm, normalized_constant(hm, 1.0), 1.0) + math.log(2)))
    assert math.log2(e[0] / e[1]) == pytest.approx(2.0, abs=0.1)


def test_constraint_error():
    hm = exact.hemisphere_metric(64)
    phi = 1.01 * normalized_constant(hm, 1.0)
    with pytest.raises(ConstraintError) as exc:
        w_functional(hm, phi, 1.0)
    assert exc.value.value == pytest.approx(constraint_value(hm, phi, 1.0))
    with pytest.raises(ValueError):
        w_functional(hm, -normalized_constant(hm, 1.0), 1.0)
    with pytest.raises(ValueError):
        w_functional(hm, normalized_constant(hm, 1.0), 0.0)


def _normalized_f(m, f, tau):
    vw = 2 * np.pi * m.f * np.r_[0.5, np.ones(m.N - 1), 0.5] * m.h
    return f + math.log(np.sum(vw * np.exp(-f)) / (4 * np.pi * tau))


def test_two_forms_agree():
    m = exact.bumped_hemisphere_metric(1024)
    tau = 0.7
    f = _normalized_f(m, 0.3 * np.cos(m.rho) ** 2 + 0.1 * m.rho, tau)
    assert w_functional(m, np.exp(-f / 2), tau) == pytest.approx(w_functional_f_form(m, f, tau), abs=1e-8)


def test_scale_invariance_of_w():
    m = exact.bumped_hemisphere_metric(256)
    tau, c = 0.4, 3.0
    phi = np.exp(-_normalized_f(m, 0.2 * np.sin(m.rho), tau) / 2)
    s = m.scaled(c)
    assert w_functional(s, phi, c * tau) == pytest.approx(w_functional(m, phi, tau), abs=1e-12)


def test_mu_bounds_and_restarts():
    hm = exact.hemisphere_metric(256)
    r = mu(hm, 1.0, EntropyOptions(restarts=1))
    assert r.mu <= -math.log(2) + 1e-6
    assert r.converged
    m = exact.bumped_hemisphere_metric(128)
    one = mu(m, 0.3, EntropyOptions(restarts=1))
    eight = mu(m, 0.3, EntropyOptions(restarts=8))
    assert eight.mu <= one.mu
    assert constraint_value(eight.metric, eight.minimizer, 0.3) == pytest.approx(1.0, abs=1e-10)


def test_mu_beats_constant():
    m = exact.bumped_hemisphere_metric(128)
    const = w_functional(m, normalized_constant(m, 0.3), 0.3)
    assert mu(m, 0.3, EntropyOptions(grid=None)).mu < const


def test_mu_scale_invariant():
    m = exact.bumped_hemisphere_metric(128)
    a = mu(m, 0.3).mu
    b = mu(m.scaled(5.0), 1.5).mu
    assert a == pytest.approx(b, abs=1e-6)


def test_mu_seeded_deterministic():
    m = resample(exact.cigar_metric(3.0, 256), 64)
    a = mu(m, 1.0, EntropyOptions(restarts=3, seed=7))
    b = mu(m, 1.0, EntropyOptions(restarts=3, seed=7))
    assert a.mu == b.mu


def test_options_validation():
    with pytest.raises(ValueError):
        EntropyOptions(restarts=0)
    with pytest.raises(ValueError):
        EntropyOptions(grad_tol=0.0)


def test_cutoff_profile_pieces_and_gradient():
    r = 10.0
    rho = np.linspace(0, 60, 60001)
    phi = cutoff_profile(rho, r)
    eps = 1e-3 / r
    assert phi[0] == pytest.approx(eps / r)
    assert np.all(phi[(rho >= 2 * r) & (rho <= 3 * r)] == 1.0)
    assert phi[-1] == pytest.approx(eps * math.exp(-60))
    grad = np.abs(np.diff(np.sqrt(phi))) / (rho[1] - rho[0])
    assert grad.max() <= 1 / r + 1e-9


def test_probe_c_tracks_minus_log_r():
    a, b = cigar_entropy_probe(8), cigar_entropy_probe(16)
    assert b.c - a.c == pytest.approx(-math.log(2), abs=0.2)
    assert cigar_entropy_probe(20).W < cigar_entropy_probe(10).W


def test_probe_slope_negative():
    rs = np.array([8.0, 16.0, 32.0])
    W = [cigar_entropy_probe(r).W for r in rs]
    assert np.polyfit(np.log(rs), W, 1)[0] < 0


def test_probe_tail_mass():
    with pytest.raises(TailMassError):
        cigar_entropy_probe(8, cutoff=40)
    assert cigar_entropy_probe(8).tail_fraction < 1e-6


def test_annulus_area_linear_in_r():
    m = exact.cigar_metric(60.0, 6000)
    assert annulus_area(m, 20, 40) / 20 == pytest.approx(2 * np.pi, rel=0.02)
