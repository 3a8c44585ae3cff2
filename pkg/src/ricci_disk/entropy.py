"""Perelman's F and W functionals on radial metrics, the entropy mu, and the
cigar test-function probe.

Integrals are taken against dV = 2 pi F d rho.  Node values use trapezoid
weights; gradient terms live on cells, with F averaged to the midpoint, which
keeps the discrete Dirichlet form free of checkerboard null modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exact import cigar_metric
from .geometry import RadialMetric, resample, scalar_curvature, trapezoid_weights

CONSTRAINT_TOL = 1e-8
TAIL_TOL = 1e-6
MIN_CUTOFF_MULT = 8.0
JAC_TOL = 1e-5


class ConstraintError(ValueError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"(4 pi tau)^-1 int Phi^2 dV = {value:.12g}, expected 1")


class TailMassError(ValueError):
    pass


@dataclass(frozen=True)
class EntropyOptions:
    max_iters: int = 500
    step_tol: float = 1e-12
    grad_tol: float = 1e-9
    restarts: int = 4
    seed: int = 0
    grid: int | None = 128  # resample to this many intervals before minimizing; None keeps m
    perturbation: float = 0.5  # amplitude of the random log-perturbations

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be at least 1")
        if not (self.step_tol > 0 and self.grad_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.grid is not None and self.grid < 16:
            raise ValueError("grid must be at least 16")


@dataclass(frozen=True)
class MuResult:
    mu: float
    minimizer: np.ndarray = field(repr=False)  # Phi on the grid that was minimized over
    converged: bool
    metric: RadialMetric = field(repr=False)


def volume_weights(m: RadialMetric) -> np.ndarray:
    return 2.0 * np.pi * m.f * trapezoid_weights(m.N + 1, m.h)


def _cell_weights(m: RadialMetric) -> np.ndarray:
    return 2.0 * np.pi * 0.5 * (m.f[1:] + m.f[:-1]) / m.h


def _check_grid(m: RadialMetric, y: np.ndarray, name: str) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (m.N + 1,):
        raise ValueError(f"{name} has shape {y.shape}, grid needs ({m.N + 1},)")
    return y


def f_functional(m: RadialMetric, f) -> float:
    """int (R + |grad f|^2) e^{-f} dV."""
    f = _check_grid(m, f, "f")
    R = scalar_curvature(m).R
    pot = np.sum(volume_weights(m) * R * np.exp(-f))
    grad = np.sum(_cell_weights(m) * np.diff(f) ** 2 * np.exp(-0.5 * (f[1:] + f[:-1])))
    return float(pot + grad)


def constraint_value(m: RadialMetric, phi, tau: float) -> float:
    phi = _check_grid(m, phi, "phi")
    return float(np.sum(volume_weights(m) * phi**2) / (4.0 * np.pi * tau))


def _w_and_grad(phi, tau, R, vw, cw, want_grad=True):
    d = np.diff(phi)
    pref = 1.0 / (4.0 * np.pi * tau)
    logphi = np.log(phi)
    W = pref * (4.0 * tau * np.sum(cw * d**2) + np.sum(vw * (tau * R - 2.0 * logphi - 2.0) * phi**2))
    if not want_grad:
        return W, None
    flux = cw * d
    g = np.zeros_like(phi)
    g[:-1] -= flux
    g[1:] += flux
    g *= 2.0 / np.pi
    g += pref * vw * phi * (2.0 * tau * R - 4.0 * logphi - 6.0)
    return W, g


def w_functional(m: RadialMetric, phi, tau: float) -> float:
    """(4 pi tau)^-1 int [4 tau |grad Phi|^2 + (tau R - 2 log Phi - 2) Phi^2] dV.

    Raises ConstraintError unless (4 pi tau)^-1 int Phi^2 dV = 1 within 1e-8.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    phi = _check_grid(m, phi, "phi")
    if np.any(~(phi > 0)):
        raise ValueError("phi must be positive")
    c = constraint_value(m, phi, tau)
    if abs(c - 1.0) > CONSTRAINT_TOL:
        raise ConstraintError(c)
    R = scalar_curvature(m).R
    return float(_w_and_grad(phi, tau, R, volume_weights(m), _cell_weights(m), False)[0])


def w_functional_f_form(m: RadialMetric, f, tau: float) -> float:
    """The same entropy written in f: int [tau (R + |grad f|^2) + f - 2] (4 pi tau)^-1 e^{-f} dV."""
    f = _check_grid(m, f, "f")
    R = scalar_curvature(m).R
    vw = volume_weights(m)
    grad = np.sum(_cell_weights(m) * np.diff(f) ** 2 * np.exp(-0.5 * (f[1:] + f[:-1])))
    val = tau * grad + np.sum(vw * (tau * R + f - 2.0) * np.exp(-f))
    return float(val / (4.0 * np.pi * tau))


def normalized_constant(m: RadialMetric, tau: float) -> np.ndarray:
    """Constant Phi satisfying the constraint."""
    A = float(np.sum(volume_weights(m)))
    return np.full(m.N + 1, math.sqrt(4.0 * np.pi * tau / A))


def _random_start(rng, rho, L, amp):
    k = np.arange(1, 6)
    coef = rng.normal(size=k.size) / k
    return amp * np.cos(np.outer(rho / L, np.pi * k)) @ coef


def mu(m: RadialMetric, tau: float, opts: EntropyOptions | None = None, rng=None) -> MuResult:
    """Upper bound for inf W(g, ., tau) from local minimization with restarts.

    Phi = e^psi / sqrt(Z) stays positive and on the constraint sphere for every
    psi, so L-BFGS runs unconstrained in psi.  The first start is the constant
    function; the others add seeded smooth log-perturbations.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    opts = opts or EntropyOptions()
    if rng is None:
        rng = np.random.default_rng(opts.seed)
    if opts.grid is not None and opts.grid != m.N:
        m = resample(m, opts.grid)
    R = scalar_curvature(m).R
    vw, cw = volume_weights(m), _cell_weights(m)
    pref = 1.0 / (4.0 * np.pi * tau)

    def unpack(psi):
        e = np.exp(2.0 * (psi - psi.max()))
        Z = pref * np.sum(vw * e)
        return np.sqrt(e / Z)

    def fun(psi):
        phi = unpack(psi)
        W, g = _w_and_grad(phi, tau, R, vw, cw)
        pg = phi * g
        q = pref * vw * phi**2
        return W, pg - q * np.sum(pg)

    best = None
    for k in range(opts.restarts):
        psi0 = np.zeros(m.N + 1) if k == 0 else _random_start(rng, m.rho, m.L, opts.perturbation)
        res = minimize(fun, psi0, jac=True, method="L-BFGS-B",
                       options={"maxiter": opts.max_iters, "ftol": opts.step_tol, "gtol": opts.grad_tol})
        if best is None or res.fun < best.fun:
            best = res
    # a line-search stop next to the optimum still counts when the gradient is small
    ok = bool(best.success) or float(np.max(np.abs(best.jac))) <= JAC_TOL
    return MuResult(float(best.fun), unpack(best.x), ok, m)


# ---------------------------------------------------------------------------
# cigar probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeResult:
    W: float
    c: float
    r: float
    cutoff: float
    tail_fraction: float


def annulus_area(m: RadialMetric, a: float, b: float) -> float:
    """Area of {a <= rho <= b}, with the endpoints snapped to grid nodes."""
    i, j = int(round(a / m.h)), int(round(b / m.h))
    seg = m.f[i: j + 1]
    return float(2.0 * np.pi * m.h * (np.sum(seg) - 0.5 * (seg[0] + seg[-1])))


def cutoff_profile(rho, r: float, eps: float | None = None) -> np.ndarray:
    """The cut-off phi: eps/r on B(r), 1 on A(2r, 3r), eps e^-rho beyond 4r.

    sqrt(phi) is linear in rho across the transition annuli, which keeps
    |grad sqrt(phi)| <= 1/r there.
    """
    if eps is None:
        eps = 1e-3 / r
    rho = np.asarray(rho, dtype=float)
    s_in = math.sqrt(eps / r)
    s_out = math.sqrt(eps * math.exp(-4.0 * r))
    s = np.empty_like(rho)
    s[rho <= r] = s_in
    up = (rho > r) & (rho < 2 * r)
    s[up] = s_in + (1.0 - s_in) * (rho[up] - r) / r
    s[(rho >= 2 * r) & (rho <= 3 * r)] = 1.0
    down = (rho > 3 * r) & (rho < 4 * r)
    s[down] = 1.0 + (s_out - 1.0) * (rho[down] - 3 * r) / r
    out = rho >= 4 * r
    s[out] = np.sqrt(eps * np.exp(-rho[out]))
    return s**2


def cigar_entropy_probe(r: float, cutoff: float | None = None, h: float = 0.02) -> ProbeResult:
    """W(g_cigar, e^{-f/2}, tau = r^2) for f = -log phi + c on the cigar truncated at ``cutoff``."""
    if not r > 0:
        raise ValueError("r must be positive")
    if cutoff is None:
        cutoff = MIN_CUTOFF_MULT * r
    if cutoff < MIN_CUTOFF_MULT * r:
        raise TailMassError(f"cutoff {cutoff:g} is below {MIN_CUTOFF_MULT:g} r = {MIN_CUTOFF_MULT * r:g}")
    N = max(64, int(math.ceil(cutoff / h)))
    m = cigar_metric(cutoff, N)
    tau = r * r
    phi = cutoff_profile(m.rho, r)
    vw = volume_weights(m)
    mass = float(np.sum(vw * phi))
    eps = 1e-3 / r
    tail = 2.0 * np.pi * eps * math.exp(-cutoff)  # int_cutoff^inf eps e^-rho 2 pi tanh(rho) d rho, bounded
    frac = tail / mass
    if frac >= TAIL_TOL:
        raise TailMassError(f"tail mass fraction {frac:.3e} beyond cutoff {cutoff:g} exceeds {TAIL_TOL:g}")
    c = -math.log(4.0 * np.pi * tau / mass)
    Phi = np.sqrt(phi * math.exp(-c))
    return ProbeResult(w_functional(m, Phi, tau), c, r, cutoff, frac)
