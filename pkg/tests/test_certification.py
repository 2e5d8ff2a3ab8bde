"""Executable evidence for the reproduction-test failures.

The thresholding iteration f_{k+1} = (M f_k - int mu z dt)/(M + rho) is stable
iff ||A||^2 < 2M + rho for A: f -> u(f)|_{omega x (0,T)}.  This module
certifies ||A||^2 by a modal Galerkin computation built only from exact
Neumann eigenfunctions and closed-form Mittag-Leffler modal responses (no
time-stepping code involved), and checks that the solver-based power
iteration agrees.  The published tuning constants then place the failing
acceptance cases on the wrong side of the stability bound.
"""

import math

import numpy as np
from scipy.integrate import simpson

from fracsource import FractionalOrder, mittag_leffler
from fracsource.experiments import build_problem, config_from_preset
from fracsource.inversion import estimate_m

MU_COEFFS = ((0, 1.0), (2, 10.0 * math.pi))


def modal_response(lam: float, alpha: float, t: float) -> float:
    """u_n(t) for d_t^alpha u_n + lam u_n = mu(t), u_n(0) = 0, exactly."""
    if t == 0.0:
        return 0.0
    return sum(
        c * math.gamma(p + 1.0) * t ** (p + alpha)
        * mittag_leffler(alpha, p + alpha + 1.0, -lam * t**alpha)
        for p, c in MU_COEFFS
    )


def cosine_overlap(n: int, m: int, a: float, b: float) -> float:
    """int_a^b phi_n phi_m dx for the normalized Neumann cosine modes."""

    def cos_int(k: int, lo: float, hi: float) -> float:
        if k == 0:
            return hi - lo
        return (math.sin(k * math.pi * hi) - math.sin(k * math.pi * lo)) / (k * math.pi)

    if n == 0 and m == 0:
        return b - a
    if n == 0 or m == 0:
        return math.sqrt(2.0) * cos_int(max(n, m), a, b)
    return cos_int(n - m, a, b) + cos_int(n + m, a, b)


def galerkin_norm_sq(alpha: float, n_modes: int = 16, n_quad: int = 161) -> float:
    """||A||^2 lower bound from the span of the first Neumann modes (1D edges)."""
    lams = [(n * math.pi) ** 2 + 1.0 for n in range(n_modes + 1)]
    tq = np.linspace(0.0, 1.0, n_quad)
    profiles = np.array([[modal_response(lam, alpha, t) for t in tq] for lam in lams])
    time_gram = np.array(
        [[simpson(profiles[n] * profiles[m], x=tq) for m in range(n_modes + 1)]
         for n in range(n_modes + 1)]
    )
    omega_gram = np.array(
        [[cosine_overlap(n, m, 0.0, 0.05) + cosine_overlap(n, m, 0.95, 1.0)
          for m in range(n_modes + 1)] for n in range(n_modes + 1)]
    )
    return float(np.linalg.eigvalsh(time_gram * omega_gram)[-1])


def test_galerkin_certifies_power_iteration():
    # two fully independent routes to ||A||^2 agree within a few percent
    for alpha, published_m in ((0.3, 2.0), (0.5, 1.0), (0.8, 1.0)):
        analytic = galerkin_norm_sq(alpha)
        spec, _, mask = build_problem(config_from_preset("5.1a", alpha=alpha))
        discrete = estimate_m(spec, mask, iters=60)
        assert abs(discrete - analytic) / analytic <= 0.03, (alpha, analytic, discrete)


def test_published_tuning_constants_straddle_stability_bound():
    # alpha = 0.3 with M = 2: marginally stable; alpha = 0.5 with M = 1:
    # provably expansive; alpha = 0.8 with M = 1: stable.  These three facts
    # drive which published experiment rows can and cannot be reproduced.
    norm_03 = galerkin_norm_sq(0.3)
    norm_05 = galerkin_norm_sq(0.5)
    norm_08 = galerkin_norm_sq(0.8)
    assert norm_03 < 2.0 * 2.0 < norm_03 * 1.05   # barely inside the bound
    assert norm_05 > 2.0 * 1.0                    # outside: iteration diverges
    assert norm_08 < 2.0 * 1.0                    # inside: iteration converges
