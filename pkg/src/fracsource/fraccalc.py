"""Scalar fractional-calculus kernels.

Mittag-Leffler evaluation on the real line, Riemann-Liouville integrals
(forward and backward) by product-trapezoid quadrature, the L1 discretization
of the Caputo derivative, and the L1 weight sequence shared with the
time-stepping solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import integrate
from scipy.special import gammaln, hyp1f1, rgamma

__all__ = [
    "FractionalOrder",
    "L1Weights",
    "mittag_leffler",
    "rl_integral",
    "rl_integral_backward",
    "caputo_l1",
    "l1_weights",
]

_LN10 = math.log(10.0)
# Taylor is used while the series loses at most ~3 decimal digits to
# cancellation; the algebraic asymptotic series once its optimal-truncation
# error ~ exp(-|z|^(1/alpha)) is below ~1e-14. The window in between is
# covered by the spectral integral representation.
_TAYLOR_MAX_Y = 3.0 * _LN10
_ASYMPTOTIC_MIN_Y = 32.0


@dataclass(frozen=True)
class FractionalOrder:
    """Time-fractional order alpha, restricted to (0, 1)."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"fractional order must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class L1Weights:
    """L1 weight sequence b_k = (k+1)^(1-alpha) - k^(1-alpha) for a uniform step tau."""

    alpha: FractionalOrder
    tau: float
    b: NDArray[np.float64] = field(repr=False)

    @property
    def scale(self) -> float:
        """Prefactor tau^(-alpha) / Gamma(2 - alpha) of the L1 operator."""
        a = self.alpha.alpha
        return self.tau ** (-a) / math.gamma(2.0 - a)


def l1_weights(alpha: FractionalOrder, n_steps: int, tau: float = 1.0) -> L1Weights:
    """Weights of the L1 Caputo discretization for ``n_steps`` uniform steps.

    b_0 = 1 and the sequence is positive and strictly decreasing; partial sums
    telescope to n^(1-alpha), which makes the L1 operator annihilate constants
    exactly.  ``tau`` only enters the :attr:`L1Weights.scale` prefactor.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    a = alpha.alpha
    k = np.arange(n_steps, dtype=float)
    b = (k + 1.0) ** (1.0 - a) - k ** (1.0 - a)
    return L1Weights(alpha=alpha, tau=tau, b=b)


def _ml_taylor(alpha: float, beta: float, z: float) -> float:
    # Compensated (Kahan) summation of sum_k z^k / Gamma(alpha k + beta).
    s = 0.0
    c = 0.0
    zk = 1.0
    for k in range(5000):
        t = zk * rgamma(alpha * k + beta)
        y = t - c
        u = s + y
        c = (u - s) - y
        s = u
        if not math.isfinite(s):
            return math.inf
        zk *= z
        if k > 3 and abs(t) < 1e-17 * max(1.0, abs(s)):
            break
    return s


def _ml_asymptotic(alpha: float, beta: float, z: float) -> float:
    # -sum_{k>=1} z^{-k} / Gamma(beta - alpha k), truncated at the minimum of
    # the non-oscillatory envelope x^{-k} Gamma(1 + alpha k - beta) / pi.
    x = -z
    lx = math.log(x)
    total = 0.0
    env_prev = math.inf
    for k in range(1, 400):
        arg = 1.0 + alpha * k - beta
        if arg > 0.0:
            env = math.exp(gammaln(arg) - k * lx) / math.pi
        else:
            env = abs(rgamma(beta - alpha * k)) * math.exp(-k * lx)
        if env > env_prev:
            break
        env_prev = env
        total -= ((-1.0) ** k) * math.exp(-k * lx) * rgamma(beta - alpha * k)
        if env < 1e-18:
            break
    return total


def _ml_spectral(alpha: float, beta: float, z: float) -> float:
    # Real-line spectral representation for 0 < alpha < 1, beta < 1 + alpha,
    # z < 0.  The substitution r = v^p removes the endpoint singularity.
    x = -z
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + alpha))
    ca = math.cos(math.pi * alpha)
    p = alpha / (alpha + 1.0 - beta)
    q = 1.0 / (alpha + 1.0 - beta)
    pref = p / (alpha * math.pi)

    def f(v: float) -> float:
        r = v**p
        num = r * s1 + x * s2
        den = r * r + 2.0 * r * x * ca + x * x
        return pref * math.exp(-(v**q)) * num / den

    # Split at the denominator minimum and at the decay scale of exp(-v^q).
    r_peak = x * abs(ca) if ca < 0.0 else x
    breaks = sorted({1.0, max(r_peak, 1e-2) ** (1.0 / p), 30.0 ** (1.0 / q)})
    total = 0.0
    lo = 0.0
    for hi in breaks:
        if hi > lo:
            part, _ = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
            total += part
            lo = hi
    part, _ = integrate.quad(f, lo, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    return total + part


def _ml_oscillatory_tail(alpha: float, beta: float, z: float) -> float:
    # Conjugate saddle pair for alpha in (1, 2) on the negative axis.
    zeta = (-z) ** (1.0 / alpha) * complex(
        math.cos(math.pi / alpha), math.sin(math.pi / alpha)
    )
    return (2.0 / alpha) * (zeta ** (1.0 - beta) * np.exp(zeta)).real


def mittag_leffler(alpha: float, beta: float, z: float) -> float:
    """Evaluate the two-parameter Mittag-Leffler function E_{alpha,beta}(z).

    Real arguments only; negative real z is the primary regime and is accurate
    to ~1e-12 absolute for alpha in (0, 1] (measured <= 2.1e-13 on [-100, 0]
    for the orders used here).  For alpha in (1, 2] the mid-range accuracy
    degrades to ~1e-8; large positive z may overflow to ``inf``.

    Parameters
    ----------
    alpha, beta : float
        Parameters of E_{alpha,beta}; ``alpha`` must lie in (0, 2].
    z : float
        Real argument.

    Returns
    -------
    float
        E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if z == 0.0:
        return float(rgamma(beta))
    if alpha == 1.0:
        # E_{1,beta}(z) = M(1, beta, z) / Gamma(beta); exact exp for beta = 1.
        if beta == 1.0:
            return math.exp(z)
        return float(hyp1f1(1.0, beta, z) * rgamma(beta))
    if z > 0.0:
        return _ml_taylor(alpha, beta, z)
    y = (-z) ** (1.0 / alpha)
    if y <= _TAYLOR_MAX_Y:
        return _ml_taylor(alpha, beta, z)
    if alpha > 1.0:
        if y >= _ASYMPTOTIC_MIN_Y:
            return _ml_oscillatory_tail(alpha, beta, z) + _ml_asymptotic(alpha, beta, z)
        return _ml_taylor(alpha, beta, z)
    if beta >= 1.0 + alpha:
        # Reduce beta below 1 + alpha: E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
        return (mittag_leffler(alpha, beta - alpha, z) - float(rgamma(beta - alpha))) / z
    if y >= _ASYMPTOTIC_MIN_Y:
        return _ml_asymptotic(alpha, beta, z)
    return _ml_spectral(alpha, beta, z)


def _check_uniform(t: NDArray[np.float64]) -> float:
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid must be a 1-D array with at least two nodes")
    steps = np.diff(t)
    tau = steps[0]
    if tau <= 0.0 or not np.allclose(steps, tau, rtol=1e-12, atol=1e-14):
        raise ValueError("time grid must be uniform and increasing")
    return float(tau)


def rl_integral(alpha: float, g: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    """Riemann-Liouville integral (J_{0+}^alpha g)(t_n) on a uniform grid.

    Product-trapezoid rule: ``g`` is interpolated piecewise linearly and the
    kernel (t - s)^(alpha-1) / Gamma(alpha) is integrated exactly against it,
    which is O(tau^2) accurate for smooth g.
    """
    if alpha <= 0.0:
        raise ValueError(f"integral order must be positive, got {alpha}")
    g = np.asarray(g, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = _check_uniform(t)
    n_nodes = t.size
    if g.shape != (n_nodes,):
        raise ValueError("g must be a scalar function sampled on the time grid")

    # Exact kernel moments over [t_k, t_{k+1}]: powers of the node offsets.
    pa = t**alpha
    pa1 = t ** (alpha + 1.0)
    out = np.zeros_like(g)
    inv_ga = rgamma(alpha)
    for n in range(1, n_nodes):
        # interval j in [0, n): u = t_n - s in [A, B] = [t_{n-j-1}, t_{n-j}]
        j = np.arange(n)
        A = t[n - j - 1]
        B = t[n - j]
        dpa = (pa[n - j] - pa[n - j - 1]) / alpha
        dpa1 = (pa1[n - j] - pa1[n - j - 1]) / (alpha + 1.0)
        gj = g[j]
        gj1 = g[j + 1]
        # g(t_n - u) = g_{j+1} + (g_j - g_{j+1}) (u - A) / tau on the interval
        out[n] = inv_ga * np.sum(gj1 * dpa + (gj - gj1) / tau * (dpa1 - A * dpa))
    return out


def rl_integral_backward(
    alpha: float, g: NDArray[np.float64], t: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Backward Riemann-Liouville integral (J_{T-}^alpha g)(t_n).

    Implemented by time reflection of :func:`rl_integral`, so the identity
    J_{T-}^alpha g (t) = J_{0+}^alpha (g o reflect) (T - t) holds bitwise.
    """
    g = np.asarray(g, dtype=float)
    return rl_integral(alpha, g[::-1], np.asarray(t, dtype=float))[::-1]


def caputo_l1(
    alpha: FractionalOrder, u: NDArray[np.float64], t: NDArray[np.float64]
) -> NDArray[np.float64]:
    """L1 approximation of the Caputo derivative of ``u`` on a uniform grid.

    Node n >= 1 carries (tau^-alpha / Gamma(2-alpha)) *
    sum_{k=0}^{n-1} b_k (u^{n-k} - u^{n-k-1}); node 0 is 0 (the Caputo
    derivative of a C^1 function vanishes at t = 0+).  Truncation order
    2 - alpha for u in C^2.
    """
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = _check_uniform(t)
    n_nodes = t.size
    if u.shape != (n_nodes,):
        raise ValueError("u must be a scalar function sampled on the time grid")
    a = alpha.alpha
    b = l1_weights(alpha, n_nodes - 1).b
    scale = tau ** (-a) / math.gamma(2.0 - a)
    du = np.diff(u)
    out = np.zeros_like(u)
    for n in range(1, n_nodes):
        out[n] = scale * np.dot(b[:n][::-1], du[:n])
    return out
