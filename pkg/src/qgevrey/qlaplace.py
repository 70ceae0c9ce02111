"""Laplace-type summation along a q-direction with the theta kernel.

For a function ``F`` holomorphic on the spiral ``{q^s lam : s real}`` with
at most ``exp(mbar log^2|x|)`` growth, the transform along direction
``lam`` evaluated at ``z`` is

    (log q / pi_q) * integral_{-inf}^{inf} F(q^s lam) / theta(q^s lam / z) ds,

well defined whenever ``z`` is theta-safe for ``(lam, delta)`` and
``mbar < 1 / (2 log|q|)``.  The doubly infinite path is truncated by an
analytic Gaussian-tail bound on the integrand majorant and integrated by
composite Simpson rule with global step halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .qgeometry import QBase, in_theta_safe, qpow
from .theta import log_theta, pi_q


@dataclass(frozen=True)
class QuadSettings:
    """Composite-Simpson controls for the path integral."""

    abs_tol: float = 1e-10
    initial_step: float = 0.25
    max_halvings: int = 14
    s_pad: float = 2.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.initial_step > 0.5:
            raise ValueError("initial_step must be at most 0.5")
        if self.max_halvings < 3:
            raise ValueError("max_halvings must be at least 3")
        if self.s_pad <= 0:
            raise ValueError("s_pad must be positive")


@dataclass(frozen=True)
class GrowthCertificate:
    """Growth bound ``|F(x)| <= c1 exp(mbar log^2 |x|)`` on the path."""

    c1: float
    mbar: float

    def __post_init__(self):
        if not self.c1 > 0 or not self.mbar > 0:
            raise ValueError("certificate constants must be positive")


def default_majorant_xi(cert: GrowthCertificate, base: QBase) -> float:
    """Midpoint between the smallest admissible xi and 1."""
    return 0.5 * (2.0 * cert.mbar * base.log_abs_q + 1.0)


def _check_admissible(cert: GrowthCertificate, base: QBase, xi: float) -> None:
    L = base.log_abs_q
    if cert.mbar >= 1.0 / (2.0 * L):
        raise ValueError(
            "growth type %.6g reaches the kernel limit 1/(2 log|q|) = %.6g; "
            "the transform is not certifiably convergent" % (cert.mbar, 0.5 / L))
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    if cert.mbar >= xi / (2.0 * L):
        raise ValueError(
            "majorant requires mbar < xi/(2 log|q|): %.6g >= %.6g"
            % (cert.mbar, xi / (2.0 * L)))


def truncation_window(cert: GrowthCertificate, lam: complex, z: complex,
                      base: QBase, xi: float, tol: float,
                      s_pad: float = 0.0, theta_floor: float = 1.0
                      ) -> tuple[float, float]:
    """Window ``[s_lo, s_hi]`` outside which the integrand majorant sums below tol.

    The majorant (growth numerator over the theta lower bound, including
    the transform prefactor) is a Gaussian in ``x = log|q^s lam|``; each
    tail is solved from ``A exp(-a u^2) / (2 a u) <= tol/2`` by a short
    fixed-point iteration, then ``s_pad`` is added.
    """
    _check_admissible(cert, base, xi)
    L = base.log_abs_q
    a = xi / (2.0 * L) - cert.mbar
    pref = abs(base.log_q / pi_q(base))
    # exponent of the majorant: -a x^2 + 2 b x - c with b, c from |z|
    g = xi / (2.0 * L)
    lz = math.log(abs(z))
    x_c = g * lz / a
    e_max = g * lz * lz * (g / a - 1.0)
    amp = pref * cert.c1 / theta_floor * math.exp(min(e_max, 700.0)) / L
    if amp <= 0.25 * tol:
        u = 1.0
    else:
        u = 1.0
        for _ in range(4):
            u = math.sqrt(max(math.log(max(amp / (tol * a * u), 1.0001)), 0.25) / a)
        u += 0.5  # swallow the fixed-point slack
    x_lo, x_hi = x_c - u, x_c + u
    l_lam = math.log(abs(lam))
    s_lo = (x_lo - l_lam) / L - s_pad
    s_hi = (x_hi - l_lam) / L + s_pad
    return s_lo, s_hi


def majorant(cert: GrowthCertificate, lam: complex, z: complex, base: QBase,
             xi: float, s, theta_floor: float = 1.0):
    """Value of the truncation majorant at path parameter(s) ``s``."""
    L = base.log_abs_q
    pref = abs(base.log_q / pi_q(base))
    x = np.asarray(s, dtype=float) * L + math.log(abs(lam))
    expo = cert.mbar * x**2 - xi / (2.0 * L) * (x - math.log(abs(z))) ** 2
    return pref * cert.c1 / theta_floor * np.exp(np.minimum(expo, 700.0))


def _simpson_nodes(s_lo: float, s_hi: float, step: float) -> np.ndarray:
    n = max(int(math.ceil((s_hi - s_lo) / step)), 2)
    if n % 2 == 1:
        n += 1
    return np.linspace(s_lo, s_hi, n + 1)


def _simpson_weights(n_nodes: int) -> np.ndarray:
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def _eval_integrand(F, lam: complex, z: complex, base: QBase,
                    s: np.ndarray) -> np.ndarray:
    pts = qpow(base, s) * lam
    kernel = np.exp(-log_theta(pts / z, base))
    try:
        num = np.asarray(F(pts), dtype=complex)
        if num.shape != pts.shape:
            raise TypeError
    except TypeError:
        num = np.array([F(p) for p in pts], dtype=complex)
    return num * kernel


def _refine(F, lam, z, base, settings: QuadSettings,
            s_lo: float, s_hi: float) -> complex:
    """Composite Simpson with global step halving to abs_tol."""
    pref = base.log_q / pi_q(base)
    step = settings.initial_step
    prev = None
    for _ in range(settings.max_halvings + 1):
        s = _simpson_nodes(s_lo, s_hi, step)
        vals = _eval_integrand(F, lam, z, base, s)
        h = s[1] - s[0]
        cur = pref * (h / 3.0) * complex(np.dot(_simpson_weights(len(s)), vals))
        if prev is not None and abs(cur - prev) < settings.abs_tol:
            return cur
        prev = cur
        step *= 0.5
    raise ConvergenceError(
        "path integral did not converge to %g within %d halvings"
        % (settings.abs_tol, settings.max_halvings),
        last=cur, previous=prev)


def _window(F, lam, z, base, cert, settings, xi) -> tuple[float, float]:
    s_lo, s_hi = truncation_window(cert, lam, z, base, xi, settings.abs_tol,
                                   s_pad=settings.s_pad)
    # endpoint guard: widen while the actual integrand is not yet negligible
    for _ in range(5):
        edge = np.abs(_eval_integrand(F, lam, z, base,
                                      np.array([s_lo, s_hi])))
        bound = settings.abs_tol / max(s_hi - s_lo, 1.0)
        if edge.max() <= bound:
            break
        s_lo -= 2.0 * settings.s_pad
        s_hi += 2.0 * settings.s_pad
    return s_lo, s_hi


def q_laplace(F, lam: complex, z: complex, base: QBase,
              cert: GrowthCertificate, settings: QuadSettings = QuadSettings(),
              xi: float = None, delta: float = 0.05) -> complex:
    """Transform of ``F`` along direction ``lam``, evaluated at ``z``.

    ``F`` is called with an ndarray of path points (a scalar fallback is
    attempted).  ``z`` must be theta-safe for ``(lam, delta)``; violations
    raise :class:`DomainError` before any integration.
    """
    if xi is None:
        xi = default_majorant_xi(cert, base)
    _check_admissible(cert, base, xi)
    if not in_theta_safe(z, lam, base, delta):
        raise DomainError(
            "z = %s is not theta-safe for direction %s at delta = %g"
            % (z, lam, delta), membership="theta_safe")
    s_lo, s_hi = _window(F, lam, z, base, cert, settings, xi)
    return _refine(F, lam, z, base, settings, s_lo, s_hi)


def q_laplace_split(F, lam: complex, z: complex, base: QBase,
                    cert: GrowthCertificate,
                    settings: QuadSettings = QuadSettings(),
                    xi: float = None, delta: float = 0.05
                    ) -> tuple[complex, complex]:
    """Outward (s >= 0) and inward (s <= 0) halves of the transform.

    Their sum equals the unsplit transform within twice the quadrature
    tolerance.
    """
    if xi is None:
        xi = default_majorant_xi(cert, base)
    _check_admissible(cert, base, xi)
    if not in_theta_safe(z, lam, base, delta):
        raise DomainError(
            "z = %s is not theta-safe for direction %s at delta = %g"
            % (z, lam, delta), membership="theta_safe")
    s_lo, s_hi = _window(F, lam, z, base, cert, settings, xi)
    s_hi = max(s_hi, settings.initial_step)
    s_lo = min(s_lo, -settings.initial_step)
    plus = _refine(F, lam, z, base, settings, 0.0, s_hi)
    minus = _refine(F, lam, z, base, settings, s_lo, 0.0)
    return plus, minus
