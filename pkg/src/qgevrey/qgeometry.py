"""Complex q-power arithmetic and membership tests for q-spiral domains.

Everything downstream is parameterized by a base :class:`QBase` holding a
deformation parameter ``q`` with ``|q| > 1`` and a fixed (principal) branch
of ``log q``.  Three families of domains appear:

* discrete q-spirals ``U q^-N = {u q^-n : u in U, n = 0, 1, ...}`` spiraling
  toward the origin from a chart patch ``U``,
* continuous q-spirals ``V q^R+ = {v q^l : v in V, l >= 0}`` spiraling
  toward infinity from a base patch ``V``,
* the theta-safe set of a direction ``lam``: the z for which the two-sided
  spiral ``{lam q^-k / z : k in R}`` keeps distance > delta from ``-1``,
  i.e. where the reciprocal theta kernel stays controlled.

A chart patch is written ``u, v -> exp(2*pi*i*u) * q**v`` with ``u`` in
turns, so multiplication by ``q`` shifts ``v`` by one and leaves ``u``
fixed.  Membership tests reduce to interval arithmetic in the ``(u, v)``
coordinates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QBase:
    """Deformation parameter ``q`` (``|q| > 1``) with its fixed logarithm."""

    q: complex
    log_q: complex = None  # type: ignore[assignment]

    def __post_init__(self):
        q = complex(self.q)
        if abs(q) <= 1.0:
            raise ValueError("base requires |q| > 1, got |q| = %g" % abs(q))
        lq = cmath.log(q) if self.log_q is None else complex(self.log_q)
        if abs(cmath.exp(lq) - q) > 1e-14 * abs(q):
            raise ValueError("log_q is not a logarithm of q")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "log_q", lq)

    @property
    def log_abs_q(self) -> float:
        return self.log_q.real


@dataclass(frozen=True)
class ChartBase:
    """Patch ``{exp(2*pi*i*u) q^v : u in i1, v in i2}``, intervals in turns/levels.

    Both intervals must be shorter than 1/4.
    """

    i1: tuple[float, float]
    i2: tuple[float, float]

    def __post_init__(self):
        for name, (lo, hi) in (("i1", self.i1), ("i2", self.i2)):
            if not hi > lo:
                raise ValueError("%s is empty" % name)
            if hi - lo >= 0.25:
                raise ValueError("%s must be shorter than 1/4 (got %g)" % (name, hi - lo))

    @property
    def u_mid(self) -> float:
        return 0.5 * (self.i1[0] + self.i1[1])

    @property
    def v_mid(self) -> float:
        return 0.5 * (self.i2[0] + self.i2[1])


@dataclass(frozen=True)
class ContinuousBase:
    """Bounded patch in C*: modulus interval x argument interval (radians)."""

    mod: tuple[float, float]
    arg: tuple[float, float]

    def __post_init__(self):
        if not 0.0 < self.mod[0] < self.mod[1] < math.inf:
            raise ValueError("modulus interval must satisfy 0 < lo < hi < inf")
        if not self.arg[0] < self.arg[1]:
            raise ValueError("argument interval is empty")
        if self.arg[1] - self.arg[0] > TWO_PI:
            raise ValueError("argument interval longer than a full turn")

    @property
    def dist0(self) -> float:
        """Distance from the patch to the origin."""
        return self.mod[0]

    def center(self) -> complex:
        m = 0.5 * (self.mod[0] + self.mod[1])
        a = 0.5 * (self.arg[0] + self.arg[1])
        return m * cmath.exp(1j * a)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n points, log-uniform in modulus, uniform in argument."""
        mods = np.exp(rng.uniform(math.log(self.mod[0]), math.log(self.mod[1]), n))
        args = rng.uniform(self.arg[0], self.arg[1], n)
        return mods * np.exp(1j * args)


def qpow(base: QBase, t) -> complex:
    """``q**t`` along the fixed branch: exp(t * log q).

    Accepts a scalar or ndarray exponent; continuous in ``t`` with
    ``qpow(b, 0) == 1`` and ``qpow(b, 1) == q``.
    """
    if isinstance(t, np.ndarray):
        return np.exp(t * base.log_q)
    return cmath.exp(t * base.log_q)


def spiral_coordinates(point: complex, base: QBase) -> tuple[float, float]:
    """Unique ``(u, v)`` with ``point = exp(2*pi*i*u) q^v`` and u in [0, 1)."""
    if point == 0:
        raise DomainError("origin has no spiral coordinates", membership="nonzero")
    L = base.log_abs_q
    v = math.log(abs(point)) / L
    u = (cmath.phase(point) - v * base.log_q.imag) / TWO_PI
    return u % 1.0, v


def _u_in_interval(u: float, lo: float, hi: float) -> bool:
    # open interval of length < 1, compared modulo 1
    return 0.0 < (u - lo) % 1.0 < (hi - lo)


def in_discrete_spiral(eps: complex, chart: ChartBase, base: QBase) -> bool:
    """Whether ``eps`` lies on the discrete spiral ``U_chart q^-N``.

    True iff ``eps * q^n`` lands in the chart patch for some integer
    ``n >= 0``; in spiral coordinates this means ``u`` is in ``i1`` modulo
    one and ``v + n`` hits ``i2``.
    """
    u, v = spiral_coordinates(eps, base)
    if not _u_in_interval(u, *chart.i1):
        return False
    lo, hi = chart.i2
    n = math.ceil(lo - v)
    if lo - v == n:  # open interval: v + n must exceed lo strictly
        n += 1
    return n >= 0 and v + n < hi


def in_continuous_spiral(tau: complex, v_set: ContinuousBase, base: QBase,
                         two_sided: bool = False) -> bool:
    """Whether ``tau`` lies on ``V q^R+`` (or ``V q^R`` when two_sided).

    Solves ``|tau q^-l|`` in the modulus band for the feasible ``l`` range,
    then checks whether some feasible ``l`` also puts ``arg(tau q^-l)``
    inside the argument band (the argument drifts linearly in ``l`` when
    ``q`` is not positive real).
    """
    if tau == 0:
        raise DomainError("origin is not on any q-spiral", membership="nonzero")
    L = base.log_abs_q
    l_lo = (math.log(abs(tau)) - math.log(v_set.mod[1])) / L
    l_hi = (math.log(abs(tau)) - math.log(v_set.mod[0])) / L
    if not two_sided:
        l_lo = max(l_lo, 0.0)
    if l_hi <= l_lo:
        return False
    omega = base.log_q.imag
    phase = cmath.phase(tau)
    a_lo, a_hi = v_set.arg
    if omega == 0.0:
        return any(
            a_lo < phase + TWO_PI * k < a_hi
            for k in range(math.floor((a_lo - phase) / TWO_PI),
                           math.ceil((a_hi - phase) / TWO_PI) + 1)
        )
    # arg(tau q^-l) = phase - l*omega + 2 pi k in (a_lo, a_hi)
    k_min = math.floor((min(l_lo, l_hi) * omega - phase + a_lo) / TWO_PI) - 1
    k_max = math.ceil((max(l_lo, l_hi) * omega - phase + a_hi) / TWO_PI) + 1
    for k in range(k_min, k_max + 1):
        la = (phase + TWO_PI * k - a_hi) / omega
        lb = (phase + TWO_PI * k - a_lo) / omega
        if la > lb:
            la, lb = lb, la
        if max(la, l_lo) < min(lb, l_hi):
            return True
    return False


def spiral_min_distance(w: complex, base: QBase, delta: float,
                        step: float = 1e-3, refine: int = 40) -> float:
    """Min over real k of ``|1 + w q^-k|``, certified against ``delta``.

    Only the modulus band ``|w q^-k|`` near 1 can produce values below
    ``min(3*delta, (1+delta)/2)``; the band is scanned densely and the best
    grid point refined by golden-section steps.  The returned value is
    exact enough to decide ``> delta`` for any delta in (0, 1).
    """
    if w == 0:
        raise DomainError("spiral base must be nonzero", membership="nonzero")
    L = base.log_abs_q
    m_lo = max(1.0 - 3.0 * delta, 0.5 * (1.0 - delta))
    m_hi = 1.0 + 3.0 * delta
    outside = min(1.0 - m_lo, m_hi - 1.0)
    k1 = (math.log(abs(w)) - math.log(m_hi)) / L
    k2 = (math.log(abs(w)) - math.log(m_lo)) / L
    ks = np.arange(k1, k2 + step, step)
    vals = np.abs(1.0 + w * np.exp(-ks * base.log_q))
    i = int(np.argmin(vals))
    a = ks[max(i - 1, 0)]
    b = ks[min(i + 1, len(ks) - 1)]

    def g(k: float) -> float:
        return abs(1.0 + w * cmath.exp(-k * base.log_q))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(refine):
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - inv_phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv_phi * (b - a)
            gd = g(d)
    return min(float(vals[i]), gc, gd, outside)


def in_theta_safe(z: complex, lam: complex, base: QBase, delta: float,
                  step: float = 1e-3) -> bool:
    """Whether ``|1 + lam / (z q^k)| > delta`` for every real ``k``."""
    if z == 0 or lam == 0:
        raise DomainError("theta-safe test needs z != 0 and lam != 0",
                          membership="nonzero")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return spiral_min_distance(lam / z, base, delta, step=step) > delta
