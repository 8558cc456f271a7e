"""Closed-form density bounds for multiple packings, in nats per dimension.

Bounded-family bounds take ``x = N/P`` with ``0 < x <= (L-1)/L``; the
unbounded family takes ``x = N > 0``.  At ``x = 0`` the divergent bounds
return ``math.inf`` (see :func:`diverges_at_zero`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, poch


class DomainError(ValueError):
    """Argument outside the domain on which a formula is meaningful."""


class BoundName(str, enum.Enum):
    lb_gaussian = "lb_gaussian"
    lb_spherical = "lb_spherical"
    lb_spherical_improved = "lb_spherical_improved"
    lb_blachman_few = "lb_blachman_few"
    ub_eb = "ub_eb"
    cap_large_L = "cap_large_L"
    lb_ppp = "lb_ppp"
    lb_bf_unbdd = "lb_bf_unbdd"
    ub_eb_unbdd = "ub_eb_unbdd"
    cap_large_L_unbdd = "cap_large_L_unbdd"

    def __str__(self):
        return self.value


BOUNDED = (
    BoundName.lb_gaussian,
    BoundName.lb_spherical,
    BoundName.lb_spherical_improved,
    BoundName.lb_blachman_few,
    BoundName.ub_eb,
    BoundName.cap_large_L,
)
UNBOUNDED = (
    BoundName.lb_ppp,
    BoundName.lb_bf_unbdd,
    BoundName.ub_eb_unbdd,
    BoundName.cap_large_L_unbdd,
)
BOUNDED_LOWER = BOUNDED[:4]
UNBOUNDED_LOWER = UNBOUNDED[:2]
# bounded-family bounds that vanish at the Plotkin point
PLOTKIN_VANISHING = BOUNDED[:5]

_TWO_PI_E = 2.0 * math.pi * math.e


def plotkin_point(L: int) -> float:
    """(L-1)/L, the noise-to-signal ratio beyond which positive rates are impossible."""
    if L < 2:
        raise DomainError("L must be at least 2")
    return (L - 1) / L


def diverges_at_zero(name) -> bool:
    """Whether the bound is +inf in the limit N/P -> 0 (or N -> 0)."""
    return BoundName(name) is not BoundName.lb_spherical


def is_bounded_family(name) -> bool:
    return BoundName(name) in BOUNDED


def _bounded(name: BoundName, L: int, x: float) -> float:
    if name is BoundName.cap_large_L:
        if not 0 <= x <= 1:
            raise DomainError(f"cap_large_L needs 0 <= N/P <= 1, got {x}")
        return math.inf if x == 0 else -0.5 * math.log(x)
    pp = plotkin_point(L)
    if not 0 <= x <= pp:
        raise DomainError(f"{name} needs 0 <= N/P <= {pp} for L={L}, got {x}")
    if x == pp:
        return 0.0
    if x == 0:
        if name is BoundName.lb_spherical:
            return 0.5 * (1.0 - math.log(L) / (L - 1))
        return math.inf
    # rho = 1 - LN/((L-1)P) is the relative distance to the Plotkin point
    q = L * x / (L - 1)
    if name is BoundName.lb_gaussian:
        return 0.5 * (-math.log(q) + q - 1.0)
    if name is BoundName.lb_spherical:
        return 0.5 * (1.0 - q - math.log(L * (1.0 - x)) / (L - 1))
    if name is BoundName.lb_spherical_improved:
        return 0.5 * (-math.log(q) - math.log(L * (1.0 - x)) / (L - 1))
    if name is BoundName.lb_blachman_few:
        return 0.5 * math.log((L - 1) ** 2 / (L * x * (2 * (L - 1) - L * x)))
    if name is BoundName.ub_eb:
        return -0.5 * math.log(q)
    raise DomainError(f"{name} is not a bounded-family bound")


def _unbounded(name: BoundName, L: int, N: float) -> float:
    if L < 2:
        raise DomainError("L must be at least 2")
    if not N >= 0:
        raise DomainError(f"{name} needs N > 0, got {N}")
    if N == 0:
        return math.inf
    if name is BoundName.lb_ppp:
        return 0.5 * math.log((L - 1) / (_TWO_PI_E * N * L)) - math.log(L) / (2 * (L - 1))
    if name is BoundName.lb_bf_unbdd:
        return 0.5 * math.log((L - 1) / (2 * _TWO_PI_E * N * L))
    if name is BoundName.ub_eb_unbdd:
        return 0.5 * math.log((L - 1) / (_TWO_PI_E * N * L))
    if name is BoundName.cap_large_L_unbdd:
        return -0.5 * math.log(_TWO_PI_E * N)
    raise DomainError(f"{name} is not an unbounded-family bound")


def eval_bound(name, L: int, x: float) -> float:
    """Value of bound ``name`` at list size ``L`` and abscissa ``x``.

    Raises :class:`DomainError` outside the valid domain instead of
    returning NaN.
    """
    name = BoundName(name)
    x = float(x)
    if math.isnan(x):
        raise DomainError("abscissa is NaN")
    if name in BOUNDED:
        if name is not BoundName.cap_large_L and L < 2:
            raise DomainError("L must be at least 2")
        return _bounded(name, int(L), x)
    return _unbounded(name, int(L), x)


@dataclass(frozen=True)
class BoundCurve:
    name: BoundName
    L: int
    grid: np.ndarray
    values: np.ndarray


def bound_curve(name, L: int, grid: Sequence[float]) -> BoundCurve:
    grid = np.asarray(grid, dtype=float)
    vals = np.array([eval_bound(name, L, x) for x in grid])
    return BoundCurve(BoundName(name), L, grid, vals)


def crossovers(a: BoundCurve, b: BoundCurve) -> list:
    """Abscissae where two curves on the same grid swap order, located by
    linear interpolation between neighbouring grid points."""
    if not np.array_equal(a.grid, b.grid):
        raise ValueError("curves must share a grid")
    d = a.values - b.values
    out = []
    for i in range(len(d) - 1):
        d0, d1 = d[i], d[i + 1]
        if not (np.isfinite(d0) and np.isfinite(d1)):
            continue
        if d0 == 0.0:
            out.append(float(a.grid[i]))
        elif d0 * d1 < 0:
            x0, x1 = a.grid[i], a.grid[i + 1]
            out.append(float(x0 + (x1 - x0) * d0 / (d0 - d1)))
    return out


def bounded_to_unbounded_rate(R_bounded: float, P: float) -> float:
    """Density of a bounded code read as an unbounded one: R - ln(2 pi e P)/2."""
    if not P > 0:
        raise DomainError("P must be positive")
    return R_bounded - 0.5 * math.log(_TWO_PI_E * P)


# --------------------------------------------------------------------------
# Chi-square and Khinchin constants


def chi2_tail_exponent(delta: float, side: str) -> float:
    """Normalized log-probability lim (1/k) ln P[chi2(k) beyond (1 +/- delta) k]."""
    if side == "upper":
        if not delta > 0:
            raise DomainError("upper tail needs delta > 0")
        return 0.5 * (-delta + math.log1p(delta))
    if side == "lower":
        if not 0 < delta < 1:
            raise DomainError("lower tail needs 0 < delta < 1")
        return 0.5 * (delta + math.log1p(-delta))
    raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")


def khinchin_constant(n: int, p: float, domain: str = "sphere") -> float:
    """Sharp Khinchin constant for sums of independent uniform vectors on
    the unit sphere (``n >= 2``) or in the unit ball (``n >= 1``)."""
    if not p >= 1:
        raise DomainError("p must be at least 1")
    if domain == "sphere":
        if n < 2:
            raise DomainError("sphere needs n >= 2")
        pref = 0.5 * math.log(2.0 / n)
    elif domain == "ball":
        if n < 1:
            raise DomainError("ball needs n >= 1")
        pref = 0.5 * math.log(2.0 / (n + 2))
    else:
        raise DomainError(f"domain must be 'sphere' or 'ball', got {domain!r}")
    # Gamma((p+n)/2) / Gamma(n/2) via the Pochhammer symbol: differencing
    # log-gammas loses digits once n is large
    ratio = poch(n / 2.0, p / 2.0)
    if 0 < ratio < math.inf:
        log_ratio = math.log(ratio)
    else:
        log_ratio = gammaln((p + n) / 2.0) - gammaln(n / 2.0)
    return math.exp(pref + log_ratio / p)


# --------------------------------------------------------------------------
# Exponent of the truncated-gaussian tail


@dataclass(frozen=True)
class ExponentPoint:
    s: float
    lam: float
    value: float


def exponent_E(s: float, lam: float, L: int, P: float, N: float) -> float:
    """Two-parameter exponent whose maximum over s, lam >= 0, divided by
    L - 1, is the improved spherical-code rate."""
    a = 1.0 / (2.0 * P)
    if not (a - s > 0 and a - s + lam > 0):
        raise DomainError(f"E(s, lambda) undefined at s={s}, lambda={lam}, P={P}")
    return (
        -lam * L * N
        + s * L * P
        + 0.5 * math.log(a - s)
        + 0.5 * (L - 1) * math.log(a - s + lam)
        + 0.5 * L * math.log(2.0 * P)
    )


def _check_E_domain(L, P, N):
    if L < 2:
        raise DomainError("L must be at least 2")
    if not (P > 0 and N > 0):
        raise DomainError("P and N must be positive")
    if N / P > plotkin_point(L):
        raise DomainError(f"N/P = {N / P} is beyond the Plotkin point {plotkin_point(L)}")


def argmax_E(L: int, P: float, N: float) -> tuple:
    """Closed-form maximizer (s*, lambda*)."""
    _check_E_domain(L, P, N)
    if N / P == plotkin_point(L):
        return 0.0, 0.0
    s = 0.5 * (1.0 / P - 1.0 / (L * (P - N)))
    lam = (L - 1) / (2.0 * L * N) - 1.0 / (2.0 * P) + s
    return max(s, 0.0), max(lam, 0.0)


def _golden(f, lo, hi, tol=1e-12, max_iter=200):
    """Maximize a unimodal f on [lo, hi]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def maximize_E_numeric(L: int, P: float, N: float, start=None, sweeps: int = 200, tol: float = 1e-12):
    """Coordinate ascent with golden-section line searches, used as an
    independent check of :func:`argmax_E`."""
    _check_E_domain(L, P, N)
    a = 1.0 / (2.0 * P)
    # beyond these the partial derivatives are negative
    s_hi = a * (1.0 - 1e-15)
    lam_hi = (L - 1) / (2.0 * L * N) + a

    def step(s, lam, ds, dl):
        # E(s + ds, lam + dl) - E(s, lam), accurate for small steps
        u, w = a - s, a - s + lam
        if u - ds <= 0 or w - ds + dl <= 0:
            return -math.inf
        return (-dl * L * N + ds * L * P + 0.5 * math.log1p(-ds / u)
                + 0.5 * (L - 1) * math.log1p((dl - ds) / w))

    if start is None:
        s0, l0 = argmax_E(L, P, N)
        start = (s0 / 2, l0 / 2)
    s, lam = start
    for _ in range(sweeps):
        new_lam = _golden(lambda v: step(s, lam, 0.0, v - lam), 0.0, lam_hi, tol)
        new_s = _golden(lambda v: step(s, new_lam, v - s, 0.0), 0.0, s_hi, tol)
        if new_lam == lam and new_s == s:
            break
        s, lam = new_s, new_lam
    return ExponentPoint(s, lam, exponent_E(s, lam, L, P, N))


def maximize_E(L: int, P: float, N: float, stencil: float = 1e-4) -> ExponentPoint:
    """Maximizer of E over s, lambda >= 0, from the closed form.

    The point is checked to be a local maximum on a +/- ``stencil``
    perturbation stencil (restricted to the feasible quadrant).
    """
    s, lam = argmax_E(L, P, N)
    v = exponent_E(s, lam, L, P, N)
    for ds in (-stencil, 0.0, stencil):
        for dl in (-stencil, 0.0, stencil):
            ss, ll = s + ds, lam + dl
            if ss < 0 or ll < 0 or (ds == 0 and dl == 0):
                continue
            try:
                w = exponent_E(ss, ll, L, P, N)
            except DomainError:
                continue
            if w > v + 1e-15 * max(1.0, abs(v)):
                raise ArithmeticError(f"closed-form point is not a local maximum: E({ss}, {ll}) = {w} > {v}")
    return ExponentPoint(s, lam, v)
