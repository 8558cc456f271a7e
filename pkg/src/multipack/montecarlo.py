"""Exact and sampled probabilities of the bad-list event.

A list of L codewords is bad when its average squared radius is at most
n*N.  For the Gaussian ensemble the probability is a chi-square CDF; for
the other ensembles it is estimated by plain Monte Carlo.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .ensembles import CHUNKS, EnsembleSpec, draw, substream

_SERIES_TOL = 1e-14
_MAX_ITER = 10_000
_TINY = 1e-300

CHUNK = 1 << 14


# --------------------------------------------------------------------------
# Regularized incomplete gamma


def _log_lower_series(a: float, x: float, log_x=None) -> float:
    """log P(a, x) from the power series; good for x < a + 1.

    ``log_x`` may be passed when x itself underflows."""
    term = 1.0 / a
    total = term
    for k in range(1, _MAX_ITER):
        term *= x / (a + k)
        total += term
        if term < total * _SERIES_TOL:
            break
    else:
        raise ArithmeticError(f"series for P({a}, {x}) did not converge")
    if log_x is None:
        log_x = math.log(x)
    return a * log_x - x - gammaln(a) + math.log(total)


def _log_upper_cf(a: float, x: float) -> float:
    """log Q(a, x) from the modified-Lentz continued fraction; x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _SERIES_TOL:
            break
    else:
        raise ArithmeticError(f"continued fraction for Q({a}, {x}) did not converge")
    return a * math.log(x) - x - gammaln(a) + math.log(h)


def _check_chi2(k, x):
    if not k >= 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {k}")
    if not x >= 0:
        raise ValueError(f"chi-square argument must be >= 0, got {x}")


def chi2_logcdf(k: float, x: float) -> float:
    """log P[chi2(k) <= x], accurate deep in the lower tail."""
    _check_chi2(k, x)
    if x == 0:
        return -math.inf
    if math.isinf(x):
        return 0.0
    a, y = k / 2.0, x / 2.0
    if y < a + 1.0:
        return _log_lower_series(a, y, math.log(x) - math.log(2.0))
    return math.log1p(-math.exp(_log_upper_cf(a, y)))


def chi2_cdf(k: float, x: float) -> float:
    """P[chi2(k) <= x], the regularized lower incomplete gamma P(k/2, x/2)."""
    _check_chi2(k, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    a, y = k / 2.0, x / 2.0
    if y < a + 1.0:
        return math.exp(_log_lower_series(a, y, math.log(x) - math.log(2.0)))
    return -math.expm1(_log_upper_cf(a, y))


def chi2_sf(k: float, x: float) -> float:
    """P[chi2(k) > x]."""
    _check_chi2(k, x)
    if x == 0:
        return 1.0
    a, y = k / 2.0, x / 2.0
    if y < a + 1.0:
        return -math.expm1(_log_lower_series(a, y, math.log(x) - math.log(2.0)))
    return math.exp(_log_upper_cf(a, y))


# --------------------------------------------------------------------------
# Gaussian ensemble, exact


def _check_params(n, L, P, N):
    if n < 1 or L < 2:
        raise ValueError("need n >= 1 and L >= 2")
    if not (P > 0 and N >= 0):
        raise ValueError("need P > 0 and N >= 0")


def gaussian_tail_exact(n: int, L: int, P: float, N: float) -> float:
    """P[avg-rad^2 of L i.i.d. N(0, P I_n) points <= nN].

    L times the average squared radius, divided by P, is chi-square with
    (L-1)n degrees of freedom.
    """
    _check_params(n, L, P, N)
    return chi2_cdf((L - 1) * n, L * n * N / P)


def gaussian_tail_log(n: int, L: int, P: float, N: float) -> float:
    _check_params(n, L, P, N)
    return chi2_logcdf((L - 1) * n, L * n * N / P)


def gaussian_tail_rate(L: int, P: float, N: float) -> float:
    """Asymptotic -(1/n) ln of the Gaussian bad-list probability,
    ((L-1)/2)(-ln(1-rho) - rho) with rho = 1 - LN/((L-1)P)."""
    rho = 1.0 - L * N / ((L - 1) * P)
    if not 0 < rho < 1:
        raise ValueError("need 0 < N/P < (L-1)/L")
    return 0.5 * (L - 1) * (-math.log1p(-rho) - rho)


def spherical_normal_rate(L: int, P: float, N: float) -> float:
    """Exponent (1/2)(eta - ln(1 + eta)), eta = (L-1) rho, of the normal
    approximation to the spherical bad-list probability."""
    rho = 1.0 - L * N / ((L - 1) * P)
    if not 0 < rho < 1:
        raise ValueError("need 0 < N/P < (L-1)/L")
    eta = (L - 1) * rho
    return 0.5 * (eta - math.log1p(eta))


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class TailEstimate:
    ensemble: str
    n: int
    L: int
    nN: float
    samples: int
    hits: int

    @property
    def p_hat(self) -> float:
        return self.hits / self.samples

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.samples)

    @property
    def neg_log_rate(self) -> float:
        return -math.log(self.p_hat) / self.n if self.hits else math.inf

    def as_dict(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "n": self.n,
            "L": self.L,
            "nN": self.nN,
            "samples": self.samples,
            "hits": self.hits,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "neg_log_rate": self.neg_log_rate if self.hits else None,
        }


def list_avg_sq_radii(lists: np.ndarray) -> np.ndarray:
    """Average squared radius of each list in an array of shape (count, L, n)."""
    D = lists - lists.mean(axis=1, keepdims=True)
    return np.einsum("cln,cln->c", D, D) / lists.shape[1]


def _chunk_hits(spec: EnsembleSpec, L: int, nN: float, seed: int, chunk: int, count: int) -> int:
    rng = substream(seed, CHUNKS, chunk)
    pts = draw(spec, rng, count * L).reshape(count, L, spec.n)
    return int(np.count_nonzero(list_avg_sq_radii(pts) <= nN))


def mc_tail(spec: EnsembleSpec, L: int, nN: float, samples: int, seed: int, workers: int = 1) -> TailEstimate:
    """Fraction of independent L-lists with average squared radius <= nN.

    Samples are split into fixed chunks of ``CHUNK`` lists, chunk ``c`` drawn
    from substream ``(seed, CHUNKS, c)``, so the estimate does not depend on
    ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if L < 1:
        raise ValueError("L must be at least 1")
    sizes = [min(CHUNK, samples - c * CHUNK) for c in range(-(-samples // CHUNK))]
    job = lambda c: _chunk_hits(spec, L, nN, seed, c, sizes[c])
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            hits = sum(ex.map(job, range(len(sizes))))
    else:
        hits = sum(job(c) for c in range(len(sizes)))
    return TailEstimate(spec.kind, spec.n, L, float(nN), samples, hits)


def exponent_fit(estimates: Sequence) -> float:
    """Least-squares slope of -ln p versus n.

    Accepts :class:`TailEstimate` objects or ``(n, p)`` pairs.
    """
    pts = []
    for e in estimates:
        n, p = (e.n, e.p_hat) if isinstance(e, TailEstimate) else e
        if not p > 0:
            raise ValueError(f"zero probability estimate at n={n}")
        pts.append((float(n), -math.log(p)))
    if len(pts) < 3:
        raise ValueError("need at least three estimates")
    n, y = np.array(pts).T
    return float(np.polyfit(n, y, 1)[0])
