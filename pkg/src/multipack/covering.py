"""Random spherical-cap coverings and the double-counting identity behind
the Plotkin bound.

The average-radius version of the Plotkin argument is exact: the mean of
the average squared radius over all L-subsets of a spherical code depends
only on the centroid of the whole code.  Codes confined to a cap have a
centroid bounded away from the origin, which caps their size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, comb

from .ensembles import COVER, PROBE, sample_cap, substream
from .expurgation import expurgate
from .geometry import Code, GeometryError, PackingParams, code_min_radius, exceeds

# Largest covering build_covering will allocate.
MAX_CAPS = 10**7
# Largest C(M, L) enumerated directly by cap_code_identity.
MAX_SUBSETS = 10**6
_PROBE_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class CapCovering:
    n: int
    alpha: float
    centers: np.ndarray
    oversample: float = 1.0

    def __post_init__(self):
        C = np.asarray(self.centers, dtype=float)
        if C.ndim != 2 or C.shape[1] != self.n or len(C) == 0:
            raise GeometryError(f"centers must be a K x {self.n} matrix, got shape {C.shape}")
        if not np.allclose(np.linalg.norm(C, axis=1), 1.0, rtol=0, atol=1e-12):
            raise GeometryError("centers must be unit vectors")
        if not 0 < self.alpha <= math.pi:
            raise GeometryError("alpha must lie in (0, pi]")
        C = np.ascontiguousarray(C)
        C.setflags(write=False)
        object.__setattr__(self, "centers", C)

    @property
    def K(self) -> int:
        return len(self.centers)


def covering_size(n: int, alpha: float, oversample: float) -> int:
    """ceil(oversample * (1/sin alpha)^n)."""
    v = math.log(oversample) - n * math.log(math.sin(alpha))
    if v > math.log(MAX_CAPS):
        raise OverflowError(f"covering would need about e^{v:.1f} caps (limit {MAX_CAPS})")
    return max(1, math.ceil(math.exp(v) - 1e-9))


def cap_fraction(n: int, alpha: float) -> float:
    """Fraction of the unit sphere in S^{n-1} covered by one cap of angular radius alpha."""
    if n < 2:
        raise GeometryError("caps need n >= 2")
    a = (n - 1) / 2.0
    return float(1.0 - betainc(a, a, (1.0 + math.cos(alpha)) / 2.0))


def expected_coverage(n: int, alpha: float, K: int) -> float:
    """Mean covered fraction of K independent uniform caps, 1 - (1 - f)^K."""
    return float(-math.expm1(K * math.log1p(-cap_fraction(n, alpha))))


def oversample_for(n: int, alpha: float, coverage: float) -> float:
    """Smallest oversample whose expected coverage reaches ``coverage``."""
    K = math.ceil(math.log1p(-coverage) / math.log1p(-cap_fraction(n, alpha)))
    return K * math.sin(alpha) ** n


def build_covering(n: int, alpha: float, oversample: float = 1.0, seed: int = 0) -> CapCovering:
    """K independent uniform cap centers, K = ceil(oversample (1/sin alpha)^n).

    Center ``k`` is drawn from substream ``(seed, COVER, k)``.
    """
    if n < 2:
        raise GeometryError("caps need n >= 2")
    if not 0 < alpha <= math.pi / 2:
        raise GeometryError("build_covering needs 0 < alpha <= pi/2")
    if not oversample >= 1:
        raise GeometryError("oversample must be at least 1")
    K = covering_size(n, alpha, oversample)
    centers = np.empty((K, n))
    for k in range(K):
        z = substream(seed, COVER, k).standard_normal(n)
        centers[k] = z / np.linalg.norm(z)
    return CapCovering(n, alpha, centers, oversample)


def coverage_fraction(cov: CapCovering, samples: int, seed: int = 0) -> float:
    """Fraction of uniform sphere samples within angle alpha of some center."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    cos_a = math.cos(cov.alpha) - 1e-12
    hits = 0
    for c, start in enumerate(range(0, samples, _PROBE_CHUNK)):
        count = min(_PROBE_CHUNK, samples - start)
        y = substream(seed, PROBE, c).standard_normal((count, cov.n))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        hits += int(np.count_nonzero((y @ cov.centers.T).max(axis=1) >= cos_a))
    return hits / samples


# --------------------------------------------------------------------------
# Double counting


def _sphere_power(code: Code, P=None, rtol: float = 1e-9) -> float:
    if P is None:
        P = code.power_limit
    if P is None:
        P = float(code.sq_norms.mean()) / code.n
    nP = code.n * P
    if not np.allclose(code.sq_norms, nP, rtol=rtol, atol=0):
        raise GeometryError(f"rows are not on the sphere of squared radius {nP}")
    return float(P)


def _subset_mean_enumerated(X: np.ndarray, L: int) -> float:
    """Mean over all L-subsets of the average squared radius, listing them
    level by level; each subset is scored as mean norm^2 - |centroid|^2."""
    M = len(X)
    norms = np.einsum("ij,ij->i", X, X)
    last = np.arange(M)
    sums = X.copy()
    nsum = norms.copy()
    for _ in range(L - 1):
        reps = M - 1 - last
        rows = np.repeat(np.arange(len(last)), reps)
        offs = np.arange(len(rows)) - np.repeat(np.cumsum(reps) - reps, reps)
        nxt = last[rows] + 1 + offs
        sums = sums[rows] + X[nxt]
        nsum = nsum[rows] + norms[nxt]
        last = nxt
    r = nsum / L - np.einsum("ij,ij->i", sums, sums) / L**2
    return float(r.mean())


def _subset_mean_pairwise(X: np.ndarray, L: int) -> float:
    """Same mean from the pair sum: each pair lies in a fraction
    L(L-1)/(M(M-1)) of the subsets and avg-rad^2 = sum_{i<j} d_ij^2 / L^2."""
    M = len(X)
    pair_sum = 0.0
    for i in range(M - 1):
        D = X[i + 1:] - X[i]
        pair_sum += float(np.einsum("ij,ij->", D, D))
    return (L - 1) * pair_sum / (L * M * (M - 1))


def cap_code_identity(code: Code, L: int, P=None, method: str = "auto"):
    """Mean over L-subsets of the average squared radius, and its closed form.

    Returns ``(lhs, rhs)`` with ``rhs = (L-1)/L nP - (L-1)/(L M (M-1)) (M^2 |xbar|^2 - M nP)``.
    ``method`` is ``"enumerate"``, ``"pairwise"`` or ``"auto"`` (enumerate
    when there are at most ``MAX_SUBSETS`` subsets).
    """
    M = code.M
    if not 2 <= L <= M:
        raise GeometryError(f"need 2 <= L <= M, got L={L}, M={M}")
    P = _sphere_power(code, P)
    X = code.points
    if method == "auto":
        method = "enumerate" if comb(M, L, exact=True) <= MAX_SUBSETS else "pairwise"
    if method == "enumerate":
        lhs = _subset_mean_enumerated(X, L)
    elif method == "pairwise":
        lhs = _subset_mean_pairwise(X, L)
    else:
        raise ValueError(f"unknown method {method!r}")
    nP = code.n * P
    xbar = X.mean(axis=0)
    rhs = (L - 1) / L * nP - (L - 1) / (L * M * (M - 1)) * (M * M * float(xbar @ xbar) - M * nP)
    return lhs, rhs


def plotkin_bound(n: int, L: int, P: float, alpha: float, M: int) -> float:
    """(L-1)/L nP sin^2(alpha) (1 + 1/(M-1))."""
    return (L - 1) / L * n * P * math.sin(alpha) ** 2 * (1.0 + 1.0 / (M - 1))


def plotkin_cap_check(code: Code, L: int, alpha: float, P=None, workers: int = 1):
    """Smallest average squared radius over L-subsets of a cap code, compared
    with the Plotkin bound.

    Returns ``(min_avg_rad_sq, bound, ok)``.  The code must lie on the
    sphere of squared radius nP inside the cap of angular radius
    ``alpha <= pi/2`` around e_1.
    """
    if not 0 < alpha <= math.pi / 2:
        raise GeometryError("the centroid argument needs 0 < alpha <= pi/2")
    if not 2 <= L <= code.M:
        raise GeometryError(f"need 2 <= L <= M, got L={L}, M={code.M}")
    P = _sphere_power(code, P)
    r = math.sqrt(code.n * P)
    if np.any(code.points[:, 0] < r * math.cos(alpha) - 1e-9 * r):
        raise GeometryError("code leaves the cap")
    m = code_min_radius(code, L, "average-radius", workers).radius_sq
    bound = plotkin_bound(code.n, L, P, alpha, code.M)
    return m, bound, not exceeds(m, bound)


def plotkin_size_limit(rho: float) -> int:
    """floor(1/rho) + 1: largest size allowed for a cap code that is an
    average-radius packing at N/P = (L-1)/L sin^2(alpha) (1 + rho)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return math.floor(1.0 / rho) + 1


def certified_cap_code(n: int, L: int, alpha: float, rho: float, M: int, seed: int = 0,
                       power: float = 1.0, workers: int = 1):
    """Sample M cap points and expurgate into an average-radius packing at
    N/P = (L-1)/L sin^2(alpha) (1 + rho).  Returns ``(code, report)``."""
    N = power * (L - 1) / L * math.sin(alpha) ** 2 * (1.0 + rho)
    params = PackingParams(n, L, N, power, "average-radius")
    return expurgate(sample_cap(n, power, alpha, M, seed), params, workers)
