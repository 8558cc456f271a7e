"""Seedable samplers for random code ensembles.

Every random draw comes from a Philox-4x64 counter-based generator keyed by
``SeedSequence(seed, spawn_key=(stream, index))``.  Rows of a sampled code
use ``stream=ROWS`` and ``index=row``, so row ``i`` is the same whatever
``M`` is and however the rows are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import betainc

from .geometry import Code

KINDS = ("gaussian", "sphere", "ball", "truncated-gaussian")

# Stream identifiers for substream keys.
ROWS, CHUNKS, CAP_ROWS, COVER, PROBE = 0, 1, 2, 3, 4


def substream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream, index)``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    power: float
    seed: int = 0
    shell_delta: Optional[float] = None
    # variance factor 1/(1+eps) for the gaussian ensemble; 0 means variance = power
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.power > 0:
            raise ValueError("power must be positive")
        if self.kind == "truncated-gaussian":
            if self.shell_delta is None or not self.shell_delta > 0:
                raise ValueError("truncated-gaussian needs shell_delta > 0")
        elif self.shell_delta is not None:
            raise ValueError("shell_delta only applies to truncated-gaussian")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @property
    def power_limit(self) -> Optional[float]:
        """Power limit certified by construction, if any."""
        return self.power if self.kind in ("sphere", "ball", "truncated-gaussian") else None


def _unit_directions(rng, count, n):
    z = rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def draw(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` independent vectors from the ensemble, using ``rng``."""
    n, P = spec.n, spec.power
    if spec.kind == "gaussian":
        return rng.standard_normal((count, n)) * math.sqrt(P / (1.0 + spec.eps))
    if spec.kind == "sphere":
        return _unit_directions(rng, count, n) * math.sqrt(n * P)
    if spec.kind == "ball":
        u = _unit_directions(rng, count, n)
        r = rng.random(count) ** (1.0 / n)
        return u * (r * math.sqrt(n * P))[:, None]
    return _draw_shell(rng, count, n, P, spec.shell_delta)


def shell_acceptance(n: int, power: float, delta: float) -> float:
    """Large-n acceptance probability delta / (2 P sqrt(pi n)) of the
    truncated-gaussian rejection step."""
    return delta / (2.0 * power * math.sqrt(math.pi * n))


def _draw_shell(rng, count, n, P, delta):
    out = np.empty((count, n))
    filled = 0
    batch = max(16, int(2 * count / max(shell_acceptance(n, P, delta), 1e-6)))
    batch = min(batch, max(16, 2**22 // n))
    while filled < count:
        x = rng.standard_normal((batch, n)) * math.sqrt(P)
        s = np.einsum("ij,ij->i", x, x) - n * P
        ok = x[(s >= -delta) & (s <= 0)]
        take = min(len(ok), count - filled)
        out[filled:filled + take] = ok[:take]
        filled += take
    return out


def _row(spec: EnsembleSpec, i: int) -> np.ndarray:
    return draw(spec, substream(spec.seed, ROWS, i), 1)[0]


def sample(spec: EnsembleSpec, M: int, workers: int = 1) -> Code:
    """Draw an M-point code; row i depends only on (spec, i)."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(lambda i: _row(spec, i), range(M)))
    else:
        rows = [_row(spec, i) for i in range(M)]
    return Code(np.vstack(rows), spec.power_limit)


# --------------------------------------------------------------------------
# Caps


def latitude_cdf(t, n: int, alpha: float):
    """CDF of t = x(1)/sqrt(nP) for x uniform on the cap of angular radius
    ``alpha``; the density is proportional to (1 - t^2)^((n-3)/2)."""
    a = (n - 1) / 2.0
    lo = betainc(a, a, (1.0 + math.cos(alpha)) / 2.0)
    mass = 1.0 - lo
    v = betainc(a, a, (1.0 + np.asarray(t, dtype=float)) / 2.0)
    return np.clip((v - lo) / mass, 0.0, 1.0)


def _latitude_quantile(u, n, alpha, tol=1e-12):
    """Bisection inverse of ``latitude_cdf``."""
    lo = np.full(np.shape(u), math.cos(alpha))
    hi = np.ones(np.shape(u))
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = latitude_cdf(mid, n, alpha) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _cap_points(u, z, n, power, alpha):
    t = _latitude_quantile(u, n, alpha)
    rest = z / np.linalg.norm(z, axis=1, keepdims=True)
    rest *= np.sqrt(np.maximum(1.0 - t * t, 0.0))[:, None]
    return np.column_stack([t, rest]) * math.sqrt(n * power)


def draw_cap(rng, count, n, power, alpha):
    """Uniform points on the cap {x : |x|^2 = nP, x(1) >= sqrt(nP) cos(alpha)}."""
    return _cap_points(rng.random(count), rng.standard_normal((count, n - 1)), n, power, alpha)


def sample_cap(n: int, power: float, alpha: float, M: int, seed: int) -> Code:
    """M points uniform on a spherical cap centered at e_1.

    The latitude is drawn by inverting its CDF (bisection to 1e-12), the
    remaining coordinates uniformly on the sub-sphere.
    """
    if not 0 < alpha <= math.pi:
        raise ValueError("alpha must lie in (0, pi]")
    if n < 2:
        raise ValueError("caps need n >= 2")
    if not power > 0:
        raise ValueError("power must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    u = np.empty(M)
    z = np.empty((M, n - 1))
    for i in range(M):
        rng = substream(seed, CAP_ROWS, i)
        u[i] = rng.random()
        z[i] = rng.standard_normal(n - 1)
    return Code(_cap_points(u, z, n, power, alpha), power)
