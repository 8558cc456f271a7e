"""Random coding with expurgation.

Sample a code, drop codewords outside the power ball, then delete points
until no L-subset has radius at most n*N.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import comb

from .ensembles import EnsembleSpec, sample
from .geometry import Code, GeometryError, PackingParams, lists_within, verify_packing
from .montecarlo import chi2_cdf, chi2_sf

log = logging.getLogger(__name__)

DEFAULT_M_CAP = 2**14


@dataclass(frozen=True)
class ExpurgationReport:
    initial_size: int
    power_violations: int
    bad_lists_found: int
    points_removed: int
    final_size: int
    verified: bool
    rate_nats: float
    n: int = 0
    kept: tuple = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("kept")
        if not math.isfinite(d["rate_nats"]):
            d["rate_nats"] = None
        return d


def find_bad_lists(code: Code, L: int, nN: float, notion: str = "average-radius", workers: int = 1):
    """Every L-subset whose radius under ``notion`` is <= nN."""
    return lists_within(code, L, nN, notion, workers)


def greedy_cover(bad_lists, M: int) -> list:
    """Points to delete so that every bad list loses a member.

    Repeatedly deletes the point lying in the most remaining bad lists,
    ties broken towards the lower index.
    """
    if len(bad_lists) == 0:
        return []
    B = np.asarray([tuple(b) for b in bad_lists], dtype=np.int64)
    deg = np.bincount(B.ravel(), minlength=M)
    order = np.argsort(B.ravel(), kind="stable")
    starts = np.searchsorted(B.ravel()[order], np.arange(M + 1))
    member_of = order // B.shape[1]
    alive = np.ones(len(B), dtype=bool)
    removed = []
    while deg.max() > 0:
        victim = int(np.argmax(deg))
        removed.append(victim)
        hit = member_of[starts[victim]:starts[victim + 1]]
        hit = hit[alive[hit]]
        alive[hit] = False
        np.subtract.at(deg, B[hit].ravel(), 1)
    return removed


def expurgate(code: Code, params: PackingParams, workers: int = 1):
    """Delete power violators and then one point per bad list (greedy).

    Returns ``(surviving_code, report)``; the surviving code is ``None``
    when everything was removed.
    """
    if code.n != params.n:
        raise GeometryError(f"code dimension {code.n} != params.n {params.n}")
    X = code.points
    idx = np.arange(code.M)
    if params.P is not None:
        within = code.sq_norms <= params.n * params.P * (1 + code.norm_rtol)
        idx = idx[within]
    power_violations = code.M - len(idx)
    P = params.P if params.P is not None else code.power_limit

    bad = []
    removed = []
    if len(idx) >= params.L:
        sub = Code(X[idx], P)
        bad = find_bad_lists(sub, params.L, params.nN, params.notion, workers)
        removed = greedy_cover([w.indices for w in bad], sub.M)
    keep_local = np.setdiff1d(np.arange(len(idx)), removed)
    kept = idx[keep_local]
    final = Code(X[kept], P) if len(kept) else None
    verified = final is not None and verify_packing(final, params, workers).ok
    report = ExpurgationReport(
        initial_size=code.M,
        power_violations=power_violations,
        bad_lists_found=len(bad),
        points_removed=len(removed),
        final_size=len(kept),
        verified=verified,
        rate_nats=math.log(len(kept)) / code.n if len(kept) else -math.inf,
        n=code.n,
        kept=tuple(int(i) for i in kept),
    )
    if final is None:
        log.warning("expurgation removed every codeword")
    return final, report


def initial_size(n: int, rate_nats: float, M_cap: int = DEFAULT_M_CAP) -> int:
    """min(ceil(e^{n R}), M_cap)."""
    if rate_nats < 0:
        raise ValueError("rate must be non-negative")
    # guard against e^{nR} landing a hair above an integer
    v = n * rate_nats
    M = math.ceil(math.exp(v) - 1e-9) if v < 700 else M_cap
    return max(1, min(M, M_cap))


def construct(spec: EnsembleSpec, params: PackingParams, rate_nats: float, M_cap: int = DEFAULT_M_CAP,
              workers: int = 1):
    """Sample ``min(ceil(e^{nR}), M_cap)`` codewords and expurgate."""
    if spec.n != params.n:
        raise GeometryError(f"ensemble dimension {spec.n} != params.n {params.n}")
    if not params.below_plotkin:
        log.warning("N/P = %g is at or beyond the Plotkin point %g; expect a tiny code",
                    params.N / params.P, (params.L - 1) / params.L)
    M = initial_size(params.n, rate_nats, M_cap)
    return expurgate(sample(spec, M, workers), params, workers)


def expected_removals(eps: float, n: int, L: int, P: float, N: float, M: int) -> float:
    """Expected number of deletions for a Gaussian code of variance P/(1+eps):
    M P[norm^2 > nP] plus C(M, L) P[avg-rad^2 <= nN], the latter being
    the average-radius bad-list probability."""
    pv = chi2_sf(n, n * (1.0 + eps))
    pb = chi2_cdf((L - 1) * n, L * n * N * (1.0 + eps) / P)
    return M * pv + float(comb(M, L, exact=False)) * pb


def choose_eps(n: int, L: int, P: float, N: float, M: int) -> float:
    """Variance back-off eps minimizing :func:`expected_removals`.

    A smaller variance trades power violations for more bad lists; the
    optimum moves to 0 as n grows at fixed rate.
    """
    hi = (L - 1) * P / (L * N) - 1.0
    if hi <= 0:
        return 0.0
    res = minimize_scalar(lambda e: expected_removals(e, n, L, P, N, M), bounds=(0.0, hi), method="bounded",
                          options={"xatol": 1e-6})
    return float(res.x) if res.fun < expected_removals(0.0, n, L, P, N, M) else 0.0
