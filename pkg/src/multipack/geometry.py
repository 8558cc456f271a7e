"""Radius computations, packing verification and list decoding.

All radii are squared and expressed in squared-norm units, i.e. on the
scale ``n * power``.  Divide by ``n`` for per-dimension values.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import nnls

Notion = Literal["chebyshev", "average-radius", "max-to-centroid"]
NOTIONS = ("chebyshev", "average-radius", "max-to-centroid")

AVG_FORMS = ("definition", "norm-minus-centroid", "power-minus-correlation", "pairwise")

# Relative slack used when comparing a radius with a threshold n*N.
RADIUS_RTOL = 1e-12
# Boundary tolerance of the enclosing-ball recursion.
BALL_TOL = 1e-12
# Relative margin on pruning bounds; covers rounding between bound and radius.
_PRUNE_RTOL = 1e-9


class GeometryError(ValueError):
    pass


def _as_list(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise GeometryError(f"expected a list of points, got array of shape {X.shape}")
    if X.shape[0] == 0:
        raise GeometryError("empty list of points")
    if not np.all(np.isfinite(X)):
        raise GeometryError("non-finite coordinates")
    return X


def _stack(points) -> np.ndarray:
    """Stack a sequence of points, rejecting ragged input."""
    if isinstance(points, np.ndarray):
        return _as_list(points)
    rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    if not rows:
        raise GeometryError("empty list of points")
    dims = {r.shape for r in rows}
    if len(dims) != 1:
        raise GeometryError(f"dimension mismatch among points: {sorted(d[0] for d in dims)}")
    return _as_list(np.stack(rows))


def exceeds(radius_sq: float, threshold: float) -> bool:
    """True when ``radius_sq`` is strictly larger than ``threshold``.

    Values within ``RADIUS_RTOL`` of the threshold count as equal, hence as
    not exceeding it.
    """
    return radius_sq > threshold + RADIUS_RTOL * max(abs(threshold), abs(radius_sq), 1e-300)


# --------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True, eq=False)
class Code:
    """A finite point set in R^n, optionally constrained to the ball of
    squared radius ``n * power_limit``."""

    points: np.ndarray
    power_limit: Optional[float] = None
    norm_rtol: float = 1e-9

    def __post_init__(self):
        X = np.asarray(self.points, dtype=float)
        if X.ndim != 2 or X.shape[1] == 0:
            raise GeometryError(f"code points must be an M x n matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise GeometryError("code has non-finite coordinates")
        X = np.ascontiguousarray(X)
        X.setflags(write=False)
        object.__setattr__(self, "points", X)
        if len(X) > 1 and len(np.unique(X, axis=0)) != len(X):
            raise GeometryError("code has duplicate rows")
        if self.power_limit is not None:
            P = float(self.power_limit)
            if not P > 0:
                raise GeometryError("power_limit must be positive")
            object.__setattr__(self, "power_limit", P)
            bad = np.flatnonzero(self.sq_norms > self.n * P * (1 + self.norm_rtol))
            if bad.size:
                raise GeometryError(f"rows {bad[:10].tolist()} violate the power constraint n*P = {self.n * P}")

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def M(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.M

    @property
    def sq_norms(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.points, self.points)

    @property
    def rate(self) -> float:
        """ln(M) / n in nats per dimension."""
        return float(np.log(self.M) / self.n) if self.M else float("-inf")

    def subset(self, rows) -> "Code":
        return Code(self.points[np.asarray(rows, dtype=int)], self.power_limit, self.norm_rtol)

    def __eq__(self, other):
        if not isinstance(other, Code):
            return NotImplemented
        return self.power_limit == other.power_limit and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Code(M={self.M}, n={self.n}, power_limit={self.power_limit})"


@dataclass(frozen=True)
class ListWitness:
    indices: tuple
    radius_sq: float
    center: np.ndarray = field(repr=False)
    notion: str

    def check(self, code: Code, rtol: float = 1e-9) -> bool:
        """Recompute the radius of the indexed list and compare."""
        X = code.points[list(self.indices)]
        r = list_sq_radius(X, self.notion)
        return abs(r - self.radius_sq) <= rtol * max(abs(r), 1e-300) or abs(r - self.radius_sq) < 1e-300


@dataclass(frozen=True)
class PackingParams:
    n: int
    L: int
    N: float
    P: Optional[float] = None
    notion: str = "chebyshev"

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("n must be positive")
        if self.L < 2:
            raise GeometryError("L must be at least 2")
        if not self.N > 0:
            raise GeometryError("N must be positive")
        if self.P is not None and not self.P > 0:
            raise GeometryError("P must be positive")
        if self.notion not in ("chebyshev", "average-radius"):
            raise GeometryError(f"unknown notion {self.notion!r}")

    @property
    def nN(self) -> float:
        return self.n * self.N

    @property
    def below_plotkin(self) -> bool:
        return self.P is None or self.N / self.P < (self.L - 1) / self.L


# --------------------------------------------------------------------------
# Radii of a single list


def centroid(points) -> np.ndarray:
    return _stack(points).mean(axis=0)


def avg_sq_radius(points, form: str = "definition") -> float:
    """Average squared distance from the points to their centroid.

    ``form`` selects one of four algebraically equal expressions; they are
    kept separate so they can be checked against each other.
    """
    X = _stack(points)
    L = X.shape[0]
    if form == "definition":
        D = X - X.mean(axis=0)
        return float(np.einsum("ij,ij->", D, D) / L)
    if form == "norm-minus-centroid":
        c = X.mean(axis=0)
        return float(np.einsum("ij,ij->", X, X) / L - c @ c)
    if form == "power-minus-correlation":
        G = X @ X.T
        tr = np.trace(G)
        off = G.sum() - tr
        return float((L - 1) * tr / L**2 - off / L**2)
    if form == "pairwise":
        D = X[:, None, :] - X[None, :, :]
        return float(np.einsum("ijk,ijk->", D, D) / (2 * L**2))
    raise GeometryError(f"unknown form {form!r}; expected one of {AVG_FORMS}")


def max_sq_radius(points) -> float:
    X = _stack(points)
    D = X - X.mean(axis=0)
    return float(np.max(np.einsum("ij,ij->i", D, D)))


def _circumcenter(S: np.ndarray) -> np.ndarray:
    """Center of the smallest sphere through the rows of S, within their
    affine hull."""
    p0 = S[0]
    if len(S) == 1:
        return p0.copy()
    A = S[1:] - p0
    G = A @ A.T
    b = 0.5 * np.diag(G)
    try:
        y = np.linalg.solve(G, b)
        if not np.all(np.isfinite(y)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(G, b, rcond=None)[0]
    return p0 + y @ A


def _circum_weights(S: np.ndarray):
    """Barycentric weights of the circumcenter of affinely independent rows,
    or None when the rows are (numerically) dependent."""
    A = S[1:] - S[0]
    G = A @ A.T
    try:
        y = np.linalg.solve(G, 0.5 * np.diag(G))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(y)) or np.linalg.cond(G) > 1e12:
        return None
    return np.concatenate([[1.0 - y.sum()], y])


def _ball_active_set(X: np.ndarray, max_iter: int = 64):
    """Smallest enclosing ball by dropping points with negative barycentric
    weight and adding violated points.

    Returns ``(center, radius_sq, active, weights)`` or None if it stalls.
    """
    act = list(range(len(X)))
    seen = set()
    for _ in range(max_iter):
        key = tuple(sorted(act))
        if key in seen:
            return None
        seen.add(key)
        if len(act) == 1:
            w = np.ones(1)
            c = X[act[0]].copy()
        else:
            w = _circum_weights(X[act])
            if w is None:
                return None
            if np.min(w) < 0:
                act.pop(int(np.argmin(w)))
                continue
            c = w @ X[act]
        d = X - c
        dist = np.einsum("ij,ij->i", d, d)
        r2 = float(np.max(dist[act]))
        far = int(np.argmax(dist))
        if dist[far] <= r2 + BALL_TOL * max(1.0, r2):
            return c, float(np.max(dist)), act, w
        act.append(far)
    return None


def _welzl(X: np.ndarray, dim: int):
    """Move-to-front smallest enclosing ball of the rows of X."""

    def ball(R):
        if not R:
            return None, -1.0
        S = X[R]
        c = _circumcenter(S)
        d = S - c
        return c, float(np.max(np.einsum("ij,ij->i", d, d)))

    def inside(c, r2, p):
        if c is None:
            return False
        d = X[p] - c
        return float(d @ d) <= r2 + BALL_TOL * max(1.0, r2)

    def mtf(order, R):
        c, r2 = ball(R)
        if len(R) == dim + 1:
            return c, r2
        i = 0
        while i < len(order):
            p = order[i]
            if not inside(c, r2, p):
                c, r2 = mtf(order[:i], R + [p])
                order.insert(0, order.pop(i))
            i += 1
        return c, r2

    return mtf(list(range(len(X))), [])


def _certified(X: np.ndarray, c: np.ndarray, r2: float) -> bool:
    """Containment plus optimality: the center must be a convex combination
    of the points on the boundary."""
    d = X - c
    dist = np.einsum("ij,ij->i", d, d)
    slack = 1e-9 * max(1.0, r2)
    if np.any(dist > r2 + slack):
        return False
    T = X[dist >= r2 - slack]
    if len(T) == 0:
        return False
    A = np.vstack([T.T, np.ones(len(T))])
    b = np.concatenate([c, [1.0]])
    _, resid = nnls(A, b)
    scale = max(1.0, float(np.max(np.abs(T))))
    return resid <= 1e-7 * scale


def _certified_weights(X, c, r2, act, w) -> bool:
    """Cheap form of `_certified` when the convex weights are known."""
    d = X - c
    dist = np.einsum("ij,ij->i", d, d)
    slack = 1e-9 * max(1.0, r2)
    if np.any(dist > r2 + slack) or np.any(dist[act] < r2 - slack):
        return False
    scale = max(1.0, float(np.max(np.abs(X))))
    return bool(np.all(w >= 0)) and float(np.max(np.abs(w @ X[act] - c))) <= 1e-7 * scale


def _ball_by_supports(X: np.ndarray, dim: int):
    """Exhaustive search over support sets; slow but direct."""
    best = (None, np.inf)
    idx = range(len(X))
    for k in range(1, min(len(X), dim + 1) + 1):
        for S in itertools.combinations(idx, k):
            c = _circumcenter(X[list(S)])
            d = X - c
            r2 = float(np.max(np.einsum("ij,ij->i", d, d)))
            if r2 < best[1] and _certified(X, c, r2):
                best = (c, r2)
    return best


def cheb_sq_radius(points):
    """Squared radius and center of the smallest ball containing the points.

    Returns
    -------
    (radius_sq, center)
    """
    X = _stack(points)
    origin = X.mean(axis=0)
    if len(X) <= 2:
        d = X[0] - origin
        return float(d @ d), origin
    Y = X - origin
    # The optimal center lies in the affine hull; work in its coordinates.
    if len(Y) > 1:
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
        rank = int(np.sum(s > s[0] * 1e-13)) if s[0] > 0 else 0
        B = Vt[:rank]
    else:
        B = np.zeros((0, X.shape[1]))
    if B.shape[0] == 0:
        return 0.0, origin.copy()
    Z = Y @ B.T
    res = _ball_active_set(Z)
    if res is not None and _certified_weights(Z, *res):
        res = res[:2]
    else:
        res = _welzl(Z, Z.shape[1])
        if not _certified(Z, *res):
            res = _ball_by_supports(Z, Z.shape[1])
    c, r2 = res
    center = origin + c @ B
    d = X - center
    return float(np.max(np.einsum("ij,ij->i", d, d))), center


def list_sq_radius(points, notion: str) -> float:
    if notion == "chebyshev":
        return cheb_sq_radius(points)[0]
    if notion == "average-radius":
        return avg_sq_radius(points)
    if notion == "max-to-centroid":
        return max_sq_radius(points)
    raise GeometryError(f"unknown notion {notion!r}")


def _witness(X: np.ndarray, indices, notion: str) -> ListWitness:
    P = X[list(indices)]
    if notion == "chebyshev":
        r, c = cheb_sq_radius(P)
    else:
        r, c = list_sq_radius(P, notion), P.mean(axis=0)
    return ListWitness(tuple(int(i) for i in indices), r, c, notion)


# --------------------------------------------------------------------------
# Subset search with pairwise-sum pruning


def _pair_lower_bounds(acc, mx, L, notion):
    """Certified lower bound on the radius of any completion of a partial list."""
    lb = acc / L**2
    if notion != "average-radius":
        lb = np.maximum(lb, mx / 4.0)
    return lb


def _search(X, L, notion, limit, collect, leads=None):
    """Depth-first scan of L-subsets in lexicographic order.

    ``collect=False``: return the lexicographically first minimizer as
    ``(radius, indices)``, pruning against the incumbent and ``limit``.
    ``collect=True``: return all subsets with radius <= ``limit``.
    """
    M = len(X)
    best = [np.inf, None]
    found = []

    def bound():
        return limit if collect else min(limit, best[0])

    def keep_mask(lb):
        b = bound()
        return lb <= b + _PRUNE_RTOL * max(abs(b), 1e-300) if np.isfinite(b) else np.ones(lb.shape, bool)

    def leaf(prefix):
        if collect:
            w = _witness(X, prefix, notion)
            if not exceeds(w.radius_sq, limit):
                found.append(w)
            return
        r = list_sq_radius(X[list(prefix)], notion)
        if r < best[0]:
            best[0], best[1] = r, tuple(prefix)

    def d2(c, cand):
        D = X[cand] - X[c]
        return np.einsum("ij,ij->i", D, D)

    def leaves(prefix, cand):
        lists = np.concatenate([np.broadcast_to(X[prefix], (len(cand), len(prefix), X.shape[1])),
                                X[cand][:, None, :]], axis=1)
        ctr = lists.mean(axis=1)
        D = lists - ctr[:, None, :]
        dist = np.einsum("cln,cln->cl", D, D)
        if notion == "average-radius" or (notion == "chebyshev" and L == 2):
            r = dist.mean(axis=1)
        elif notion == "max-to-centroid":
            r = dist.max(axis=1)
        else:
            for c in cand:
                leaf(prefix + [c])
            return
        for c, rc, cc in zip(cand, r, ctr):
            if not exceeds(rc, limit):
                found.append(ListWitness(tuple(int(i) for i in prefix) + (int(c),), float(rc), cc, notion))

    def rec(prefix, S, cand, acc, mx):
        depth = len(prefix)
        if depth == L:
            leaf(prefix)
            return
        need = L - depth
        if collect and need == 1:
            keep = keep_mask(_pair_lower_bounds(acc, mx, L, notion))
            leaves(prefix, cand[keep])
            return
        for pos in range(len(cand) - need + 1):
            c = cand[pos]
            if not keep_mask(_pair_lower_bounds(acc[pos:pos + 1], mx[pos:pos + 1], L, notion))[0]:
                continue
            rest = cand[pos + 1:]
            if depth + 1 == L:
                leaf(prefix + [c])
                continue
            dd = d2(c, rest)
            nacc = acc[pos] + (acc[pos + 1:] - S) + dd
            nmx = np.maximum(np.maximum(mx[pos + 1:], dd), mx[pos])
            keep = keep_mask(_pair_lower_bounds(nacc, nmx, L, notion))
            if np.count_nonzero(keep) < need - 1:
                continue
            rec(prefix + [c], acc[pos], rest[keep], nacc[keep], nmx[keep])

    if leads is None:
        leads = range(M - L + 1)
    for i in leads:
        if L == 1:
            leaf([i])
            continue
        rest = np.arange(i + 1, M)
        dd = d2(i, rest)
        keep = keep_mask(_pair_lower_bounds(dd, dd, L, notion))
        if np.count_nonzero(keep) < L - 1:
            continue
        rec([i], 0.0, rest[keep], dd[keep], dd[keep])
    return found if collect else (best[0], best[1])


def _partition(M, L, workers):
    leads = list(range(M - L + 1))
    return [leads[w::workers] for w in range(workers)]


def code_min_radius(code: Code, L: int, notion: str = "chebyshev", workers: int = 1) -> ListWitness:
    """The L-subset of ``code`` with the smallest radius.

    Enumeration is exhaustive with a sound pruning rule: a partial list is
    abandoned only when a certified lower bound (pairwise-sum form of the
    average radius, plus the half-diameter for the other notions) exceeds
    the best radius found so far.  Among minimizers the lexicographically
    smallest index tuple wins, radii within ``RADIUS_RTOL`` counting as
    equal.  ``workers > 1`` splits the scan by leading
    index; the result does not depend on the split.
    """
    if notion not in NOTIONS:
        raise GeometryError(f"unknown notion {notion!r}")
    X = code.points
    if code.M < L:
        raise GeometryError(f"code has {code.M} points, fewer than L={L}")
    if workers <= 1:
        r, idx = _search(X, L, notion, np.inf, collect=False)
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda leads: _search(X, L, notion, np.inf, False, leads),
                                _partition(code.M, L, workers)))
        r, idx = min((p for p in parts if p[1] is not None), key=lambda p: (p[0], p[1]))
    # radii of congruent lists can differ in the last bits; treat those as ties
    ties = _search(X, L, notion, r, collect=True, leads=range(idx[0] + 1))
    return _witness(X, ties[0].indices if ties else idx, notion)


def brute_force_min_radius(code: Code, L: int, notion: str = "chebyshev") -> ListWitness:
    """Unpruned reference enumeration over all L-subsets."""
    X = code.points
    radii = {S: list_sq_radius(X[list(S)], notion) for S in itertools.combinations(range(code.M), L)}
    best = min(radii.values())
    arg = next(S for S, r in radii.items() if not exceeds(r, best))
    return _witness(X, arg, notion)


def lists_within(code: Code, L: int, nN: float, notion: str, workers: int = 1) -> list:
    """All L-subsets whose radius is at most ``nN`` (boundary included)."""
    if code.M < L:
        return []
    X = code.points
    if workers <= 1:
        found = _search(X, L, notion, nN, collect=True)
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = ex.map(lambda leads: _search(X, L, notion, nN, True, leads),
                           _partition(code.M, L, workers))
            found = sorted((f for p in parts for f in p), key=lambda w: w.indices)
    return found


# --------------------------------------------------------------------------
# Packings


class PackingVerdict(NamedTuple):
    ok: bool
    witness: Optional[ListWitness]
    norm_violations: tuple = ()


def verify_packing(code: Code, params: PackingParams, workers: int = 1) -> PackingVerdict:
    """Check that every L-subset has radius strictly larger than n*N."""
    if code.n != params.n:
        raise GeometryError(f"code dimension {code.n} != params.n {params.n}")
    viol = ()
    if params.P is not None:
        viol = tuple(int(i) for i in np.flatnonzero(code.sq_norms > params.n * params.P * (1 + code.norm_rtol)))
    if code.M < params.L:
        return PackingVerdict(not viol, None, viol)
    w = code_min_radius(code, params.L, params.notion, workers)
    ok = exceeds(w.radius_sq, params.nN)
    return PackingVerdict(ok and not viol, None if ok else w, viol)


def list_decode(code: Code, y, N: float) -> np.ndarray:
    """Indices of codewords within squared distance n*N of ``y``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (code.n,):
        raise GeometryError(f"received word has shape {y.shape}, code dimension is {code.n}")
    d = code.points - y
    return np.flatnonzero(np.einsum("ij,ij->i", d, d) <= code.n * N)


def lift_ball_to_sphere(code: Code) -> Code:
    """Append sqrt((n+1)P - |x|^2) to each row, landing on the sphere of
    squared radius (n+1)P in one more dimension."""
    if code.power_limit is None:
        raise GeometryError("lifting needs a code with a power limit")
    P, n = code.power_limit, code.n
    extra = (n + 1) * P - code.sq_norms
    if np.any(extra < 0):
        raise GeometryError("a row violates the power constraint")
    return Code(np.column_stack([code.points, np.sqrt(extra)]), P)


def min_pairwise_sq_distance(X: np.ndarray) -> float:
    X = np.asarray(X, dtype=float)
    best = np.inf
    for i in range(len(X) - 1):
        D = X[i + 1:] - X[i]
        best = min(best, float(np.min(np.einsum("ij,ij->i", D, D))))
    return best


def bf_multipack_floor(code: Code, L: int) -> float:
    """Guaranteed average-radius floor ((L-1)/(2L)) * d_min^2 of a packing
    with minimum distance d_min."""
    if code.M < 2:
        raise GeometryError("need at least two points")
    return (L - 1) / (2 * L) * min_pairwise_sq_distance(code.points)
