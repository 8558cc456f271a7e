import itertools
import math

import numpy as np
import pytest

from multipack.covering import (
    CapCovering,
    build_covering,
    cap_code_identity,
    cap_fraction,
    certified_cap_code,
    coverage_fraction,
    covering_size,
    expected_coverage,
    oversample_for,
    plotkin_bound,
    plotkin_cap_check,
    plotkin_size_limit,
)
from multipack.ensembles import EnsembleSpec, sample, sample_cap
from multipack.geometry import Code, GeometryError, avg_sq_radius


def test_covering_size_examples():
    assert covering_size(8, math.pi / 3, 4) == math.ceil(4 * (2 / math.sqrt(3)) ** 8) == 13
    assert covering_size(2, math.pi / 3, 1) == 2
    with pytest.raises(OverflowError):
        covering_size(200, 0.1, 1)


def test_build_covering():
    cov = build_covering(8, math.pi / 3, 4, seed=3)
    assert cov.K == 13 and cov.oversample == 4
    assert np.allclose(np.linalg.norm(cov.centers, axis=1), 1.0)
    assert np.array_equal(cov.centers, build_covering(8, math.pi / 3, 4, seed=3).centers)
    with pytest.raises(GeometryError):
        build_covering(8, 2.0, 4)
    with pytest.raises(GeometryError):
        build_covering(8, 1.0, 0.5)


def test_cap_covering_validation():
    with pytest.raises(GeometryError):
        CapCovering(2, 1.0, np.array([[2.0, 0.0]]))
    with pytest.raises(GeometryError):
        CapCovering(3, 1.0, np.array([[1.0, 0.0]]))


def test_antipodal_pair_covers():
    cov = CapCovering(2, math.pi / 2, np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert coverage_fraction(cov, 20_000, seed=1) == 1.0


def test_single_large_cap_misses_antipode():
    cov = CapCovering(2, math.pi - 0.05, np.array([[1.0, 0.0]]))
    f = coverage_fraction(cov, 100_000, seed=2)
    assert f < 1.0
    assert f == pytest.approx(1 - 0.05 / math.pi, abs=3e-3)


def test_cap_fraction_matches_sampling():
    for n, alpha in [(3, 1.0), (8, math.pi / 3), (12, 1.2)]:
        cov = CapCovering(n, alpha, np.eye(n)[:1])
        f = coverage_fraction(cov, 200_000, seed=n)
        p = cap_fraction(n, alpha)
        assert abs(f - p) <= 4 * math.sqrt(p * (1 - p) / 200_000)
    # a hemisphere is half the sphere
    assert cap_fraction(7, math.pi / 2) == pytest.approx(0.5)


def test_random_covering_reaches_target_when_calibrated():
    n, alpha = 8, math.pi / 3
    over = oversample_for(n, alpha, 0.9995)
    cov_ok = 0
    for seed in range(20):
        cov = build_covering(n, alpha, over, seed=seed)
        assert expected_coverage(n, alpha, cov.K) >= 0.9995
        cov_ok += coverage_fraction(cov, 100_000, seed=100 + seed) >= 0.999
    assert cov_ok >= 18


def test_mean_coverage_matches_expectation():
    n, alpha = 8, math.pi / 3
    fr = [coverage_fraction(build_covering(n, alpha, 4, seed=s), 20_000, seed=s) for s in range(20)]
    assert np.mean(fr) == pytest.approx(expected_coverage(n, alpha, 13), abs=0.03)


# --------------------------------------------------------------------------
# double counting


def test_identity_antipodal_pair():
    lhs, rhs = cap_code_identity(Code(np.array([[1.0, 1.0], [-1.0, -1.0]])), 2)
    assert lhs == pytest.approx(2.0) and rhs == pytest.approx(2.0)


def test_identity_single_subset():
    code = sample(EnsembleSpec("sphere", 5, 1.0, seed=2), 4)
    lhs, rhs = cap_code_identity(code, 4)
    assert lhs == pytest.approx(avg_sq_radius(code.points), rel=1e-12)
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_identity_random_code_both_paths():
    code = sample(EnsembleSpec("sphere", 10, 1.0, seed=5), 64)
    a, rhs = cap_code_identity(code, 3, method="enumerate")
    b, _ = cap_code_identity(code, 3, method="pairwise")
    assert abs(a - rhs) <= 1e-9 * (1 + abs(rhs))
    assert abs(b - rhs) <= 1e-9 * (1 + abs(rhs))


def test_identity_enumeration_against_itertools():
    code = sample(EnsembleSpec("sphere", 4, 2.0, seed=6), 9)
    want = np.mean([avg_sq_radius(code.points[list(S)]) for S in itertools.combinations(range(9), 4)])
    assert cap_code_identity(code, 4, method="enumerate")[0] == pytest.approx(want, rel=1e-12)


def test_identity_preconditions():
    with pytest.raises(GeometryError):
        cap_code_identity(Code(np.array([[1.0, 0.0], [2.0, 0.0]])), 2)
    with pytest.raises(GeometryError):
        cap_code_identity(sample(EnsembleSpec("sphere", 3, 1.0), 3), 4)
    with pytest.raises(ValueError):
        cap_code_identity(sample(EnsembleSpec("sphere", 3, 1.0), 3), 2, method="magic")


def test_plotkin_cap_check_random_codes():
    for seed in range(20):
        code = sample_cap(12, 1.0, math.pi / 3, 32, seed)
        for L in (2, 3, 4):
            m, bound, ok = plotkin_cap_check(code, L, math.pi / 3)
            assert ok and m <= bound
            assert bound == pytest.approx(plotkin_bound(12, L, 1.0, math.pi / 3, 32))


def test_plotkin_hemisphere_bound():
    code = sample_cap(6, 1.0, math.pi / 2, 10, 1)
    _, bound, ok = plotkin_cap_check(code, 3, math.pi / 2)
    assert ok and bound == pytest.approx(2 / 3 * 6 * (1 + 1 / 9))


def test_plotkin_single_subset_reduces_to_identity():
    code = sample_cap(7, 1.0, 1.0, 3, 4)
    m, bound, ok = plotkin_cap_check(code, 3, 1.0)
    assert m == pytest.approx(cap_code_identity(code, 3)[1], rel=1e-12) and ok


def test_plotkin_preconditions():
    code = sample_cap(5, 1.0, 1.0, 6, 0)
    with pytest.raises(GeometryError):
        plotkin_cap_check(code, 2, 0.5)
    with pytest.raises(GeometryError):
        plotkin_cap_check(code, 2, 2.0)


@pytest.mark.parametrize("rho", [0.5, 1.0])
@pytest.mark.parametrize("L", [2, 3])
def test_certified_cap_codes_obey_size_limit(rho, L):
    for seed in range(5):
        code, rep = certified_cap_code(6, L, math.pi / 2, rho, 40, seed)
        assert rep.verified
        assert rep.final_size <= plotkin_size_limit(rho)
