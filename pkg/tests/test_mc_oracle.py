from fractions import Fraction as F

import numpy as np
import pytest

from detmoments.exact_arith import to_bigfloat
from detmoments.mc_oracle import (DensityMatrix, det_pair, det_pt_samples,
                                  empirical_cdf_distance, partial_transpose, run_mc, sample_hs,
                                  sample_hs_batch)
from detmoments.moments import MomentFamily
from detmoments.reconstruct import cdf, reconstruct_family


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def bell_projector():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.mark.parametrize("field", ["real", "complex"])
def test_samples_are_density_matrices(field):
    rho = sample_hs_batch(field, 500, rng())
    assert rho.shape == (500, 4, 4)
    assert np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)))
    assert np.allclose(np.trace(rho, axis1=1, axis2=2), 1, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    if field == "real":
        assert rho.dtype == np.float64
    m = sample_hs(field, rng(1))
    assert isinstance(m, DensityMatrix) and m.field == field
    assert 0 <= m.det <= 1 / 256


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3) / 3, "real")
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4) / 2, "real")
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5, 0.5, -0.5]), "real")
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1j
    with pytest.raises(ValueError):
        DensityMatrix(bad, "complex")


def test_partial_transpose_examples():
    prod = np.kron(np.diag([0.3, 0.7]), np.diag([0.6, 0.4]))
    assert np.array_equal(partial_transpose(prod), prod)
    b = bell_projector()
    pt = partial_transpose(b)
    assert np.linalg.det(pt) == pytest.approx(-1 / 16, abs=1e-15)
    assert np.trace(pt) == pytest.approx(1)
    assert np.allclose(pt, pt.conj().T)
    # explicit index rule ((i,j),(k,l)) -> ((i,l),(k,j))
    m = rng().standard_normal((4, 4))
    t = partial_transpose(m)
    for i, j, k, l in np.ndindex(2, 2, 2, 2):
        assert t[2 * i + j, 2 * k + l] == m[2 * i + l, 2 * k + j]
    assert np.array_equal(partial_transpose(partial_transpose(m)), m)
    with pytest.raises(ValueError):
        partial_transpose(m, "C")


def test_partial_transposes_share_determinant():
    rho = sample_hs_batch("complex", 200, rng(3))
    a = np.linalg.det(partial_transpose(rho, "A"))
    b = np.linalg.det(partial_transpose(rho, "B"))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-18)
    assert np.allclose(partial_transpose(rho[0]), partial_transpose(rho)[0])
    assert np.allclose(partial_transpose(DensityMatrix(rho[0], "complex")), partial_transpose(rho[0]))


def test_determinants_lie_in_supports():
    d, dpt = det_pair(sample_hs_batch("complex", 20000, rng(4)))
    assert d.min() >= -1e-18 and d.max() <= 1 / 256
    assert dpt.min() >= -1 / 16 and dpt.max() <= 1 / 256


def test_run_mc_is_deterministic_and_worker_independent():
    a = run_mc("complex", 30000, 11, chunk_size=7000)
    b = run_mc("complex", 30000, 11, chunk_size=7000)
    c = run_mc("complex", 30000, 11, chunk_size=7000, workers=3)
    assert a.to_dict() == b.to_dict() == c.to_dict()
    d = run_mc("complex", 30000, 12, chunk_size=7000)
    assert d.to_dict() != a.to_dict()


def test_run_mc_stats_shape():
    s = run_mc("real", 20000, 5, moment_orders=(1, 4), bins=50, chunk_size=6000)
    assert s.n_samples == 20000
    assert sum(s.histogram_counts) == 20000
    assert len(s.histogram_edges) == 51
    assert [n for n, *_ in s.empirical_moments_pt] == [1, 4]
    assert 0 <= s.sep_fraction <= 1
    assert s.sep_fraction == to_bigfloat(F(s.sep_count, 20000), 128)
    assert s.sep_fraction.precision == 128
    assert set(s.moments) == {"pt", "det", "balanced"}
    assert s.empirical_moments_det[0][2] > 0
    assert len(s.empirical_moments_balanced) == 2
    d = s.to_dict()
    assert d["alpha"] == "1/2" and d["n_samples"] == 20000


def test_raw_samples_match_run_mc():
    s = run_mc("complex", 15000, 9, chunk_size=4000)
    x = det_pt_samples("complex", 15000, 9, chunk_size=4000)
    assert len(x) == 15000
    assert int(np.count_nonzero(x >= 0)) == s.sep_count
    assert np.mean(x) == pytest.approx(s.moments["pt"][0][1], rel=1e-12)


def test_run_mc_errors():
    with pytest.raises(NotImplementedError):
        run_mc("quaternion", 10, 0)
    with pytest.raises(ValueError):
        run_mc("octonion", 10, 0)
    with pytest.raises(ValueError):
        run_mc("real", 0, 0)
    with pytest.raises(ValueError):
        run_mc("real", 10, 0, moment_orders=(0,))
    with pytest.raises(ValueError):
        run_mc("real", 10, 0, chunk_size=0)


@pytest.mark.slow
def test_histogram_shape_matches_reconstruction():
    samples = det_pt_samples("complex", 10**6, 2024)
    est = reconstruct_family(MomentFamily.PT_HS, 1, 500)
    a = F(-1, 16)
    pts = [a + F(k, 100) * (F(1, 256) - a) for k in range(1, 100)]
    model = [float(cdf(est, a, x)) for x in pts]
    assert empirical_cdf_distance(samples, model, [float(x) for x in pts]) < 0.01
