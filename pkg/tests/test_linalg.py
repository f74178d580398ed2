import numpy as np
import pytest

from valgrad.linalg import SpectralBounds, seeded_problem_data, spectral_bounds


def test_spectral_bounds_identity():
    sb = spectral_bounds(np.eye(4))
    assert sb == SpectralBounds(1.0, 1.0, 1.0)


def test_spectral_bounds_diagonal():
    a = np.diag([3.0, 1.0, 2.0])
    sb = spectral_bounds(a)
    assert sb.lmax_ata == pytest.approx(9.0)
    assert sb.lmin_ata == pytest.approx(1.0)
    assert sb.lmin_aat == pytest.approx(1.0)


def test_spectral_bounds_rank_deficient():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    sb = spectral_bounds(a)
    assert sb.lmin_ata == pytest.approx(0.0, abs=1e-12)
    assert sb.lmin_aat == pytest.approx(0.0, abs=1e-12)


def test_spectral_bounds_wide_vs_tall():
    a = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    sb = spectral_bounds(a)
    # wide matrix: A^T A singular, A A^T not
    assert sb.lmin_ata == pytest.approx(0.0, abs=1e-12)
    assert sb.lmin_aat == pytest.approx(1.0)


def test_spectral_bounds_rejects_bad_input():
    with pytest.raises(ValueError):
        spectral_bounds(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        spectral_bounds(np.zeros(3))


def test_seeded_data_deterministic():
    a1, u1 = seeded_problem_data(8, 5, seed=42)
    a2, u2 = seeded_problem_data(8, 5, seed=42)
    assert np.array_equal(a1, a2)
    assert np.array_equal(u1, u2)
    a3, _ = seeded_problem_data(8, 5, seed=43)
    assert not np.array_equal(a1, a3)


def test_seeded_data_shapes_and_moments():
    a, u = seeded_problem_data(40, 30, seed=0, cond_ratio=1.0)
    assert a.shape == (30, 40)
    assert u.shape == (30,)
    # unscaled entries should look standard normal
    assert abs(float(a.mean())) < 0.1
    assert abs(float(a.std()) - 1.0) < 0.1


def test_seeded_data_column_scaling():
    a, _ = seeded_problem_data(10, 200, seed=1, cond_ratio=100.0)
    norms = np.linalg.norm(a, axis=0)
    # last column scaled by cond_ratio relative to the first
    assert norms[-1] / norms[0] == pytest.approx(100.0, rel=0.5)


def test_seeded_data_validation():
    with pytest.raises(ValueError):
        seeded_problem_data(0, 5, seed=0)
    with pytest.raises(ValueError):
        seeded_problem_data(5, 5, seed=0, cond_ratio=0.5)
