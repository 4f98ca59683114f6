import numpy as np
import pytest

from ergmcmc.adaptcov import (
    DegenerateCovarianceError,
    RunningCovariance,
    batch_covariance,
    scale_proposal,
)


class TestRunningCovariance:
    def test_single_point(self):
        acc = RunningCovariance(2)
        acc.update([1.0, -2.0])
        assert np.allclose(acc.mean, [1.0, -2.0])
        assert np.allclose(acc.cov, 0.0)
        assert not acc.is_ready

    def test_two_points(self):
        acc = RunningCovariance(2)
        x = np.array([1.0, 0.0])
        y = np.array([3.0, 4.0])
        acc.update(x)
        acc.update(y)
        m = (x + y) / 2
        expected = np.outer(x - m, x - m) + np.outer(y - m, y - m)
        assert np.allclose(acc.cov, expected, atol=1e-14)

    def test_matches_batch_on_stream(self, rng):
        acc = RunningCovariance(3)
        pts = rng.normal(size=(500, 3)) @ np.diag([1.0, 0.3, 2.0])
        for p in pts:
            acc.update(p)
        assert np.max(np.abs(acc.cov - batch_covariance(pts))) < 1e-10
        assert np.max(np.abs(acc.mean - pts.mean(axis=0))) < 1e-12

    def test_permutation_invariance(self, rng):
        pts = rng.normal(size=(60, 2))
        acc1, acc2 = RunningCovariance(2), RunningCovariance(2)
        for p in pts:
            acc1.update(p)
        for p in pts[rng.permutation(60)]:
            acc2.update(p)
        assert np.max(np.abs(acc1.cov - acc2.cov)) < 1e-10

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            RunningCovariance(2).update([1.0])


class TestBatchCovariance:
    def test_identical_points_zero(self):
        pts = np.tile([2.0, -1.0], (5, 1))
        assert np.allclose(batch_covariance(pts), 0.0)

    def test_axis_aligned_pairs_diagonal(self):
        pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
        cov = batch_covariance(pts)
        assert cov[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_two_pass_formula(self, rng):
        pts = rng.normal(size=(200, 4))
        mean = pts.mean(axis=0)
        two_pass = (pts - mean).T @ (pts - mean) / (len(pts) - 1)
        assert np.max(np.abs(batch_covariance(pts) - two_pass)) < 1e-12

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            batch_covariance([[1.0, 2.0]])


class TestScaleProposal:
    def test_identity_d1(self):
        out = scale_proposal(np.eye(1), 1, jitter=1e-6)
        assert out[0, 0] == pytest.approx(2.38 ** 2 + 1e-6, abs=1e-12)

    def test_zero_matrix_becomes_jitter(self):
        out = scale_proposal(np.zeros((3, 3)), 3, jitter=1e-6)
        assert np.allclose(out, 1e-6 * np.eye(3))

    def test_rank_deficient_is_factorizable(self):
        v = np.array([1.0, 1.0, 0.0])
        cov = np.outer(v, v)  # rank one
        out = scale_proposal(cov, 3)
        np.linalg.cholesky(out)  # must not raise

    def test_scaling_rule_exact(self, rng):
        pts = rng.normal(size=(50, 3))
        sigma = batch_covariance(pts)
        out = scale_proposal(sigma, 3, jitter=1e-6)
        expected = (2.38 ** 2 / 3) * sigma + 1e-6 * np.eye(3)
        assert np.max(np.abs(out - expected)) < 1e-10

    def test_symmetric_pd_output(self, rng):
        for _ in range(20):
            a = rng.normal(size=(4, 4))
            cov = a @ a.T  # random PSD
            out = scale_proposal(cov, 4)
            assert np.allclose(out, out.T)
            assert np.all(np.linalg.eigvalsh(out) > 0)

    def test_degenerate_signalled(self):
        bad = np.array([[1.0, 0.0], [0.0, -1e6]])
        with pytest.raises(DegenerateCovarianceError):
            scale_proposal(bad, 2, jitter=1e-12)
