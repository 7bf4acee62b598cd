import itertools
import math

import numpy as np
import pytest

from ripbound import bounds as B
from ripbound import mclab
from ripbound.errors import CapExceededError, DomainError


def brute_rip(a, s):
    """Exact constants by SVD of every column submatrix of A / sqrt(n)."""
    phi = a / math.sqrt(a.shape[0])
    hi, lo = -math.inf, math.inf
    for cols in itertools.combinations(range(a.shape[1]), s):
        sv = np.linalg.svd(phi[:, cols], compute_uv=False)
        hi = max(hi, sv[0] ** 2)
        lo = min(lo, sv[-1] ** 2)
    return hi - 1, 1 - lo


class TestSampleMatrix:
    def test_rademacher_support(self):
        m = mclab.sample_matrix(30, 40, "rademacher", seed=1)
        assert set(np.unique(m.entries)) == {-1.0, 1.0}

    def test_gaussian_moments(self):
        e = mclab.sample_matrix(1000, 1000, "gaussian", seed=2).entries
        assert -0.004 <= e.mean() <= 0.004
        assert 0.99 <= e.var() <= 1.01

    def test_deterministic(self):
        a = mclab.sample_matrix(8, 12, seed=5, stream=3).entries
        b = mclab.sample_matrix(8, 12, seed=5, stream=3).entries
        c = mclab.sample_matrix(8, 12, seed=5, stream=4).entries
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_metadata_and_phi(self):
        m = mclab.sample_matrix(4, 6, seed=0)
        assert (m.rows, m.cols) == (4, 6) and m.method
        assert np.allclose(m.phi, m.entries / 2)

    def test_bad_ensemble(self):
        with pytest.raises(DomainError):
            mclab.sample_matrix(4, 6, "uniform")


class TestAdversarialPair:
    def example_matrix(self):
        # First column e_1, so the correlations x_i are the first-row entries.
        a = np.zeros((4, 4))
        a[0] = [1.0, 3.0, -1.0, 2.0]
        a[1:, 1:] = np.eye(3)
        return a

    def test_example(self):
        a = self.example_matrix()
        cert = mclab.adversarial_pair(a, 3)
        x = a[0, 1:]
        assert cert.support == (0, 1, 3)
        assert cert.v_plus[1:] @ x == pytest.approx(math.sqrt(13) / math.sqrt(2), rel=1e-14)
        assert cert.v_plus[1:] @ x == pytest.approx(2.5495097567963922, rel=1e-14)

    def test_tail_maximizes_correlation(self):
        # Among all unit-tail vectors on s-1 columns with mass 1/2, the chosen one is best.
        a = self.example_matrix()
        x = a[0, 1:]
        best = max(np.linalg.norm(x[list(c)]) for c in itertools.combinations(range(3), 2))
        cert = mclab.adversarial_pair(a, 3)
        assert cert.v_plus[1:] @ x == pytest.approx(best / math.sqrt(2), rel=1e-14)

    def test_unit_vectors(self):
        a = mclab.sample_matrix(20, 50, seed=4).entries
        cert = mclab.adversarial_pair(a, 5)
        for v in (cert.v_plus, cert.v_minus):
            assert abs(np.linalg.norm(v) - 1) < 1e-12
            assert v[0] == 1 / math.sqrt(2)
            assert np.count_nonzero(v) == 5
        assert np.allclose(cert.v_plus[1:], -cert.v_minus[1:])

    def test_norms_match_direct_product(self):
        m = mclab.sample_matrix(20, 50, seed=4)
        cert = mclab.adversarial_pair(m, 5)
        assert np.linalg.norm(m.phi @ cert.v_plus) ** 2 - 1 == pytest.approx(cert.delta_plus_emp, abs=1e-12)
        assert 1 - np.linalg.norm(m.phi @ cert.v_minus) ** 2 == pytest.approx(cert.delta_minus_emp, abs=1e-12)
        assert cert.norm_plus_sq == pytest.approx(1 + cert.delta_plus_emp)

    def test_tie_break_prefers_lower_index(self):
        a = np.zeros((2, 4))
        a[0] = [1.0, 1.0, -1.0, 1.0]
        a[1, 1:] = 1.0
        cert = mclab.adversarial_pair(a, 2)
        assert cert.support == (0, 1)

    def test_degenerate_fallback(self):
        a = np.zeros((2, 5))
        a[0, 0] = 1.0
        a[1, 1:] = 1.0
        cert = mclab.adversarial_pair(a, 3)
        assert cert.degenerate and cert.support == (0, 1, 2)
        assert cert.v_plus[1] == cert.v_plus[2] == pytest.approx(0.5)
        assert abs(np.linalg.norm(cert.v_plus) - 1) < 1e-12

    def test_domain(self):
        a = mclab.sample_matrix(4, 6, seed=0)
        with pytest.raises(DomainError):
            mclab.adversarial_pair(a, 1)
        with pytest.raises(DomainError):
            mclab.adversarial_pair(np.zeros((3, 4)), 2)


class TestExactRip:
    def test_orthonormal(self):
        r = mclab.exact_rip(math.sqrt(5) * np.eye(5), 3)
        assert abs(r.delta_plus) < 1e-12 and abs(r.delta_minus) < 1e-12
        assert r.supports_checked == 10

    def test_reference_instance(self):
        r = mclab.exact_rip(mclab.sample_matrix(8, 12, seed=3, stream=0), 2)
        assert r.supports_checked == 66
        assert r.delta_plus == pytest.approx(2.287700636056403, rel=1e-12)
        assert r.delta_minus == pytest.approx(0.8265478003513889, rel=1e-12)
        assert r.support_plus == (0, 5)
        assert r.delta_s == r.delta_plus

    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_against_svd_oracle(self, s):
        a = mclab.sample_matrix(8, 12, seed=9, stream=s).entries
        hi, lo = brute_rip(a, s)
        r = mclab.exact_rip(a, s)
        assert r.delta_plus == pytest.approx(hi, abs=1e-12)
        assert r.delta_minus == pytest.approx(lo, abs=1e-12)

    def test_random_unit_vectors_never_exceed(self):
        a = mclab.sample_matrix(8, 12, seed=3, stream=0).entries
        r = mclab.exact_rip(a, 2)
        phi = a / math.sqrt(8)
        rng = np.random.default_rng(0)
        for _ in range(2000):
            cols = rng.choice(12, 2, replace=False)
            v = rng.standard_normal(2)
            v /= np.linalg.norm(v)
            q = np.linalg.norm(phi[:, cols] @ v) ** 2
            assert 1 - r.delta_minus - 1e-12 <= q <= 1 + r.delta_plus + 1e-12

    def test_dominates_certificate(self):
        for seed in range(50):
            for s in (2, 3):
                m = mclab.sample_matrix(8, 12, seed=seed)
                cert = mclab.adversarial_pair(m, s)
                exact = mclab.exact_rip(m, s, workers=1)
                assert cert.delta_plus_emp <= exact.delta_plus
                assert cert.delta_minus_emp <= exact.delta_minus

    def test_scaling(self):
        a = mclab.sample_matrix(8, 12, seed=1).entries
        r1, r2 = mclab.exact_rip(a, 3), mclab.exact_rip(2 * a, 3)
        assert 1 + r2.delta_plus == pytest.approx(4 * (1 + r1.delta_plus), rel=1e-12)
        assert 1 - r2.delta_minus == pytest.approx(4 * (1 - r1.delta_minus), rel=1e-10)

    def test_lipschitz(self):
        rng = np.random.default_rng(17)
        for seed in range(10):
            a = mclab.sample_matrix(6, 9, seed=seed).entries
            smax, smin = mclab.restricted_singular_values(a, 2)
            for scale in (1e-3, 0.1, 1.0):
                e = scale * rng.standard_normal(a.shape)
                emax, emin = mclab.restricted_singular_values(a + e, 2)
                fro = np.linalg.norm(e)
                assert abs(emax - smax) <= fro + 1e-9
                assert abs(emin - smin) <= fro + 1e-9

    def test_deterministic_across_workers(self):
        a = mclab.sample_matrix(10, 20, seed=2)
        r1 = mclab.exact_rip(a, 4, workers=1)
        r4 = mclab.exact_rip(a, 4, workers=4)
        assert r1 == r4

    def test_cap(self):
        with pytest.raises(CapExceededError) as info:
            mclab.exact_rip(np.ones((3, 40)), 10)
        assert info.value.count == math.comb(40, 10)

    def test_domain(self):
        with pytest.raises(DomainError):
            mclab.exact_rip(np.ones((3, 4)), 5)


class TestRunExperiment:
    def test_single_trial(self):
        r = mclab.run_experiment(B.ProblemDims(50, 200, 4), trials=1, seed=0)
        assert r.delta_plus_emp.shape == (1,)
        assert r.coverage_plus in (0.0, 1.0)

    def test_deterministic_across_workers(self):
        d = B.ProblemDims(40, 100, 3)
        a = mclab.run_experiment(d, trials=30, seed=5, workers=1)
        b = mclab.run_experiment(d, trials=30, seed=5, workers=4)
        assert np.array_equal(a.delta_plus_emp, b.delta_plus_emp)
        assert np.array_equal(a.delta_minus_emp, b.delta_minus_emp)

    def test_rademacher(self):
        r = mclab.run_experiment(B.ProblemDims(40, 100, 3), "rademacher", trials=20, seed=1)
        assert r.ensemble == "rademacher" and r.trials == 20

    def test_support_center(self):
        r = mclab.run_experiment(B.ProblemDims(200, 1000, 10), trials=200, seed=11)
        se = np.std(r.delta_plus_emp, ddof=1) / math.sqrt(r.trials)
        assert abs(r.mean_norm_plus - r.center_support) <= 4 * se + 0.01
        assert r.center_support < r.center

    def test_quantiles(self):
        r = mclab.run_experiment(B.ProblemDims(40, 100, 3), trials=50, seed=2)
        q = r.quantiles()
        assert list(q) == ["delta_plus_emp", "delta_minus_emp"]
        assert q["delta_plus_emp"] == sorted(q["delta_plus_emp"])

    def test_bad_trials(self):
        with pytest.raises(DomainError):
            mclab.run_experiment(B.ProblemDims(40, 100, 3), trials=0)
