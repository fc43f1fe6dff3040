import math

import numpy as np
import pytest

from compden import Codebook, DimensionError, DomainError, Gaussian, Poisson, Signal
from compden.codec import encode
from compden.denoise import ml_denoise, neg_log_likelihood, nn_denoise


class TestNegLogLikelihood:
    def test_gaussian_constant_term(self):
        # 2 * log(sqrt(2 pi)) at 40 digits
        assert neg_log_likelihood([0.3, -1.0], [0.3, -1.0], Gaussian(1.0)) == pytest.approx(
            1.8378770664093453, abs=1e-14
        )

    def test_gaussian_matches_density(self, rng):
        c, y, sigma = rng.standard_normal(5), rng.standard_normal(5), 0.7
        dens = np.exp(-((y - c) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
        assert neg_log_likelihood(c, y, Gaussian(sigma)) == pytest.approx(-np.sum(np.log(dens)), rel=1e-12)

    def test_gaussian_argmin_is_l2_nearest(self, rng):
        for _ in range(1000):
            ca, cb, y = rng.standard_normal((3, 4))
            sigma = Gaussian(float(rng.uniform(0.1, 5)))
            ml_pick = 0 if neg_log_likelihood(ca, y, sigma) <= neg_log_likelihood(cb, y, sigma) else 1
            l2_pick = 0 if np.sum((ca - y) ** 2) <= np.sum((cb - y) ** 2) else 1
            assert ml_pick == l2_pick

    def test_poisson_unit(self):
        assert neg_log_likelihood([1.0], [1.0], Poisson(1.0)) == 1.0

    def test_poisson_matches_pmf(self):
        c, y = np.array([2.5, 0.4, 7.0]), np.array([3.0, 0.0, 5.0])
        pmf = [math.exp(-ci) * ci**yi / math.factorial(int(yi)) for ci, yi in zip(c, y)]
        assert neg_log_likelihood(c, y, Poisson(10.0)) == pytest.approx(-sum(map(math.log, pmf)), rel=1e-12)

    @pytest.mark.parametrize("c,y", [([0.0], [1.0]), ([-1.0], [1.0]), ([1.0], [0.5]), ([1.0], [-1.0])])
    def test_poisson_domain(self, c, y):
        with pytest.raises(DomainError):
            neg_log_likelihood(c, y, Poisson(1.0))

    def test_dimension(self):
        with pytest.raises(DimensionError):
            neg_log_likelihood([1.0], [1.0, 2.0], Gaussian(1.0))


class TestMlDenoise:
    def test_observation_on_codeword(self, rng):
        cb = Codebook(rng.standard_normal((8, 3)), 3)
        m, c = ml_denoise(cb, cb.codewords[5], Gaussian(2.0))
        assert m == 6 and c == cb.codeword(6)

    def test_poisson_two_codewords(self):
        cb = Codebook([[1.0, 1.0], [9.0, 9.0]], 1)
        m, c = ml_denoise(cb, [8.0, 10.0], Poisson(9.0))
        assert m == 2 and c == Signal([9.0, 9.0])

    def test_gaussian_equals_nn(self, rng):
        for _ in range(10**4):
            r = int(rng.integers(1, 7))
            n = int(rng.integers(1, 33))
            cb = Codebook(rng.standard_normal((2**r, n)), r)
            sigma = float(rng.choice([0.1, 1.0, 10.0]))
            y = cb.codewords[rng.integers(2**r)] + sigma * rng.standard_normal(n)
            assert ml_denoise(cb, y, Gaussian(sigma))[0] == nn_denoise(cb, y)[0]

    def test_scale_invariance(self, rng):
        cb = Codebook(rng.standard_normal((16, 4)), 4)
        y = rng.standard_normal(4)
        picks = {ml_denoise(cb, y, Gaussian(s))[0] for s in (1e-3, 0.1, 1.0, 10.0, 1e3)}
        assert len(picks) == 1


class TestNnDenoise:
    def test_nearest(self):
        cb = Codebook([[0.0, 0.0], [4.0, 4.0]], 1)
        m, c = nn_denoise(cb, [0.5, 0.5])
        assert m == 1 and c == Signal([0.0, 0.0])

    def test_midpoint_tie(self):
        cb = Codebook([[0.0, 0.0], [4.0, 4.0]], 1)
        assert nn_denoise(cb, [2.0, 2.0])[0] == 1
        cb2 = Codebook([[4.0, 4.0], [0.0, 0.0]], 1)
        assert nn_denoise(cb2, [2.0, 2.0])[0] == 1

    def test_exhaustive_oracle_and_membership(self, rng):
        for _ in range(10**4):
            r = int(rng.integers(1, 6))
            n = int(rng.integers(1, 9))
            c = rng.standard_normal((2**r, n))
            cb = Codebook(c, r)
            y = rng.standard_normal(n)
            m, out = nn_denoise(cb, y)
            d = [float(np.dot(c[k] - y, c[k] - y)) for k in range(2**r)]
            assert d[m - 1] == pytest.approx(min(d), rel=1e-12, abs=1e-15)
            assert m == encode(cb, y)
            assert out == cb.codeword(m)

    def test_part1_optimality(self, rng):
        cb = Codebook(rng.standard_normal((32, 6)), 5)
        for _ in range(500):
            x = rng.standard_normal(6)
            y = x + 0.5 * rng.standard_normal(6)
            x_hat = nn_denoise(cb, y)[1].values
            x_tilde = cb.codewords[encode(cb, x) - 1]
            assert np.sum((x_hat - y) ** 2) <= np.sum((x_tilde - y) ** 2) + 1e-12

    def test_dimension(self):
        with pytest.raises(DimensionError):
            nn_denoise(Codebook([[0.0], [1.0]], 1), [0.0, 1.0])
