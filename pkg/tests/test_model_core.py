import math
import unittest

import numpy as np
from pydantic import ValidationError

from src.errors import InputDomainError
from src.model_core import ModelParams, OpinionState, coupling_term, phi, phi_matrix


def params(beta=10.0, b=1.0, alpha=0.0, dt=1.0):
    return ModelParams(alpha=alpha, beta=beta, b=b, dt=dt)


class PhiTests(unittest.TestCase):
    def test_half_at_bound(self):
        for beta in (0.1, 1.0, 10.0, 100.0):
            self.assertEqual(phi(1.0, params(beta=beta)), 0.5)

    def test_known_values(self):
        self.assertAlmostEqual(phi(0.0, params()), 0.9999546, places=7)
        self.assertAlmostEqual(phi(2.0, params()), 4.5398e-5, delta=1e-9)

    def test_extreme_exponents_do_not_overflow(self):
        p = params(beta=10_000.0)
        self.assertEqual(phi(2.0, p), 0.0)
        self.assertEqual(phi(0.0, p), 1.0)

    def test_rejects_bad_distance(self):
        with self.assertRaises(InputDomainError):
            phi(-0.1, params())
        with self.assertRaises(InputDomainError):
            phi(math.nan, params())
        with self.assertRaises(InputDomainError):
            phi(math.inf, params())

    def test_matrix_matches_scalar(self):
        p = params(beta=7.0, b=0.6)
        d = np.linspace(0.0, 3.0, 301)
        vec = phi_matrix(d, p)
        for dist, value in zip(d, vec):
            self.assertAlmostEqual(value, phi(float(dist), p), delta=1e-15)


class CouplingTermTests(unittest.TestCase):
    def test_equal_opinions_give_zero(self):
        self.assertEqual(coupling_term(0.7, 0.7, 0.9, params()), 0.0)
        self.assertEqual(coupling_term(0.7, 0.7, -3.0, params()), 0.0)

    def test_trust_attracts_and_distrust_repels(self):
        p = params(b=2.0)
        self.assertAlmostEqual(coupling_term(0.0, 1.0, 0.5, p), 0.4999773, places=7)
        self.assertAlmostEqual(coupling_term(0.0, 1.0, -0.5, p), -0.4999773, places=7)

    def test_antisymmetric_in_opinions(self):
        rng = np.random.default_rng(3)
        p = params(beta=4.0, b=0.8)
        for _ in range(200):
            a, b, d = rng.uniform(-3, 3, size=3)
            self.assertEqual(coupling_term(a, b, d, p), -coupling_term(b, a, d, p))

    def test_rejects_non_finite(self):
        with self.assertRaises(InputDomainError):
            coupling_term(0.0, math.inf, 1.0, params())


class ParamsAndStateTests(unittest.TestCase):
    def test_params_validation(self):
        with self.assertRaises(ValidationError):
            ModelParams(alpha=0.0, beta=10.0, b=1.0, dt=0.0)
        with self.assertRaises(ValidationError):
            ModelParams(alpha=-0.1, beta=10.0, b=1.0, dt=0.1)
        with self.assertRaises(ValidationError):
            ModelParams(alpha=0.0, beta=math.inf, b=1.0, dt=0.1)

    def test_state_rejects_nan_and_empty(self):
        with self.assertRaises(InputDomainError):
            OpinionState([0.0, math.nan])
        with self.assertRaises(InputDomainError):
            OpinionState([])

    def test_state_is_read_only(self):
        state = OpinionState([1.0, 2.0])
        self.assertEqual(state.n_agents, 2)
        with self.assertRaises(ValueError):
            state.opinions[0] = 5.0


if __name__ == "__main__":
    unittest.main()
