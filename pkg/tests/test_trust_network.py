import os
import tempfile
import unittest

import numpy as np

from src.dynamics_engine import TrustMatrix
from src.errors import ConfigurationError, FormatError
from src.trust_network import (
    ConstantWeights,
    Factions,
    RandomSparseTopology,
    SignedMixWeights,
    TrustGenSpec,
    UniformWeights,
    generate_trust,
    read_trust_csv,
    symmetrized,
    write_trust_csv,
)


class GenerateTrustTests(unittest.TestCase):
    def test_complete_constant(self):
        trust = generate_trust(TrustGenSpec(n_agents=3, weight_law=ConstantWeights(value=0.2), seed=0))
        expected = np.full((3, 3), 0.2)
        np.fill_diagonal(expected, 0.0)
        self.assertTrue(np.array_equal(trust.weights, expected))

    def test_same_seed_same_matrix(self):
        spec = TrustGenSpec(
            n_agents=30,
            topology=RandomSparseTopology(connection_probability=0.3),
            weight_law=SignedMixWeights(magnitude_lo=0.1, magnitude_hi=0.5, distrust_fraction=0.4),
            seed=123,
        )
        self.assertTrue(np.array_equal(generate_trust(spec).weights, generate_trust(spec).weights))

    def test_different_seeds_differ(self):
        a = generate_trust(TrustGenSpec(n_agents=10, weight_law=UniformWeights(lo=0, hi=1), seed=1))
        b = generate_trust(TrustGenSpec(n_agents=10, weight_law=UniformWeights(lo=0, hi=1), seed=2))
        self.assertFalse(np.array_equal(a.weights, b.weights))

    def test_sparse_extremes(self):
        law = ConstantWeights(value=1.0)
        empty = generate_trust(
            TrustGenSpec(
                n_agents=8, topology=RandomSparseTopology(connection_probability=0.0), weight_law=law, seed=5
            )
        )
        self.assertFalse(np.any(empty.weights))
        full = generate_trust(
            TrustGenSpec(
                n_agents=8, topology=RandomSparseTopology(connection_probability=1.0), weight_law=law, seed=5
            )
        )
        self.assertEqual(int(np.sum(full.weights == 1.0)), 8 * 7)

    def test_signed_mix_fraction_and_bounds(self):
        trust = generate_trust(
            TrustGenSpec(
                n_agents=200,
                weight_law=SignedMixWeights(magnitude_lo=0.2, magnitude_hi=0.4, distrust_fraction=0.25),
                seed=9,
            )
        )
        off = trust.weights[~np.eye(200, dtype=bool)]
        self.assertTrue(np.all((np.abs(off) >= 0.2) & (np.abs(off) <= 0.4)))
        self.assertAlmostEqual(float(np.mean(off < 0)), 0.25, delta=0.02)

    def test_factions(self):
        trust = generate_trust(
            TrustGenSpec(
                n_agents=4,
                factions=Factions(sizes=(2, 2), intra_weight=0.3, inter_weight=-0.1),
                seed=0,
            )
        )
        self.assertEqual(
            trust.weights.tolist(),
            [
                [0.0, 0.3, -0.1, -0.1],
                [0.3, 0.0, -0.1, -0.1],
                [-0.1, -0.1, 0.0, 0.3],
                [-0.1, -0.1, 0.3, 0.0],
            ],
        )

    def test_two_singleton_factions_distrust(self):
        trust = generate_trust(
            TrustGenSpec(n_agents=2, factions=Factions(sizes=(1, 1), intra_weight=0.5, inter_weight=-0.5), seed=0)
        )
        self.assertEqual(trust.weights.tolist(), [[0.0, -0.5], [-0.5, 0.0]])

    def test_signed_mix_fraction_extremes(self):
        for fraction, check in ((0.0, np.greater_equal), (1.0, np.less_equal)):
            trust = generate_trust(
                TrustGenSpec(
                    n_agents=20,
                    weight_law=SignedMixWeights(magnitude_lo=0.0, magnitude_hi=0.2, distrust_fraction=fraction),
                    seed=4,
                )
            )
            self.assertTrue(np.all(check(trust.weights, 0.0)))

    def test_spec_validation(self):
        with self.assertRaises(ConfigurationError):
            generate_trust({"n_agents": 3, "seed": 0})
        with self.assertRaises(ConfigurationError):
            generate_trust(
                {
                    "n_agents": 5,
                    "seed": 0,
                    "factions": {"sizes": [2, 2], "intra_weight": 1.0, "inter_weight": -1.0},
                }
            )
        with self.assertRaises(ConfigurationError):
            generate_trust(
                {
                    "n_agents": 3,
                    "seed": 0,
                    "topology": {"kind": "random_sparse", "connection_probability": 1.5},
                    "weight_law": {"kind": "constant", "value": 1.0},
                }
            )

    def test_symmetrized(self):
        trust = symmetrized(TrustMatrix(np.array([[0.0, 1.0, 2.0], [5.0, 0.0, 3.0], [6.0, 7.0, 0.0]])))
        self.assertTrue(np.array_equal(trust.weights, trust.weights.T))
        self.assertEqual(trust.weights[1, 0], 1.0)


class TrustCsvTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "trust.csv")

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_exact(self):
        trust = generate_trust(
            TrustGenSpec(
                n_agents=6,
                weight_law=SignedMixWeights(magnitude_lo=0.0, magnitude_hi=1.0, distrust_fraction=0.5),
                seed=77,
            )
        )
        write_trust_csv(trust, self.path)
        self.assertTrue(np.array_equal(read_trust_csv(self.path).weights, trust.weights))
        with open(self.path, encoding="utf-8") as fh:
            self.assertEqual(fh.readline().strip(), "agent,0,1,2,3,4,5")

    def test_bad_labels(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write("agent,0,2\n0,0,1\n1,1,0\n")
        with self.assertRaises(FormatError):
            read_trust_csv(self.path)

    def test_non_numeric(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write("agent,0,1\n0,0,abc\n1,1,0\n")
        with self.assertRaises(FormatError):
            read_trust_csv(self.path)

    def test_diagonal_is_ignored(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write("agent,0,1\n0,9,0.5\n1,-0.5,9\n")
        with self.assertLogs(level="WARNING"):
            trust = read_trust_csv(self.path)
        self.assertEqual(trust.weights.tolist(), [[0.0, 0.5], [-0.5, 0.0]])


if __name__ == "__main__":
    unittest.main()
