import unittest

import numpy as np
from pydantic import TypeAdapter, ValidationError

from src.errors import ConfigurationError
from src.media_signal import (
    ConstantCoupling,
    ConstantSignal,
    MediaCoupling,
    MediaSignal,
    PerAgentCoupling,
    PiecewiseSignal,
    PulseSignal,
    SignedSplitCoupling,
    ZeroSignal,
    build_coupling,
    evaluate,
)


class EvaluateTests(unittest.TestCase):
    def test_zero_and_constant(self):
        self.assertEqual(evaluate(ZeroSignal(), 123), 0.0)
        self.assertEqual(evaluate(ConstantSignal(level=-0.4), 0), -0.4)

    def test_pulse_is_half_open(self):
        pulse = PulseSignal(level=2.0, start_step=5, end_step=10)
        self.assertEqual(evaluate(pulse, 4), 0.0)
        self.assertEqual(evaluate(pulse, 5), 2.0)
        self.assertEqual(evaluate(pulse, 9), 2.0)
        self.assertEqual(evaluate(pulse, 10), 0.0)

    def test_empty_pulse(self):
        pulse = PulseSignal(level=3.0, start_step=7, end_step=7)
        self.assertTrue(all(evaluate(pulse, t) == 0.0 for t in range(20)))

    def test_piecewise_lookup(self):
        signal = PiecewiseSignal.model_validate(
            {"segments": [{"start_step": 0, "level": 1.0}, {"start_step": 100, "level": -1.0}]}
        )
        self.assertEqual(evaluate(signal, 99), 1.0)
        self.assertEqual(evaluate(signal, 100), -1.0)
        self.assertEqual(evaluate(signal, 10_000), -1.0)

    def test_piecewise_zero_before_first_segment(self):
        signal = PiecewiseSignal.model_validate({"segments": [{"start_step": 10, "level": 0.5}]})
        self.assertEqual(evaluate(signal, 9), 0.0)

    def test_invalid_signals(self):
        with self.assertRaises(ValidationError):
            PulseSignal(level=1.0, start_step=5, end_step=4)
        with self.assertRaises(ValidationError):
            PiecewiseSignal.model_validate(
                {"segments": [{"start_step": 3, "level": 1.0}, {"start_step": 3, "level": 2.0}]}
            )

    def test_discriminated_parsing(self):
        adapter = TypeAdapter(MediaSignal)
        signal = adapter.validate_python({"kind": "pulse", "level": 1, "start_step": 0, "end_step": 2})
        self.assertIsInstance(signal, PulseSignal)


class CouplingTests(unittest.TestCase):
    def test_constant(self):
        c = build_coupling(ConstantCoupling(c=0.3), 4)
        self.assertEqual(c.c.tolist(), [0.3] * 4)

    def test_per_agent_length_checked(self):
        with self.assertRaises(ConfigurationError):
            build_coupling(PerAgentCoupling(values=[1.0, 2.0]), 3)

    def test_signed_split(self):
        c = build_coupling(SignedSplitCoupling(magnitude=0.5, against_fraction=0.25), 8)
        self.assertEqual(c.c.tolist(), [0.5] * 6 + [-0.5] * 2)

    def test_rejects_non_finite(self):
        with self.assertRaises(ConfigurationError):
            MediaCoupling(np.array([0.0, np.inf]))


if __name__ == "__main__":
    unittest.main()
