# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Unit tests for the optimizer, learning rate schedule and training loops
"""

import math
import os
import tempfile
import unittest
from collections import OrderedDict
from dataclasses import replace

import numpy as np
import pandas as pd

from pop_cnn.enose.signal_model import Dataset, PreprocessConfig, preprocess_dataset
from pop_cnn.enose.synth_data import SynthConfig, generate, make_paper_shaped_splits
from pop_cnn.exceptions import ArgumentError, ConfigurationError, DegenerateInputError, ShapeMismatchError
from pop_cnn.experiment.evaluation import heldout_correlation
from pop_cnn.experiment.training import (
    CURVE_COLUMNS,
    HISTORY_COLUMNS,
    OptimizerState,
    PlateauDetector,
    RunSummary,
    TargetScaler,
    TrainConfig,
    augmented_pool,
    clip_gradients,
    learning_curve,
    lr_schedule_step,
    random_split,
    repeated_runs,
    sgd_step,
    train,
)
from pop_cnn.network.pop_model import PopConfig, PopNetwork, build

TINY = PopConfig(sensors=4, width=20, filters1=4, filters2=8, stride_w=2)
QUICK = TrainConfig(batch_size=4, max_epochs=5)


def tiny_dataset(n_odors=6, repeats=2, seed=0):
    """Synthetic samples preprocessed down to 4x20"""
    raw = generate(SynthConfig(n_odors=n_odors, repeats_per_odor=repeats, sensors=4, seconds=60, seed=seed))
    processed, _, _ = preprocess_dataset(raw, PreprocessConfig(keep_seconds=60, width=20))
    return processed


class RecordingNetwork(PopNetwork):
    """Remembers the targets of every batch it is trained on"""

    def __init__(self, *args):
        super().__init__(*args)
        self.batches = []

    def loss_and_gradients(self, inputs, targets):
        self.batches.append(np.array(targets))
        return super().loss_and_gradients(inputs, targets)


def single(value):
    return OrderedDict([("w", np.array([value], dtype=np.float64))])


class TestSgdStep(unittest.TestCase):
    """Test cases for sgd_step"""

    def test_plain_sgd(self):
        """Test momentum 0, decay 0, lr 0.1 moves 1 to 0.9"""
        params = single(1.0)
        state = OptimizerState.zeros_like(params)
        sgd_step(params, single(1.0), state, lr=0.1, momentum=0.0, weight_decay=0.0)
        self.assertAlmostEqual(params["w"][0], 0.9, places=15)

    def test_momentum_iteration(self):
        """Test two momentum steps from v = 0"""
        params = single(1.0)
        state = OptimizerState.zeros_like(params)

        sgd_step(params, single(1.0), state, lr=0.1, momentum=0.8, weight_decay=0.0)
        self.assertAlmostEqual(state.velocity["w"][0], -0.1, places=15)
        self.assertAlmostEqual(params["w"][0], 0.9, places=15)

        sgd_step(params, single(1.0), state, lr=0.1, momentum=0.8, weight_decay=0.0)
        self.assertAlmostEqual(state.velocity["w"][0], -0.18, places=15)
        self.assertAlmostEqual(params["w"][0], 0.72, places=15)

    def test_fixed_point(self):
        """Test zero gradient and velocity leave parameters unchanged"""
        params = single(0.37)
        state = OptimizerState.zeros_like(params)
        sgd_step(params, single(0.0), state, lr=0.5, momentum=0.9, weight_decay=0.0)
        self.assertEqual(params["w"][0], 0.37)

    def test_updates_in_place(self):
        """Test the caller's arrays are the ones updated"""
        weights = np.array([1.0, 2.0])
        params = OrderedDict([("w", weights)])
        state = OptimizerState.zeros_like(params)
        sgd_step(params, OrderedDict([("w", np.ones(2))]), state, 0.5, 0.0, 0.0)
        np.testing.assert_array_equal(weights, [0.5, 1.5])

    def test_decay_skips_biases(self):
        """Test decay with zero gradients shrinks weights and leaves biases"""
        params = OrderedDict([("w", np.array([2.0, -1.0])), ("b", np.array([0.5]))])
        zero = OrderedDict([("w", np.zeros(2)), ("b", np.zeros(1))])
        state = OptimizerState.zeros_like(params)

        norms = [np.linalg.norm(params["w"])]
        for _ in range(10):
            sgd_step(params, zero, state, lr=0.1, momentum=0.0, weight_decay=0.1, no_decay=("b",))
            norms.append(np.linalg.norm(params["w"]))
            self.assertEqual(params["b"][0], 0.5)
        for before, after in zip(norms, norms[1:]):
            self.assertLess(after, before)

    def test_convex_quadratic(self):
        """Test theta^2 decreases monotonically below the curvature bound"""
        params = single(3.0)
        state = OptimizerState.zeros_like(params)
        losses = [params["w"][0] ** 2]
        for _ in range(30):
            sgd_step(params, single(2.0 * params["w"][0]), state, lr=0.1, momentum=0.0, weight_decay=0.0)
            losses.append(params["w"][0] ** 2)
        for before, after in zip(losses, losses[1:]):
            self.assertLess(after, before)

    def test_shape_errors(self):
        """Test missing and mis-shaped gradients"""
        params = single(1.0)
        state = OptimizerState.zeros_like(params)
        with self.assertRaises(ShapeMismatchError):
            sgd_step(params, OrderedDict([("w", np.ones(2))]), state, 0.1, 0.0, 0.0)
        with self.assertRaises(ArgumentError):
            sgd_step(params, OrderedDict(), state, 0.1, 0.0, 0.0)


class TestLearningRateSchedule(unittest.TestCase):
    """Test cases for lr_schedule_step and plateau detection"""

    def test_divide_on_plateau(self):
        """Test 0.01 drops to 0.001 on a plateau"""
        self.assertAlmostEqual(lr_schedule_step(0.01, True, TrainConfig()), 0.001, places=15)

    def test_floor(self):
        """Test the rate never goes below lr_final"""
        self.assertEqual(lr_schedule_step(0.0001, True, TrainConfig()), 0.0001)
        self.assertEqual(lr_schedule_step(0.001, True, TrainConfig()), 0.0001)

    def test_no_plateau(self):
        """Test the rate is kept without a plateau"""
        self.assertEqual(lr_schedule_step(0.001, False, TrainConfig()), 0.001)

    def test_plateau_after_patience(self):
        """Test a flat loss signals a plateau every patience epochs"""
        detector = PlateauDetector(patience=3)
        signals = [detector.update(1.0) for _ in range(7)]
        self.assertEqual(signals, [False, False, False, True, False, False, True])

    def test_improvement_resets(self):
        """Test a relative improvement above the threshold resets the count"""
        detector = PlateauDetector(patience=2, min_improvement=1e-4)
        self.assertFalse(detector.update(1.0))
        self.assertFalse(detector.update(1.0))
        self.assertFalse(detector.update(0.5))
        self.assertFalse(detector.update(0.49999))
        self.assertTrue(detector.update(0.5))

    def test_invalid_config(self):
        """Test configs the schedule cannot follow"""
        for config in (
            TrainConfig(lr_final=0.1, lr_initial=0.01),
            TrainConfig(lr_divisor=1.0),
            TrainConfig(momentum=1.0),
            TrainConfig(batch_size=0),
        ):
            with self.assertRaises(ConfigurationError):
                config.validate()


class TestClipGradients(unittest.TestCase):
    """Test cases for clip_gradients"""

    def test_large_norm_is_capped(self):
        """Test gradients of norm 5 are scaled to norm 1 with their direction kept"""
        grads = OrderedDict([("a", np.array([3.0])), ("b", np.array([[4.0]]))])
        clipped, norm = clip_gradients(grads, 1.0)
        self.assertEqual(norm, 5.0)
        np.testing.assert_allclose(clipped["a"], [0.6], rtol=1e-15)
        np.testing.assert_allclose(clipped["b"], [[0.8]], rtol=1e-15)
        np.testing.assert_array_equal(grads["a"], [3.0])

    def test_small_norm_untouched(self):
        """Test gradients under the cap are returned as they are"""
        grads = OrderedDict([("a", np.array([0.3, 0.4]))])
        clipped, norm = clip_gradients(grads, 1.0)
        self.assertAlmostEqual(norm, 0.5, places=15)
        self.assertIs(clipped, grads)

    def test_zero_disables(self):
        """Test a cap of 0 never clips"""
        grads = OrderedDict([("a", np.array([300.0]))])
        clipped, _ = clip_gradients(grads, 0.0)
        np.testing.assert_array_equal(clipped["a"], [300.0])

    def test_negative_cap_rejected(self):
        """Test a negative cap fails validation"""
        with self.assertRaises(ConfigurationError):
            TrainConfig(max_grad_norm=-1.0).validate()


class TestTargetScaler(unittest.TestCase):
    """Test cases for TargetScaler"""

    def test_fit(self):
        """Test labels 1, 3 give mean 2 and scale 1"""
        scaler = TargetScaler.fit([1.0, 3.0])
        self.assertEqual((scaler.mean, scaler.scale), (2.0, 1.0))
        np.testing.assert_array_equal(scaler.transform([1.0, 3.0]), [-1.0, 1.0])

    def test_constant_labels(self):
        """Test constant labels are shifted but not scaled"""
        scaler = TargetScaler.fit([4.0, 4.0, 4.0])
        self.assertEqual((scaler.mean, scaler.scale), (4.0, 1.0))
        np.testing.assert_array_equal(scaler.transform([4.0]), [0.0])

    def test_empty_labels(self):
        """Test fitting no labels"""
        with self.assertRaises(ArgumentError):
            TargetScaler.fit([])

    def test_fold_into_maps_outputs_to_labels(self):
        """Test a folded network predicts mean + scale * its former output"""
        network = build(TINY)
        folded = TargetScaler(100.0, 4.0).fold_into(network.copy())
        inputs = tiny_dataset(n_odors=3, repeats=1).inputs()
        np.testing.assert_allclose(folded.forward(inputs), 100.0 + 4.0 * network.forward(inputs), rtol=1e-12)
        np.testing.assert_array_equal(folded.conv1.kernels, network.conv1.kernels)


class TestTrain(unittest.TestCase):
    """Test cases for the training loop"""

    @classmethod
    def setUpClass(cls):
        cls.dataset = tiny_dataset()

    def test_deterministic(self):
        """Test one seed gives identical histories and parameters"""
        first, history_a = train(build(TINY), self.dataset, None, QUICK)
        second, history_b = train(build(TINY), self.dataset, None, QUICK)

        self.assertEqual(history_a.losses, history_b.losses)
        for name, values in first.parameters().items():
            np.testing.assert_array_equal(values, second.parameters()[name])

    def test_loss_decreases(self):
        """Test training lowers the epoch loss"""
        _, history = train(build(TINY), self.dataset, None, replace(QUICK, max_epochs=60))
        self.assertLess(history.losses[-1], history.losses[0])

    def test_predictions_in_label_units(self):
        """Test a network trained on labels near 100 predicts near 100"""
        shifted = Dataset([replace(s, label=s.label + 100.0) for s in self.dataset])
        network, _ = train(build(TINY), shifted, None, QUICK)
        spread = float(np.std(shifted.labels()))
        self.assertLess(abs(float(np.mean(network.forward(shifted.inputs()))) - 100.0), 2.0 * spread)

    def test_label_scale_equivariance(self):
        """Test labels scaled by 10 scale predictions by 10 and losses by 100"""
        scaled = Dataset([replace(s, label=10.0 * s.label) for s in self.dataset])
        first, history = train(build(TINY), self.dataset, None, QUICK)
        second, scaled_history = train(build(TINY), scaled, None, QUICK)

        np.testing.assert_allclose(scaled_history.losses, 100.0 * np.asarray(history.losses), rtol=1e-6)
        inputs = self.dataset.inputs()
        np.testing.assert_allclose(second.forward(inputs), 10.0 * first.forward(inputs), rtol=1e-6, atol=1e-9)

    def test_every_sample_once_per_epoch(self):
        """Test each epoch is a permutation split into batches"""
        base = build(TINY)
        network = RecordingNetwork(base.config, base.conv1, base.conv2, base.head)
        dataset = tiny_dataset(n_odors=9, repeats=1, seed=3)
        train(network, dataset, None, replace(QUICK, max_epochs=3))
        standardized = TargetScaler.fit(dataset.labels()).transform(dataset.labels())

        self.assertEqual([len(b) for b in network.batches], [4, 4, 1] * 3)
        for epoch in range(3):
            seen = np.concatenate(network.batches[3 * epoch:3 * epoch + 3])
            np.testing.assert_array_equal(np.sort(seen), np.sort(standardized))

    def test_lr_trace_reaches_floor(self):
        """Test plateaus walk the rate from 0.01 down to 0.0001 and stop"""
        network = build(TINY)
        for values in network.parameters().values():
            values[...] = 0.0
        zero_labels = Dataset([replace(s, label=0.0) for s in self.dataset])

        _, history = train(network, zero_labels, None, TrainConfig(plateau_patience=2, batch_size=4))
        np.testing.assert_allclose(history.lrs, [0.01, 0.01, 0.01, 0.001, 0.001, 0.0001, 0.0001], rtol=1e-12)
        self.assertEqual(history.losses, [0.0] * 7)

    def test_lr_never_increases(self):
        """Test the rate is non-increasing and bounded below"""
        config = replace(QUICK, plateau_patience=2, max_epochs=40)
        _, history = train(build(TINY), self.dataset, None, config)
        self.assertEqual(history.lrs, sorted(history.lrs, reverse=True))
        self.assertGreaterEqual(min(history.lrs), config.lr_final)

    def test_validation_correlation_recorded(self):
        """Test a validation set adds one correlation per epoch"""
        train_part, val_part = random_split(self.dataset, 4, seed=0)
        _, history = train(build(TINY), train_part, val_part, QUICK)
        self.assertEqual(len(history), 5)
        self.assertEqual(len(history.val_correlations), 5)
        self.assertTrue(all(math.isnan(r) or -1.0 <= r <= 1.0 for r in history.val_correlations))

    def test_history_file(self):
        """Test the history CSV columns"""
        _, history = train(build(TINY), self.dataset, None, QUICK)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "history.csv")
            history.save_history(path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), HISTORY_COLUMNS)
        self.assertEqual(frame["epoch"].tolist(), [1, 2, 3, 4, 5])

    def test_errors(self):
        """Test empty and mis-shaped training sets"""
        with self.assertRaises(ArgumentError):
            train(build(TINY), Dataset([]), None, QUICK)
        with self.assertRaises(ShapeMismatchError) as ctx:
            train(build(replace(TINY, width=24)), self.dataset, None, QUICK)
        self.assertEqual(ctx.exception.dimension, "width")


class TestRandomSplit(unittest.TestCase):
    """Test cases for random_split"""

    @classmethod
    def setUpClass(cls):
        cls.dataset = generate(SynthConfig(n_odors=45, repeats_per_odor=2, sensors=2, seconds=10))

    def test_forty_of_forty_five(self):
        """Test 40 training odors leave 5 for validation"""
        train_part, val_part = random_split(self.dataset, 40, seed=0)
        self.assertEqual(len(train_part.odor_ids()), 40)
        self.assertEqual(len(val_part.odor_ids()), 5)
        self.assertFalse(set(train_part.odor_ids()) & set(val_part.odor_ids()))
        self.assertEqual(len(train_part) + len(val_part), len(self.dataset))

    def test_repeats_stay_together(self):
        """Test both repeats of an odor land on the same side"""
        train_part, val_part = random_split(self.dataset, 30, seed=1)
        for part in (train_part, val_part):
            for repeats in part.odor_groups().values():
                self.assertEqual(len(repeats), 2)

    def test_boundary(self):
        """Test total - 1 training odors leave a single validation odor"""
        _, val_part = random_split(self.dataset, 44, seed=2)
        self.assertEqual(len(val_part.odor_ids()), 1)

    def test_seeded(self):
        """Test one seed gives one split and other seeds differ"""
        first, _ = random_split(self.dataset, 20, seed=5)
        again, _ = random_split(self.dataset, 20, seed=5)
        self.assertEqual(first.odor_ids(), again.odor_ids())

        others = [set(random_split(self.dataset, 20, seed=s)[0].odor_ids()) for s in range(6, 11)]
        self.assertTrue(any(ids != set(first.odor_ids()) for ids in others))

    def test_out_of_range(self):
        """Test split sizes outside [1, odors - 1]"""
        with self.assertRaises(ArgumentError):
            random_split(self.dataset, 0, seed=0)
        with self.assertRaises(ArgumentError):
            random_split(self.dataset, 45, seed=0)


class TestRepeatedRuns(unittest.TestCase):
    """Test cases for repeated runs and learning curves"""

    @classmethod
    def setUpClass(cls):
        cls.dataset = tiny_dataset(n_odors=8, repeats=2, seed=4)

    def test_single_run_matches_manual_run(self):
        """Test k = 1 reports exactly the single run"""
        summary = repeated_runs(self.dataset, 5, 1, TINY, QUICK)

        train_part, val_part = random_split(self.dataset, 5, QUICK.seed)
        network, _ = train(build(TINY), train_part, None, QUICK)
        expected = heldout_correlation(network, val_part)

        self.assertEqual(summary.k_runs, 1)
        self.assertEqual(summary.seeds, (0,))
        self.assertEqual(summary.correlations[0], expected)
        self.assertEqual(summary.mean, expected)
        self.assertEqual(summary.median, expected)

    def test_reproducible(self):
        """Test two calls with one master seed agree"""
        first = repeated_runs(self.dataset, 5, 2, TINY, QUICK)
        second = repeated_runs(self.dataset, 5, 2, TINY, QUICK)
        self.assertEqual(first.seeds, (0, 1))
        np.testing.assert_array_equal(first.correlations, second.correlations)

    def test_summary_statistics(self):
        """Test mean, median and std of three runs"""
        summary = RunSummary(20, (0.5, 0.9, 0.7), (0, 1, 2))
        self.assertAlmostEqual(summary.mean, 0.7)
        self.assertAlmostEqual(summary.median, 0.7)
        self.assertAlmostEqual(summary.std, float(np.std([0.5, 0.9, 0.7])))
        self.assertEqual(summary.k_runs, 3)
        self.assertEqual(list(summary.summary_frame().columns), CURVE_COLUMNS)
        self.assertEqual(len(summary.to_frame()), 3)

    def test_summary_rejects_undefined_runs(self):
        """Test a NaN correlation is an error naming its seed"""
        with self.assertRaises(DegenerateInputError) as ctx:
            RunSummary(20, (0.5, math.nan, 0.7), (0, 1, 2))
        self.assertIn("seeds 1", str(ctx.exception))

    def test_constant_validation_labels_raise(self):
        """Test a run whose validation correlation is undefined stops the experiment"""
        flat = Dataset([replace(s, label=1.0) for s in self.dataset])
        with self.assertRaises(DegenerateInputError) as ctx:
            repeated_runs(flat, 5, 2, TINY, QUICK)
        self.assertIn("seed 0", str(ctx.exception))

    def test_learning_curve_rows(self):
        """Test one row per training-set size"""
        curve = learning_curve(self.dataset, [3, 6], 1, TINY, replace(QUICK, max_epochs=2))
        self.assertEqual(list(curve.columns), CURVE_COLUMNS)
        self.assertEqual(curve["n_train_odors"].tolist(), [3, 6])

    def test_invalid_run_count(self):
        """Test k_runs must be positive"""
        with self.assertRaises(ArgumentError):
            repeated_runs(self.dataset, 5, 0, TINY, QUICK)

    def test_augmented_pool(self):
        """Test the pool holds training odors and essential oils only"""
        dataset = make_paper_shaped_splits(SynthConfig(repeats_per_odor=1, seconds=10))
        pool = augmented_pool(dataset)
        self.assertEqual(len(pool.odor_ids()), 67)
        self.assertEqual({s.split for s in pool}, {"train", "essential_oils"})


if __name__ == "__main__":
    unittest.main()
