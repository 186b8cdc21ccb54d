# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Tests for the command-line interface
"""

import contextlib
import io
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from pop_cnn import hooks
from pop_cnn.cli import build_parser, exit_code_for, main
from pop_cnn.commands.predict import verdict
from pop_cnn.exceptions import ArgumentError
from pop_cnn.network.pop_model import PopConfig, build
from pop_cnn.network.weights import save_weights
from pop_cnn.utils.csv_io import write_matrix

SMALL_CONFIG = """\
# four sensors, one minute, 4x20 network inputs
sensors = 4
seconds = 60
keep_seconds = 60
width = 20
n_odors = 6
repeats = 2
filters1 = 4
filters2 = 8
epochs = 5
batch = 4
"""


def run_cli(*argv):
    """Run the CLI, returning (exit code, stdout)"""
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


class CliTestCase(unittest.TestCase):
    """Temporary workspace with a small config file"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config = self.path("pop_cnn.cfg")
        with open(self.config, "w", encoding="utf-8") as f:
            f.write(SMALL_CONFIG)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, *parts):
        return os.path.join(self.tmp.name, *parts)

    def synth(self, out="raw"):
        code, _ = run_cli("synth", "--config", self.config, "--out", self.path(out), "--layout", "train-only")
        self.assertEqual(code, 0)
        return self.path(out, "manifest.csv")

    def preprocess(self, mode="uniform"):
        manifest = self.synth()
        code, stdout = run_cli(
            "preprocess", "--config", self.config, "--manifest", manifest, "--out", self.path(mode), "--mode", mode
        )
        self.assertEqual(code, 0)
        return self.path(mode, "manifest.csv"), stdout


class TestParser(unittest.TestCase):
    """Test cases for the argument parser and registry"""

    def test_every_command_is_registered(self):
        """Test each subcommand has a handler in hooks"""
        parser = build_parser()
        choices = parser._subparsers._group_actions[0].choices
        self.assertEqual(set(choices), set(hooks.commands))

    def test_exit_codes(self):
        """Test IO errors map to 2 and validation errors to 3"""
        self.assertEqual(exit_code_for(FileNotFoundError("x")), 2)
        self.assertEqual(exit_code_for(ArgumentError("x")), 3)

    def test_verdict(self):
        """Test only a positive prediction is pleasant"""
        self.assertEqual(verdict(0.1), "pleasant")
        self.assertEqual(verdict(0.0), "unpleasant-or-boundary")
        self.assertEqual(verdict(-2.0), "unpleasant-or-boundary")


class TestSynthCommand(CliTestCase):
    """Test cases for pop-cnn synth"""

    def test_three_split_layout(self):
        """Test the default layout writes 45/22/21 odors"""
        with open(self.config, "w", encoding="utf-8") as f:
            f.write(SMALL_CONFIG.replace("repeats = 2", "repeats = 1"))
        code, stdout = run_cli("synth", "--config", self.config, "--out", self.path("three_split"))
        self.assertEqual(code, 0)
        self.assertIn("train=45 essential_oils=22 novel=21", stdout)

        manifest = pd.read_csv(self.path("three_split", "manifest.csv"), header=None)
        self.assertEqual(len(manifest), 88)

    def test_rerun_is_identical(self):
        """Test one seed writes byte-identical files"""
        first = self.synth("a")
        second = self.synth("b")
        for relative in ("manifest.csv", os.path.join("samples", "odor_003_1.csv")):
            with open(os.path.join(os.path.dirname(first), relative), "rb") as a, \
                    open(os.path.join(os.path.dirname(second), relative), "rb") as b:
                self.assertEqual(a.read(), b.read())

    def test_unwritable_directory(self):
        """Test an output path below a regular file exits with 2"""
        blocker = self.path("blocker")
        with open(blocker, "w", encoding="utf-8") as f:
            f.write("not a directory")
        code, _ = run_cli("synth", "--config", self.config, "--out", os.path.join(blocker, "raw"))
        self.assertEqual(code, 2)


class TestPreprocessCommand(CliTestCase):
    """Test cases for pop-cnn preprocess and gradient-profile"""

    def test_uniform(self):
        """Test uniform mode writes 4x20 samples and its artifacts"""
        manifest, stdout = self.preprocess("uniform")
        self.assertIn("shape=4x20", stdout)
        self.assertTrue(os.path.exists(self.path("uniform", "norm_stats.csv")))
        self.assertTrue(os.path.exists(self.path("uniform", "preprocess.csv")))

        sample = np.loadtxt(self.path("uniform", "samples", "odor_000_0.csv"), delimiter=",")
        self.assertEqual(sample.shape, (4, 20))

    def test_nonuniform_schedule_endpoints(self):
        """Test the schedule starts at 0 and ends at n - 1"""
        self.preprocess("nonuniform")
        schedule = pd.read_csv(self.path("nonuniform", "schedule.csv"))["index"].tolist()
        self.assertEqual(schedule[0], 0)
        self.assertEqual(schedule[-1], 59)
        self.assertTrue(os.path.exists(self.path("nonuniform", "gradient_profile.csv")))

    def test_nonuniform_is_deterministic(self):
        """Test two nonuniform runs on one input agree"""
        manifest = self.synth()
        outputs = []
        for name in ("n1", "n2"):
            code, _ = run_cli(
                "preprocess", "--config", self.config, "--manifest", manifest,
                "--out", self.path(name), "--mode", "nonuniform", "--threshold-T", "50"
            )
            self.assertEqual(code, 0)
            with open(self.path(name, "samples", "odor_002_0.csv"), "rb") as f:
                outputs.append(f.read())
        self.assertEqual(outputs[0], outputs[1])

    def test_gradient_profile(self):
        """Test the profile has one entry per second transition"""
        manifest = self.synth()
        code, stdout = run_cli(
            "gradient-profile", "--config", self.config, "--manifest", manifest,
            "--out", self.path("profile"), "--threshold-T", "100"
        )
        self.assertEqual(code, 0)
        self.assertIn("first=0 last=59", stdout)
        profile = pd.read_csv(self.path("profile", "gradient_profile.csv"))
        self.assertEqual(len(profile), 59)

    def test_missing_manifest(self):
        """Test a missing manifest exits with 2"""
        code, _ = run_cli("preprocess", "--manifest", self.path("absent.csv"), "--out", self.path("x"))
        self.assertEqual(code, 2)

    def test_inconsistent_shapes(self):
        """Test samples with different sensor counts exit with 3"""
        os.makedirs(self.path("mixed", "samples"))
        write_matrix(self.path("mixed", "samples", "a.csv"), np.ones((4, 60)))
        write_matrix(self.path("mixed", "samples", "b.csv"), np.ones((3, 60)))
        with open(self.path("mixed", "manifest.csv"), "w", encoding="utf-8") as f:
            f.write("a,0,samples/a.csv,20,train\nb,0,samples/b.csv,10,train\n")

        with self.assertLogs("pop_cnn", level="ERROR") as logs:
            code, _ = run_cli(
                "preprocess", "--config", self.config, "--manifest", self.path("mixed", "manifest.csv"),
                "--out", self.path("out")
            )
        self.assertEqual(code, 3)
        self.assertIn("sensors", "\n".join(logs.output))


class TestTrainEvaluatePredict(CliTestCase):
    """Test cases for pop-cnn train, evaluate and predict"""

    def test_train_then_evaluate(self):
        """Test weights, history and reports are written"""
        manifest, _ = self.preprocess()
        code, stdout = run_cli("train", "--config", self.config, "--manifest", manifest, "--out", self.path("run"))
        self.assertEqual(code, 0)
        self.assertIn("epochs=5", stdout)
        self.assertTrue(os.path.exists(self.path("run", "weights.popw")))
        self.assertEqual(len(pd.read_csv(self.path("run", "history.csv"))), 5)

        code, stdout = run_cli(
            "evaluate", "--config", self.config, "--manifest", manifest,
            "--weights", self.path("run", "weights.popw"), "--split", "train",
            "--human-human-r", "0.72", "--out", self.path("run")
        )
        self.assertEqual(code, 0)
        self.assertIn("split=train odors=6", stdout)
        summary = pd.read_csv(self.path("run", "report_summary.csv"))
        self.assertAlmostEqual(
            summary["machine_human_ratio_pct"][0], 100.0 * summary["pearson_r"][0] / 0.72, places=9
        )

    def test_repeated_runs(self):
        """Test --runs writes per-run and summary files"""
        manifest, _ = self.preprocess()
        code, stdout = run_cli(
            "train", "--config", self.config, "--manifest", manifest, "--out", self.path("runs"),
            "--n-train-odors", "4", "--runs", "2"
        )
        self.assertEqual(code, 0)
        self.assertIn("runs=2", stdout)
        self.assertEqual(len(pd.read_csv(self.path("runs", "runs.csv"))), 2)
        self.assertEqual(list(pd.read_csv(self.path("runs", "runs_summary.csv")).columns),
                         ["n_train_odors", "k_runs", "mean", "median", "std"])

    def test_width_mismatch(self):
        """Test uniform data narrower than the configured width exits with 3 naming the width"""
        manifest, _ = self.preprocess()
        wide = self.path("wide.cfg")
        with open(wide, "w", encoding="utf-8") as f:
            f.write(SMALL_CONFIG.replace("width = 20", "width = 24"))

        with self.assertLogs("pop_cnn", level="ERROR") as logs:
            code, _ = run_cli("train", "--config", wide, "--manifest", manifest, "--out", self.path("run"))
        self.assertEqual(code, 3)
        self.assertIn("width mismatch: expected 24, got 20", "\n".join(logs.output))
        self.assertFalse(os.path.exists(self.path("run", "weights.popw")))

    def test_sensor_mismatch(self):
        """Test data with fewer sensors than configured exits with 3 naming the sensors"""
        manifest, _ = self.preprocess()
        more = self.path("more.cfg")
        with open(more, "w", encoding="utf-8") as f:
            f.write(SMALL_CONFIG.replace("sensors = 4", "sensors = 5"))

        with self.assertLogs("pop_cnn", level="ERROR") as logs:
            code, _ = run_cli("train", "--config", more, "--manifest", manifest, "--out", self.path("run"))
        self.assertEqual(code, 3)
        self.assertIn("sensors mismatch", "\n".join(logs.output))

    def test_runs_need_split_size(self):
        """Test --runs without --n-train-odors exits with 3"""
        manifest, _ = self.preprocess()
        code, _ = run_cli("train", "--config", self.config, "--manifest", manifest, "--out", self.path("r"),
                          "--runs", "2")
        self.assertEqual(code, 3)

    def test_predict_zero_sample(self):
        """Test a zero-head network predicts 0 and is not pleasant"""
        network = build(PopConfig(sensors=4, width=20, filters1=4, filters2=4))
        network.head.weights[...] = 0.0
        save_weights(network, self.path("zero.popw"))
        write_matrix(self.path("zero.csv"), np.zeros((4, 20)))

        code, stdout = run_cli("predict", "--weights", self.path("zero.popw"), "--sample", self.path("zero.csv"))
        self.assertEqual(code, 0)
        self.assertEqual(stdout.strip(), "0\tunpleasant-or-boundary")

    def test_predict_raw_sample_with_artifacts(self):
        """Test --artifacts preprocesses a raw sample like the training data"""
        manifest, _ = self.preprocess()
        run_cli("train", "--config", self.config, "--manifest", manifest, "--out", self.path("run"))

        raw = self.path("raw", "samples", "odor_001_0.csv")
        processed = self.path("uniform", "samples", "odor_001_0.csv")
        weights = self.path("run", "weights.popw")
        _, from_raw = run_cli("predict", "--weights", weights, "--sample", raw, "--artifacts", self.path("uniform"))
        _, from_processed = run_cli("predict", "--weights", weights, "--sample", processed)
        self.assertEqual(from_raw, from_processed)

    def test_predict_wrong_width(self):
        """Test a sample of the wrong width exits with 3 naming the width"""
        save_weights(build(PopConfig(sensors=4, width=20, filters1=4, filters2=4)), self.path("w.popw"))
        write_matrix(self.path("narrow.csv"), np.zeros((4, 18)))
        with self.assertLogs("pop_cnn", level="ERROR") as logs:
            code, _ = run_cli("predict", "--weights", self.path("w.popw"), "--sample", self.path("narrow.csv"))
        self.assertEqual(code, 3)
        self.assertIn("width", "\n".join(logs.output))


class TestPlotCommand(CliTestCase):
    """Test cases for pop-cnn plot"""

    def write_csv(self, name, frame):
        path = self.path(name)
        frame.to_csv(path, index=False)
        return path

    def test_chart_kinds(self):
        """Test history, scatter, curve and profile CSVs become SVG files"""
        frames = {
            "history.csv": pd.DataFrame({"epoch": [1, 2], "loss": [3.0, 1.0], "lr": [0.01, 0.01],
                                         "val_correlation": [0.2, 0.4]}),
            "scatter.csv": pd.DataFrame({"prediction": [1.0, -2.0], "human_median": [8.0, -9.0]}),
            "curve.csv": pd.DataFrame({"n_train_odors": [20, 40], "k_runs": [20, 20], "mean": [0.4, 0.5],
                                       "median": [0.4, 0.5], "std": [0.1, 0.1]}),
            "profile.csv": pd.DataFrame({"gradient": [5.0, 2.0, 0.5]}),
        }
        for name, frame in frames.items():
            out = self.path(name.replace(".csv", ".svg"))
            code, stdout = run_cli("plot", "--input", self.write_csv(name, frame), "--out", out)
            self.assertEqual(code, 0, name)
            with open(out, encoding="utf-8") as f:
                self.assertIn("<svg", f.read())
            self.assertEqual(stdout.splitlines()[0], ",".join(frame.columns))

    def test_empty_csv(self):
        """Test an empty CSV exits with 3"""
        empty = self.path("empty.csv")
        open(empty, "w").close()
        code, _ = run_cli("plot", "--input", empty, "--out", self.path("empty.svg"))
        self.assertEqual(code, 3)

    def test_unknown_columns(self):
        """Test a CSV with no recognisable columns exits with 3"""
        path = self.write_csv("other.csv", pd.DataFrame({"a": [1], "b": [2]}))
        code, _ = run_cli("plot", "--input", path, "--out", self.path("other.svg"))
        self.assertEqual(code, 3)


class TestConfigErrors(CliTestCase):
    """Test cases for configuration failures"""

    def test_unknown_config_key(self):
        """Test an unknown key exits with 3"""
        with open(self.config, "a", encoding="utf-8") as f:
            f.write("colour = blue\n")
        code, _ = run_cli("synth", "--config", self.config, "--out", self.path("raw"))
        self.assertEqual(code, 3)

    def test_missing_config_file(self):
        """Test a missing config file exits with 2"""
        code, _ = run_cli("synth", "--config", self.path("absent.cfg"), "--out", self.path("raw"))
        self.assertEqual(code, 2)


if __name__ == "__main__":
    unittest.main()
