"""
Application Hooks
App metadata and the command registry the CLI dispatches through
"""

app_name = "pop_cnn"
app_title = "POP-CNN"
app_publisher = "POP-CNN contributors"
app_description = "Odor pleasantness prediction from e-nose signals with a small convolutional network"
app_license = "MIT"
app_version = "1.0.0"

# Commands
# --------
# Each entry maps a subcommand to its handler. Handlers take
# (run: RunManifest, config: PipelineConfig, options: argparse.Namespace)
# and return an exit code.

commands = {
    "synth": "pop_cnn.commands.synth.cmd_synth",
    "preprocess": "pop_cnn.commands.preprocess.cmd_preprocess",
    "gradient-profile": "pop_cnn.commands.gradient_profile.cmd_gradient_profile",
    "train": "pop_cnn.commands.train.cmd_train",
    "evaluate": "pop_cnn.commands.evaluate.cmd_evaluate",
    "predict": "pop_cnn.commands.predict.cmd_predict",
    "plot": "pop_cnn.commands.plot.cmd_plot",
}

# Exit codes
# ----------

exit_codes = {
    "success": 0,
    "io_error": 2,
    "validation_error": 3,
}

# Config overrides
# ----------------
# Command-line flags that override a config-file key

config_overrides = {
    "seed": "seed",
    "threshold_T": "threshold_T",
    "neutral_half_width": "neutral_half_width",
}
