"""Self-attentive constituency parser."""

import json as _json

from . import _core
from ._core import (
    CheckpointError,
    Parser,
    TrainingError,
    TreebankError,
    brackets,
    collapse_unary,
    cky_decode,
    evaluate,
    expand_unary,
    loss_augmented_decode,
    lr_schedule,
    read_trees,
    run_cli,
    synthetic_treebank,
    window_mask,
)

__all__ = [
    "CheckpointError",
    "Parser",
    "TrainingError",
    "TreebankError",
    "brackets",
    "collapse_unary",
    "cky_decode",
    "default_config",
    "evaluate",
    "expand_unary",
    "loss_augmented_decode",
    "lr_schedule",
    "read_trees",
    "run_cli",
    "synthetic_treebank",
    "train",
    "window_mask",
]


def default_config():
    """Default run configuration as a dict."""
    return _json.loads(_core.default_config())


def train(config, train, dev, checkpoint, threads=1):
    """Trains a parser and saves its best iterate to `checkpoint`.

    `config` is a dict or JSON text; `train` and `dev` are bracketed treebank
    texts or lists of trees.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    if not isinstance(train, str):
        train = "\n".join(train)
    if not isinstance(dev, str):
        dev = "\n".join(dev)
    return _core.train(config, train, dev, str(checkpoint), threads)
