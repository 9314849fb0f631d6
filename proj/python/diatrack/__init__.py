"""Three-layer dialogue-act tracking engine.

A statistical n-gram speech-act predictor with deleted-interpolation
smoothing, a finite-state dialogue-grammar validator with repair
fallback, and a hierarchical plan recognizer that builds a three-layer
dialogue memory.
"""

import os

from ._core import (  # noqa: F401
    Corpus,
    DialogueModel,
    Engine,
    NGramModel,
    ScoredPrediction,
    Session,
    SyntheticSource,
    evaluate,
    replay,
)

__all__ = [
    "Corpus",
    "DialogueModel",
    "Engine",
    "NGramModel",
    "ScoredPrediction",
    "Session",
    "SyntheticSource",
    "evaluate",
    "replay",
    "data_path",
    "default_model_path",
    "default_operators_path",
]

__version__ = "0.1.0"


def data_path(*parts: str) -> str:
    """Path into the shipped data directory (model, operators, fixtures).

    The DIATRACK_DATA environment variable overrides the packaged copy,
    which keeps build-tree test runs and installed wheels equivalent.
    """
    root = os.environ.get("DIATRACK_DATA")
    if root is None:
        root = os.path.join(os.path.dirname(__file__), "data")
    return os.path.join(root, *parts)


def default_model_path() -> str:
    return data_path("default.model")


def default_operators_path() -> str:
    return data_path("default.plans")
