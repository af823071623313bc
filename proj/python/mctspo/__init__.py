"""Monte-Carlo tree search for policy optimization.

Thin Python layer over the C++ core in ``mctspo._core``.
"""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_experiment_json as _run_experiment_json

__all__ = [name for name in dir() if not name.startswith("_")]


def run_experiment(config):
    """Run an experiment from a config dict (same schema as the CLI's JSON
    config) and return the summary as a dict."""
    return _json.loads(_run_experiment_json(_json.dumps(config)))
