"""Casimir-Polder potential of a dielectric sphere and Poisson-spot diffraction."""

import json

from ._core import *  # noqa: F401,F403
from ._core import run_pipeline as _run_pipeline


def run(config_text, last="diffraction"):
    """Run the pipeline and return the manifest as a dict."""
    return json.loads(_run_pipeline(config_text, last))
