"""Python access to the cirsense simulator, models and evaluation suite."""

import json

from . import _core
from ._core import (
    ConfigError,
    FormatError,
    GbtEnsemble,
    __version__,
    fit_gbt,
    inverse_dft,
    load_dataset,
    load_reports,
    synthesize_sweep,
)


def _text(config):
    if config is None or isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    """Default run configuration as a dict."""
    return json.loads(_core.default_config())


def simulate(config=None, path=None):
    """Generate the campaign described by `config` (dict or JSON text)."""
    return _core.simulate(_text(config), None if path is None else str(path))


def reproduce(config=None, out_dir=None):
    """Run the full pipeline and return the list of report dicts."""
    return _core.reproduce(_text(config), None if out_dir is None else str(out_dir))


__all__ = [
    "ConfigError",
    "FormatError",
    "GbtEnsemble",
    "__version__",
    "default_config",
    "fit_gbt",
    "inverse_dft",
    "load_dataset",
    "load_reports",
    "reproduce",
    "simulate",
    "synthesize_sweep",
]
