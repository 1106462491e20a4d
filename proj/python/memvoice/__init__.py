# python/memvoice/__init__.py
#
# Copyright 2026 memvoice authors
# SPDX-License-Identifier: Apache-2.0

"""Python surface of the memvoice core.

The heavy lifting lives in the `_core` extension module. Configs cross the
boundary as JSON text; this wrapper keeps them as plain dicts.
"""

import json as _json
import os as _os


def _load_core():
    try:
        from . import _core  # installed next to the package
        return _core
    except ImportError:
        pass
    # Development layout: the extension sits in the CMake build tree. The
    # test harness points MEMVOICE_EXT_DIR at it.
    ext_dir = _os.environ.get("MEMVOICE_EXT_DIR")
    if not ext_dir:
        raise ImportError(
            "memvoice._core is not built; install the package or set "
            "MEMVOICE_EXT_DIR to the directory containing the extension")
    import importlib.util
    import glob
    candidates = glob.glob(_os.path.join(ext_dir, "_core*.so"))
    if not candidates:
        raise ImportError(f"no _core extension found in {ext_dir}")
    spec = importlib.util.spec_from_file_location(
        __name__ + "._core", candidates[0])
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


_core = _load_core()
__version__ = _core.__version__

__all__ = [
    "default_config",
    "validate_config",
    "corpus_summary",
    "edit_distance",
    "token_error_rate",
    "labels_from_string",
    "gradient_check",
]


def default_config():
    """The default run configuration as a dict."""
    return _json.loads(_core.default_config())


def validate_config(config):
    """Cross-validates a config dict; raises ValueError on any problem."""
    _core.validate_config(_json.dumps(config))


def corpus_summary(config=None, seed=None):
    """Generates the synthetic corpus in memory and summarizes it.

    Returns split sizes, speaker ids per split, and the frozen-memory
    speaker columns. Deterministic in (config, seed).
    """
    if config is None:
        config = default_config()
    if seed is None:
        seed = config.get("seed", 0)
    return _json.loads(_core.corpus_summary(_json.dumps(config), seed))


def edit_distance(ref, hyp):
    """Minimum-edit alignment counts between two label sequences."""
    return _core.edit_distance(list(ref), list(hyp))


def token_error_rate(ref, hyp):
    """Edit distance normalized by reference length; 0.0 for an empty ref."""
    counts = edit_distance(ref, hyp)
    total = sum(counts.values())
    return total / len(ref) if ref else 0.0


def labels_from_string(text):
    """Maps lowercase a-z text to label ids."""
    return _core.labels_from_string(text)


def gradient_check(similarity="scaled-dot", seed=20):
    """Max relative error of analytic gradients on a fixed tiny model."""
    return _core.gradient_check(similarity, seed)
