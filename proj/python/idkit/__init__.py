"""Python interface to the idkit NER corpus diagnostics toolkit.

Report-shaped results come back as plain dicts with the same layout the
command-line tool prints under ``--json``.
"""

import json as _json

from . import _core
from ._core import (
    FEATURE_NAMES,
    BackendError,
    Corpus,
    DataError,
    Error,
    FeatureConfig,
    FormatError,
    ParseError,
    Surface,
    UsageError,
    o_label_proportion,
    read_attention,
    write_attention,
)

__all__ = [
    "FEATURE_NAMES", "BackendError", "Corpus", "DataError", "Error",
    "FeatureConfig", "FormatError", "ParseError", "Surface", "UsageError",
    "cli", "compute_asa", "compute_features", "correlate", "correlate_series",
    "density_family", "materialize", "morris", "o_label_proportion",
    "read_attention", "run_wom", "score", "sobol", "stratified_subsets",
    "write_attention",
]


def compute_features(corpus, config=None):
    return _json.loads(_core.compute_features(corpus, config or FeatureConfig()))


def score(gold, predicted):
    return _json.loads(_core.score(gold, predicted))


def density_family(corpus, rates, seed=0, config=None, rarity_bins=4):
    """Returns one manifest dict per retention rate; rarity_bins=1 disables stratification."""
    return [_json.loads(m) for m in _core.density_family(
        corpus, list(rates), seed, config or FeatureConfig(), rarity_bins)]


def stratified_subsets(corpus, count=23, seed=0, rarity_bins=4, rarity_control=True,
                       config=None):
    return [_json.loads(m) for m in _core.stratified_subsets(
        corpus, count, seed, rarity_bins, rarity_control, config or FeatureConfig())]


def materialize(corpus, manifest):
    return _core.materialize(corpus, _json.dumps(manifest))


def correlate(records_path, feature):
    return _json.loads(_core.correlate(str(records_path), feature))


def correlate_series(x, y):
    return _json.loads(_core.correlate_series(list(x), list(y)))


def morris(surface, trajectories=20, levels=6, seed=0, workers=1):
    return _json.loads(_core.morris(surface, trajectories, levels, seed, workers))


def sobol(surface, base_samples=1024, bootstrap=1000, seed=0, workers=1):
    return _json.loads(_core.sobol(surface, base_samples, bootstrap, seed, workers))


def compute_asa(attention, mode="row_wise_1d", weight="bin_index", per_layer=False):
    """ASA of one (layers, heads, L, L) attention array."""
    return _json.loads(_core.compute_asa(attention, mode, weight, per_layer))


def run_wom(corpus, translate=None, window_size=30, threshold=0.07, mode="wom",
            seed=0, max_in_flight=4, config=None):
    """Runs window-oriented augmentation.

    ``translate`` is None or "identity" for the identity mock, "paraphrase" for
    the paraphrasing mock, or a callable ``(text, source_lang, target_lang)``
    returning the translated text. Returns ``(augmented_corpus, report)``.
    """
    augmented, report = _core.run_wom(corpus, translate, window_size, threshold, mode,
                                      seed, max_in_flight, config or FeatureConfig())
    return augmented, _json.loads(report)


def cli(*args):
    """Runs the command-line tool in-process; returns (code, stdout, stderr)."""
    return _core.cli([str(a) for a in args])
