"""Python bindings for the nprox embedding interpretability pipeline."""

import json
from pathlib import Path

from ._nprox import (
    ConfigError,
    ProximityStack,
    SparseSymmetricMatrix,
    attraction,
    build_stack,
    connected_components,
    cooccurrence,
    degree_filter,
    delta_integral,
    fit_sigmoid,
    interpretability,
    js_distance,
    kmeans_1d,
    modularity,
    normalize_delta,
    ppmi,
    random_embedding,
    svd_embed,
    synth_corpus,
    walk_embed,
)
from ._nprox import run_config as _run_config

NETWORKS = ("S", "P", "H")


def run(config=None, *, text=None, overrides=()):
    """Run the pipeline from a YAML config file, or from YAML `text`.

    Reports are written to the config's output_dir; the JSON report is returned
    as a dict. Relative paths in `text` resolve against the working directory.
    """
    if text is None:
        path = Path(config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        text, base = path.read_text(), path.parent
    else:
        base = Path(".")
    report, _ = _run_config(text, base, list(overrides))
    return json.loads(report)


__all__ = [
    "ConfigError",
    "NETWORKS",
    "ProximityStack",
    "SparseSymmetricMatrix",
    "attraction",
    "build_stack",
    "connected_components",
    "cooccurrence",
    "degree_filter",
    "delta_integral",
    "fit_sigmoid",
    "interpretability",
    "js_distance",
    "kmeans_1d",
    "modularity",
    "normalize_delta",
    "ppmi",
    "random_embedding",
    "run",
    "svd_embed",
    "synth_corpus",
    "walk_embed",
]
