"""Decompose mean outcome gaps between groups across nested clusters.

Level columns are always given finest first: ["school", "district"] makes
the school level 1 and the district the coarsest level.
"""

import json

from . import _gapdecomp
from ._gapdecomp import GapDecompError

__all__ = ["GapDecompError", "decompose_csv", "decompose_values", "simulate", "render"]


def decompose_csv(csv_text, outcome_col, group_col, level_cols, reference, **options):
    """Full results document (meta, parameters, decompositions, warnings) as a dict."""
    return json.loads(
        _gapdecomp.decompose_csv(csv_text, outcome_col, group_col, list(level_cols), reference,
                                 **options))


def decompose_values(within, contextual, segregation, approach, target, groups,
                     level_names=None, reference="reference"):
    """Decompose from coefficient values.

    within: G-1 within gaps. contextual: L x (G-1). segregation: L matrices of
    (G-1) x (G-1), row = receiving group, column = share group.
    """
    if level_names is None:
        level_names = [f"level{l + 1}" for l in range(len(segregation))]
    return json.loads(
        _gapdecomp.decompose_values(reference, list(groups), list(level_names), within,
                                    contextual, list(segregation), approach, target))


def simulate(**config):
    """Returns (csv_text, truth dict)."""
    csv_text, truth = _gapdecomp.simulate(**config)
    return csv_text, json.loads(truth)


def render(results, fmt="md"):
    """Markdown tables or stacked-bar CSV from a results document (dict or JSON text)."""
    text = results if isinstance(results, str) else json.dumps(results)
    return _gapdecomp.render(text, fmt)
