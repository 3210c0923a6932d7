"""Dependence predictability testing for bivariate time series.

Thin wrapper over the compiled extension. ``analyze`` returns the report as
a dict; everything else is re-exported from the extension module.
"""

import json as _json

try:
    from ._copred import (
        DataSet,
        __version__,
        analyze_json,
        block_length,
        derive_state,
        describe,
        fit_margin,
        load_csv,
        log_returns,
        mc_table_csv,
        simulate,
        write_csv,
    )
except ImportError:  # source build: extension sits next to the package
    from _copred import (
        DataSet,
        __version__,
        analyze_json,
        block_length,
        derive_state,
        describe,
        fit_margin,
        load_csv,
        log_returns,
        mc_table_csv,
        simulate,
        write_csv,
    )

__all__ = [
    "DataSet",
    "analyze",
    "analyze_json",
    "block_length",
    "derive_state",
    "describe",
    "fit_margin",
    "load_csv",
    "log_returns",
    "mc_table_csv",
    "simulate",
    "write_csv",
    "__version__",
]


def analyze(dataset, **kwargs):
    """Run the full pipeline and return the report as a dict."""
    return _json.loads(analyze_json(dataset, **kwargs))
