"""Skein categories of surfaces computed from skeletal fusion-category data.

Modules
    fusion_core       loading and checking F/R-symbol data, dimensions
    hom_engine        morphisms between words of simples, duality and braiding
    diagram_dsl       a textual language for string diagrams and its evaluator
    trace_center      horizontal traces, Drinfeld-type centers, projectors
    karoubi           presented linear categories and idempotent completion
    surface_pipeline  surface categories along independent routes
    cli_io            catalog, command line and reports
"""

__version__ = "0.1.0"

from .fusion_core import CategoryError, FusionData, load_category  # noqa: E402

__all__ = ["__version__", "CategoryError", "FusionData", "load_category"]
