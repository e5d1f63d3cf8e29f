"""Query aspect mining: log candidates, class propagation, dedup, grouping, selection."""

from .candidates import SegmentedQuery
from .config import Config, load_config
from .kernels import BACKEND
from .pipeline import AspectReport, run_query, run_suite

__version__ = "0.1.0"

__all__ = ["AspectReport", "BACKEND", "Config", "SegmentedQuery", "load_config", "run_query", "run_suite"]
