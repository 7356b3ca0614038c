"""grafcet-lint: structural analysis of IEC 60848 GRAFCET specifications.

Over-approximates step reachability, step concurrency and variable values
without building the state space, and reports behavioral design flaws such
as race conditions, unsatisfiable conditions and unbounded activations.
"""

__version__ = "0.1.0"

from .ingest import load_spec, parse_spec, serialize  # noqa: F401
from .pipeline import analyze_spec  # noqa: F401
