"""Executable RC11 RAR view-based semantics with client-library composition.

Explores litmus programs exhaustively, evaluates observability assertions,
checks Owicki-Gries proof outlines over reachable states, and decides
contextual refinement between abstract objects and their implementations via
forward simulation.
"""

__version__ = "0.1.0"
