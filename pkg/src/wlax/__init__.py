"""wlax: exact-arithmetic W-algebra Lax operator engine."""

__version__ = "0.1.0"
