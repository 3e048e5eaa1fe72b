"""Change detection, scoring and path-change correlation for RTT measurements."""

__version__ = "0.1.0"
