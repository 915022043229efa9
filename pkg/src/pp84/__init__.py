"""PP84 two-way quantum communication: simulator and closed-form analysis."""

__version__ = "0.1.0"
