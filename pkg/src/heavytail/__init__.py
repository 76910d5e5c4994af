"""Heavy-tail analysis of procurement-style transaction records."""

__version__ = "0.1.0"
