"""Land prices, fundamentals and bubbles in stochastic OLG economies."""

__version__ = "0.1.0"
