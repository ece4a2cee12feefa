"""Web access-log analyzer with classic and grouped Apriori mining."""

__version__ = "0.1.0"
