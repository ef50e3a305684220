"""Educational data mining toolkit: ID3 trees, evaluation, Apriori, correlation and placement rules."""

__version__ = "0.1.0"
