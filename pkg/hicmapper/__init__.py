"""
hicmapper

Topological summaries of Hi-C contact map collections: SCC distances,
multivariate Mapper graphs with automatic parameters, extended persistence
diagrams and bootstrap confidence levels.
"""

__version__ = "1.0.0"
