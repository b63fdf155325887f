"""cubepaths - Hypercube Path Partition Solver"""

__version__ = "1.0.0"
