"""diraclab: exact rational verification of Dirac-geometric identities on
sampled groupoid fibers."""

__version__ = "0.1.0"
