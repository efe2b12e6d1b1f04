"""Comoment maps, Chevalley-Eilenberg (co)homology and exact exterior calculus
for multisymplectic group actions on spheres and Euclidean spaces."""

__version__ = "0.1.0"
