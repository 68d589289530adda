"""
Isospectral real/complex partner potentials built from a superpotential
U = a + ib with a = b'/(2b), and numerical checks that the PT-symmetric
complex partner of the Scarf II well has the real spectrum of its partner
plus one zero-energy state.
"""

__version__ = "0.1.0"
