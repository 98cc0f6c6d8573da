"""Darboux frames, squared-torsion energy and relaxed elastic lines of
second kind on oriented surfaces in Minkowski 3-space."""

__version__ = "0.1.0"
