"""Maslov-type index iteration for symplectic paths.

Rotation quasimorphism and mean index, Conley-Zehnder indices with upper and
lower extensions, splitting numbers from basic normal forms, the precise
iteration formula, verified common index jump events, ellipsoid orbit
systems with exact quadratic-irrational arithmetic, and the four-step
irrational-ellipticity certification pipeline.
"""

__version__ = "0.1.0"
