"""Floquet dynamics of driven stabilizer codes.

Exact few-qubit simulation of periodically driven surface and toric codes,
with the nonlocal diagnostics (spectral pairing, spin-glass order, relative
phases of cat-state eigenmodes) that separate topologically ordered time
crystals from trivial ones.
"""

__version__ = "0.1.0"
