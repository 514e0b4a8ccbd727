"""Helmholtz exterior scattering on an annulus: DtN-truncated boundary value
problem solved with neural subspace bases, least-squares coefficient recovery,
and alternating subspace optimization."""

__version__ = "0.1.0"
