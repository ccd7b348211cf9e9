"""Ray-level growth diagnostics for the linearized Euler equations."""

__version__ = "0.1.0"
