"""Cotlar identities, Riesz-transform multipliers and martingale transforms."""

__version__ = "0.1.0"
