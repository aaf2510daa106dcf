"""LOS coverage of vehicular networks - RSUs and vehicle relays on Poisson roads."""

__version__ = "0.1.0"
