"""Complete Abelian integrals along ovals of hyperelliptic Hamiltonians."""

__version__ = "0.1.0"
