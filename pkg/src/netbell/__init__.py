"""Bell-inequality workbench for quantum networks with stabilizer-code sources."""

from netbell.pauli import PauliString

__all__ = ["PauliString"]

__version__ = "0.1.0"
