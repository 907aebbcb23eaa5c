"""Thermodynamics of quantum channels: free energies, entropy, energy, distillation and work."""

__version__ = "0.1.0"
