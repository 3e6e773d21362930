"""Perfect tensors, holographic entanglement entropy and NMR decoherence simulation."""

__version__ = "0.1.0"
