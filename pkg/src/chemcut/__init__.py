"""Electronic-structure ansatz circuits, circuit cutting and overhead analysis."""

__version__ = "0.1.0"
