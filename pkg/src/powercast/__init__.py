"""Energy-optimal convergecast and broadcast for power-aware mobile agents."""

__version__ = "0.1.0"
