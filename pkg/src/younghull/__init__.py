"""Young hulls of closed convex trigonometric curves in even dimensions."""

__version__ = "0.1.0"
