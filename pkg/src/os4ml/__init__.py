"""Open Space for Machine Learning: a self-hostable desk-scale AutoML platform."""

__version__ = "0.1.0"
