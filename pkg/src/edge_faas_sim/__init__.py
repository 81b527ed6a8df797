"""Discrete-event simulator comparing stateful FaaS execution models at the edge."""

__version__ = "0.1.0"
