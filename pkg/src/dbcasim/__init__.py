"""DBCA channel-bonding model, learning controller, simulator, and harness."""

__version__ = "0.1.0"
