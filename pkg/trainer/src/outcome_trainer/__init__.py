"""Binary trial-outcome classifier training and embedding export."""

__version__ = "0.1.0"
