"""Exact numerical checks of complementary families, BB84/E91 QKD and the Mean King problem."""

__version__ = "0.1.0"
