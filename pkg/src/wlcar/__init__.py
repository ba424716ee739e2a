"""Widely linear complex autoregressive process of order one."""

__version__ = "0.1.0"
