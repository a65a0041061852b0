"""Single-angle cost reconstruction and sequential grid optimization for variational circuits."""

__version__ = "0.1.0"
