"""Play-supervised goal-conditioned control on a 2-D desk playground."""

__version__ = "0.1.0"
