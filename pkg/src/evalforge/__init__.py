"""evalforge: batch engine for discipline-level peer-review evaluations."""

__version__ = "0.1.0"
