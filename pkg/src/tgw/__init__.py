"""tgw: finite-level workbench for type-space groupoids of decidable
complete first-order theories."""

__version__ = "0.1.0"
