"""Modal-logic workbench: formulas, Kripke semantics, filtrations, minimal
canonical models and Hilbert-style proof checking for K."""

__version__ = "0.1.0"
