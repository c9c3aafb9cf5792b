"""Finite-element cardiac electrophysiology with relaxation (Cattaneo) fluxes."""

__version__ = "0.1.0"
