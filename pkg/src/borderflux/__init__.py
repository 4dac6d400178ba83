"""borderflux - mobility statistics, flux models and border strength from CDRs."""

__version__ = "0.1.0"
