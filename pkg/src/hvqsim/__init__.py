"""Hidden-variable (quasiclassical) quantum computer simulator with quantum oracles."""

__version__ = "0.1.0"
