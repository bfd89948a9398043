"""ALM/KM toolchain and the coreALM library subset."""

__version__ = "0.1.0"
