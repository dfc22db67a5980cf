"""Link-level simulator for APP, neural and autoencoder transceivers over AWGN."""

__version__ = "0.1.0"
