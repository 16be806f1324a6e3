"""Loop-loaded slot antenna miniaturization: swarm optimizer, analytical
resonance model and regression surrogates."""

__version__ = "0.1.0"
