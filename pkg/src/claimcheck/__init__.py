"""Check-worthy post detection: corpus composition, preprocessing, a trainable
multi-label scorer, evaluation/significance tooling, benchmarking, and serving."""

__version__ = "0.1.0"
