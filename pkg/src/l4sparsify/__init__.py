"""Learning unitary sparsifying transforms by l4-norm maximization.

Submodules: ``matkit`` (unitary linear algebra), ``models`` (signal models and
datasets), ``objective`` (l4 objectives and derivatives), ``learn`` (MSP and
coordinate ascent), ``analysis`` (verification experiments), ``simulate``
(uplink BER) and ``cli``.
"""
from .errors import L4Error

__version__ = "0.1.0"
__all__ = ["L4Error", "__version__"]
