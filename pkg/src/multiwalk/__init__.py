"""Multi-walker discrete-time quantum walks.

Bosonic walkers on arbitrary graphs (:mod:`~multiwalk.walk`), the equivalent
single walker on the virtual graph of position multisets
(:mod:`~multiwalk.graph`), a sparse Fock engine with a permanent oracle
(:mod:`~multiwalk.fock`) and compilation between walks and linear-optics
networks (:mod:`~multiwalk.optics`).
"""

from ._backend import NAME as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
