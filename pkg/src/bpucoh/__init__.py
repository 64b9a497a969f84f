"""Exact p-local computation of the low-degree cohomology of BPU_n.

The package rebuilds the Serre spectral sequence of
``BU_n -> BPU_n -> K(Z, 3)`` in total degrees below ``2p + 5`` and reports
the p-primary subgroups of ``H^s(BPU_n; Z)``, checking every intermediate
identity on the concrete instance it is asked about.
"""

from .exceptions import InvariantViolation
from .homology import GroupDescriptor, build_complex, exactness_report, group_table
from .plocal import PLocalScalar, binom_mod_p, is_unit, vp

__version__ = "0.1.0"

__all__ = [
    "GroupDescriptor",
    "InvariantViolation",
    "PLocalScalar",
    "binom_mod_p",
    "build_complex",
    "exactness_report",
    "group_table",
    "is_unit",
    "vp",
    "__version__",
]
