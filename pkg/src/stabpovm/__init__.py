"""Effective POVMs of Clifford and T-doped circuits with ancillas."""

__version__ = "0.1.0"

from .pauli import PauliString, ProjectivePauli, parse_pauli  # noqa: E402
from .groups import PauliSubgroup, canonicalize, group, load_group  # noqa: E402
from .circuits import DopedCircuit, Gate, load_circuit  # noqa: E402
from .analysis import (AncillaSpec, EffectivePovmReport, analyze_circuit, analyze_doped,  # noqa: E402
                       bounds_table, span_dimension)
