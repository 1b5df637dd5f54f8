"""Parametric standard cells: geometry scaling, MEOL parasitics,
transient characterization tables, and logic-feature extraction."""

from .geometry import (CANONICAL_GATES, CellDims, CellGeometry, CellTemplate,
                       GATE_TEMPLATES, MEOLParasitics,
                       effective_contact_resistance, extract_meol, scale_layout)
from .characterize import (ArcTable, CharTable, CellLibrary, build_library,
                           characterize, load_library, save_library)
from .features import fo3_features

__all__ = [
    "CANONICAL_GATES", "CellDims", "CellGeometry", "CellTemplate",
    "GATE_TEMPLATES", "MEOLParasitics", "effective_contact_resistance",
    "extract_meol", "scale_layout", "ArcTable", "CharTable", "CellLibrary",
    "build_library", "characterize", "load_library", "save_library",
    "fo3_features",
]
