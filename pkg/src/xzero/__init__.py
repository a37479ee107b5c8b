"""Computational tools for a mixed-Tsirelson type Banach space built from the
norming sets G0 and W0: certified norms, special-sequence coding, separation
checks and the auxiliary-space machinery."""
from __future__ import annotations

from .core import FamilyTag, Vector, evaluate, validate
from .params import TINY, WIDE, ParameterSystem, load_parameters, make_surrogate, paper_parameters

__version__ = "0.1.0"

__all__ = ["FamilyTag", "Vector", "evaluate", "validate", "TINY", "WIDE", "ParameterSystem",
           "load_parameters", "make_surrogate", "paper_parameters", "__version__"]
