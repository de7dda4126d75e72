"""Figure rendering for spt CSV artifacts."""

from .spec import FigureSpec, SpecError, load_specs
from .render import BatchResult, batch, render

__version__ = "0.1.0"
