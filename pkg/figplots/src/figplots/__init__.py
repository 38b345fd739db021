"""Render figure images from the KPO experiment CSV datasets."""

__version__ = "0.1.0"

from .csvio import SchemaError, read_dataset
from .plots import FIGURES, PlotSpec, build_panels, render
