"""Exact sampling and percolation geometry for attractive spin models on planar lattices."""
from ._kernels import BACKEND
from .lattice import LatticeGraph, build_lattice, half_plane, preset
from .model import Configuration, SpinModel, preset_ferro, preset_hardcore, preset_staggered
from .sampler import PLUS, MINUS, Sampler, make_dobrushin_bc, sample_batch

__version__ = "0.1.0"
__all__ = ["BACKEND", "LatticeGraph", "build_lattice", "half_plane", "preset", "Configuration",
           "SpinModel", "preset_ferro", "preset_hardcore", "preset_staggered", "PLUS", "MINUS",
           "Sampler", "make_dobrushin_bc", "sample_batch", "__version__"]
