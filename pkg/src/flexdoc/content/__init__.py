"""Content generation and scoring: carving, summarization, similarity."""

from .carving import Seam, carve, energy_map, min_seam
from .generate import generate_alternatives, get_plugin, register_plugin
from .raster import VariantCache, load_raster, png_bytes, save_raster
from .similarity import similarity, tokenize
from .summarize import TextVariant, split_sentences, summarize

__all__ = [
    "Seam", "carve", "energy_map", "min_seam",
    "generate_alternatives", "get_plugin", "register_plugin",
    "VariantCache", "load_raster", "png_bytes", "save_raster",
    "similarity", "tokenize",
    "TextVariant", "split_sentences", "summarize",
]
