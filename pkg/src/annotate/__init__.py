"""
Visual prompt rendering: numbered candidate markers on images.
"""

from src.annotate.arrows import (
    ARROW_COLORS,
    BLANK,
    DIRECTIONS,
    OBJECT_REFERENTIAL,
    ArrowGrid,
    ArrowSample,
    gen_arrow_dataset,
    write_arrow_dataset,
)
from src.annotate.candidates import build_candidates
from src.annotate.io import blank_image, encode_png, read_image, write_image
from src.annotate.renderer import AnnotatedImage, depth_to_style, render
from src.annotate.spacing import enforce_spacing
from src.models.config import AnnotationStyle

__all__ = [
    "ARROW_COLORS",
    "BLANK",
    "DIRECTIONS",
    "OBJECT_REFERENTIAL",
    "AnnotatedImage",
    "AnnotationStyle",
    "ArrowGrid",
    "ArrowSample",
    "blank_image",
    "build_candidates",
    "depth_to_style",
    "encode_png",
    "enforce_spacing",
    "gen_arrow_dataset",
    "read_image",
    "render",
    "write_arrow_dataset",
    "write_image",
]
