"""Offline extraction of dense patch features and shared region labels.

Feeds image pairs into a deterministic descriptor backbone, clusters both
descriptor grids jointly so region class ids agree across the pair, and
writes the results as VGFT/VGLM binary files plus a JSON pair manifest for
downstream correspondence tooling.
"""

from .backbone import BACKBONES, Backbone, BackboneError, get_backbone
from .extract import (
    ExtractionConfig,
    extract_pair,
    extract_pairs,
    joint_patch_labels,
    upsample_labels,
)
from .formats import write_vgft, write_vglm

__all__ = [
    "BACKBONES",
    "Backbone",
    "BackboneError",
    "ExtractionConfig",
    "extract_pair",
    "extract_pairs",
    "get_backbone",
    "joint_patch_labels",
    "upsample_labels",
    "write_vgft",
    "write_vglm",
]

__version__ = "0.1.0"
