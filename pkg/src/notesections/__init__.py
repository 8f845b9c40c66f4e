"""Section discovery, segmentation, label-tree similarity and section-level augmentation for clinical notes."""

__version__ = "0.1.0"
