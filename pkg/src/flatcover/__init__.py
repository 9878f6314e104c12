"""Flat covers of polyomino stains by congruent sticker copies."""

__version__ = "0.1.0"
