"""Passive photo forgery localization: JPEG block inconsistency and
direction-filter detectors, a synthetic forgery corpus and a
precision/recall harness."""

__version__ = "0.1.0"

from .block import BlockFeatureGrid, BlockMask, block_features, classify_blocks, threshold_sweep
from .direction import DirectionParams, detect_direction, std_edge_image
from .evaluate import EvalCounts, evaluate_corpus, match_regions, precision_recall
from .imaging import load_image, save_image, save_mask, to_luma, to_v_channel
from .jpeg import dct8x8, idct8x8, quality_to_matrix, quantize, recompress
from .regions import Region, extract_regions
from .synth import build_corpus, copy_create, copy_move

__all__ = [
    "BlockFeatureGrid", "BlockMask", "DirectionParams", "EvalCounts", "Region",
    "block_features", "build_corpus", "classify_blocks", "copy_create", "copy_move",
    "dct8x8", "detect_direction", "evaluate_corpus", "extract_regions", "idct8x8",
    "load_image", "match_regions", "precision_recall", "quality_to_matrix", "quantize",
    "recompress", "save_image", "save_mask", "std_edge_image", "threshold_sweep", "to_luma", "to_v_channel",
]
