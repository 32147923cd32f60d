"""Fabricate visually grounded pretext-task instruction data.

Three generators turn plain images (plus, for correspondence, precomputed
dense features) into image-instruction-response triplets: rotation prediction,
point-wise colorization, and point correspondence. A mixer injects the
generated samples into an existing instruction-tuning manifest at a set
percentage of its size. Every stage is deterministic given its seed.
"""

from .colorization import (
    ColorTaskConfig,
    ColorVocab,
    gen_color_sample,
    is_grayscale,
    mean_rgb,
    nearest_color_name,
    sample_distinct_points,
)
from .corpus import ImageCorpus
from .correspondence import (
    FeatureMap,
    PairData,
    PairRecord,
    RegionLabelMap,
    gen_corr_sample,
    load_pair,
    load_pair_manifest,
    match_point,
    patch_center,
    patch_region_map,
    pixel_to_patch,
    read_feature_map,
    read_label_map,
    region_patches,
    sample_distractors,
    select_object_class,
    write_feature_map,
    write_label_map,
    write_pair_manifest,
)
from .errors import (
    DecodeError,
    DegenerateImage,
    DuplicateId,
    EmptyRegion,
    GrayscaleSource,
    InvalidAngle,
    PointOutOfBounds,
    RegionTooSmall,
    RejectionExhausted,
    SchemaError,
    SslInstructError,
    WindowOutOfBounds,
)
from .imaging import (
    CropLog,
    ImageBuffer,
    JitterLog,
    MarkerStyle,
    Point,
    color_jitter,
    compose_side_by_side,
    crop,
    decode_image,
    draw_point_marker,
    encode_png,
    hflip,
    load_image,
    random_resized_crop,
    resize_bilinear,
    rotate90,
    save_png,
    to_composite_point,
    to_grayscale,
    vflip,
)
from .manifest import (
    IMAGE_TOKEN,
    SSL_TASKS,
    TASK_TAGS,
    TOOL_NAME,
    TOOL_VERSION,
    DatasetManifest,
    GeneratedSample,
    InstructionSample,
    Mismatch,
    PromptTemplate,
    ValidationReport,
    load_template,
    manifest_digest,
    manifest_to_json,
    read_manifest,
    rederive_response,
    validate_answer_keys,
    validate_manifest,
    write_manifest,
)
from .mixer import MixConfig, allocate_tasks, mix, ssl_count
from .rotation import ANGLES, gen_rotation_sample
from .rng import SHUFFLE_ALGORITHM, TASK_CODES, permutation, seeded_shuffle, stream
from .views import ViewConfig, ViewParams, gen_views

__version__ = "0.1.0"

__all__ = [
    "ANGLES",
    "ColorTaskConfig",
    "ColorVocab",
    "CropLog",
    "DatasetManifest",
    "DecodeError",
    "DegenerateImage",
    "DuplicateId",
    "EmptyRegion",
    "FeatureMap",
    "GeneratedSample",
    "GrayscaleSource",
    "IMAGE_TOKEN",
    "ImageBuffer",
    "ImageCorpus",
    "InstructionSample",
    "InvalidAngle",
    "JitterLog",
    "MarkerStyle",
    "Mismatch",
    "MixConfig",
    "PairData",
    "PairRecord",
    "Point",
    "PointOutOfBounds",
    "PromptTemplate",
    "RegionLabelMap",
    "RegionTooSmall",
    "RejectionExhausted",
    "SHUFFLE_ALGORITHM",
    "SSL_TASKS",
    "SchemaError",
    "SslInstructError",
    "TASK_CODES",
    "TASK_TAGS",
    "TOOL_NAME",
    "TOOL_VERSION",
    "ValidationReport",
    "ViewConfig",
    "ViewParams",
    "WindowOutOfBounds",
    "allocate_tasks",
    "color_jitter",
    "compose_side_by_side",
    "crop",
    "decode_image",
    "draw_point_marker",
    "encode_png",
    "gen_color_sample",
    "gen_corr_sample",
    "gen_rotation_sample",
    "gen_views",
    "hflip",
    "is_grayscale",
    "load_image",
    "load_pair",
    "load_pair_manifest",
    "load_template",
    "manifest_digest",
    "manifest_to_json",
    "match_point",
    "mean_rgb",
    "mix",
    "nearest_color_name",
    "patch_center",
    "patch_region_map",
    "permutation",
    "pixel_to_patch",
    "random_resized_crop",
    "read_feature_map",
    "read_label_map",
    "read_manifest",
    "rederive_response",
    "region_patches",
    "resize_bilinear",
    "rotate90",
    "sample_distinct_points",
    "sample_distractors",
    "save_png",
    "seeded_shuffle",
    "select_object_class",
    "ssl_count",
    "stream",
    "to_composite_point",
    "to_grayscale",
    "validate_answer_keys",
    "validate_manifest",
    "vflip",
    "write_feature_map",
    "write_label_map",
    "write_manifest",
    "write_pair_manifest",
]
