"""Label schemes, land-use classes, and the canonical node-feature layout.

Everything downstream (feature assembly, dataset files, model input sizes,
reports) indexes into the constants defined here, so the order of these
lists is part of the on-disk format. `feature_checksum()` guards it.
"""

from __future__ import annotations

import hashlib

# Building classes (ground-truth scheme, 9 classes).
CLASS_NAMES = [
    "apartments",
    "detached",
    "semi_detached",
    "terraced",
    "industrial",
    "commercial",
    "public",
    "agricultural",
    "other",
]
N_CLASSES = len(CLASS_NAMES)
RESIDENTIAL_CLASSES = frozenset([0, 1, 2, 3])

# Task names and their label spaces.
TASK_COMBINED = "combined9"
TASK_TYPOLOGY = "typology5"
TASK_BINARY = "binary2"
TASKS = (TASK_COMBINED, TASK_TYPOLOGY, TASK_BINARY)

TYPOLOGY5_NAMES = ["apartments", "detached", "semi_detached", "terraced", "non_residential"]
BINARY2_NAMES = ["residential", "non_residential"]

# Custom land-use scheme (15 classes), order fixed.
LAND_USE_NAMES = [
    "continuous_urban_fabric",
    "dense_medium_urban_fabric",
    "low_density_urban_fabric",
    "very_low_density_urban_fabric",
    "isolated_structures",
    "industrial_commercial_public",
    "transport",
    "mine_dump_construction",
    "artificial_vegetated",
    "agricultural",
    "forests",
    "shrub_herbaceous",
    "open_spaces",
    "wetlands",
    "water",
]
N_LAND_USE = len(LAND_USE_NAMES)

# Degree-of-urbanization categories; file codes 1/2/3 map onto these.
DEGURBA_NAMES = ["city", "town_suburb", "rural"]
DEGURBA_CODES = {1: "city", 2: "town_suburb", 3: "rural"}

# Default study-area country list (EU-27 plus no/ch/gb), lexicographic.
# The list is configuration; 30 slots are reserved in the feature vector.
COUNTRIES = [
    "at", "be", "bg", "ch", "cy", "cz", "de", "dk", "ee", "es",
    "fi", "fr", "gb", "gr", "hr", "hu", "ie", "it", "lt", "lu",
    "lv", "mt", "nl", "no", "pl", "pt", "ro", "se", "si", "sk",
]
N_COUNTRIES = len(COUNTRIES)

BUILDING_LEVEL_NAMES = [
    "bld_area",
    "bld_perimeter",
    "bld_corners",
    "bld_anisotropy",
    "bld_longest_axis",
    "bld_elongation",
    "bld_convexity",
    "bld_orientation",
    "bld_adjacent_count",
    "bld_shared_wall_len",
]

BLOCK_LEVEL_NAMES = [
    "blk_num_footprints",
    "blk_avg_area",
    "blk_std_area",
    "blk_total_area",
    "blk_perimeter",
    "blk_longest_axis",
    "blk_elongation",
    "blk_convexity",
    "blk_orientation",
    "blk_corners",
]

FEATURE_NAMES = (
    BUILDING_LEVEL_NAMES
    + BLOCK_LEVEL_NAMES
    + ["lu_" + n for n in LAND_USE_NAMES]
    + ["lu_urban_atlas_covered"]
    + ["deg_" + n for n in DEGURBA_NAMES]
    + ["ctry_" + c for c in COUNTRIES]
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 69

# Column spans of the feature groups, used by normalization and importance.
GROUP_SLICES = {
    "building_level": slice(0, 10),
    "block_level": slice(10, 20),
    "land_use": slice(20, 36),
    "degurba": slice(36, 39),
    "country": slice(39, 69),
}
N_NUMERICAL = 20  # columns 0..19 are z-scored; one-hots stay untouched


def feature_checksum() -> str:
    """Checksum of the canonical feature order, embedded in dataset files."""
    blob = "\n".join(FEATURE_NAMES).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def remap_label(label: int, task: str) -> int:
    """Project a 9-class label id into the given task's label space."""
    if label < 0 or label >= N_CLASSES:
        raise ValueError(f"label {label} outside combined9 space")
    if task == TASK_COMBINED:
        return label
    if task == TASK_TYPOLOGY:
        return label if label in RESIDENTIAL_CLASSES else 4
    if task == TASK_BINARY:
        return 0 if label in RESIDENTIAL_CLASSES else 1
    raise ValueError(f"unknown task {task!r}")


def task_num_classes(task: str) -> int:
    return {TASK_COMBINED: 9, TASK_TYPOLOGY: 5, TASK_BINARY: 2}[task]


def task_class_names(task: str) -> list[str]:
    return {
        TASK_COMBINED: CLASS_NAMES,
        TASK_TYPOLOGY: TYPOLOGY5_NAMES,
        TASK_BINARY: BINARY2_NAMES,
    }[task]
