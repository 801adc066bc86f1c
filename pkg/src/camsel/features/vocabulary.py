"""The 23 detectable object classes of the surgical scene."""

OBJECT_CLASSES = (
    "aspirator",
    "bistoury",
    "detector",
    "drainage tube",
    "electrotome",
    "gauze",
    "glue",
    "hand",
    "head",
    "hemostat",
    "injector",
    "nesis",
    "porteaiguille",
    "sterile patches",
    "thyroid retractor",
    "thyroid retractor back",
    "thyroid retractor front",
    "thyroid tissue",
    "tissue scissors",
    "towel forceps",
    "treatment bowl",
    "tweezer",
    "wound",
)

NUM_CLASSES = len(OBJECT_CLASSES)
CLASS_INDEX = {name: i for i, name in enumerate(OBJECT_CLASSES)}

# Classes whose visible box area approximates the unobstructed surgical field;
# the area-maximization baseline scores cameras by their total area.
SURGICAL_FIELD_CLASSES = ("wound", "thyroid tissue")

# Per-class slots in a semantic vector: count, mean cx, mean cy, mean w,
# mean h, total area.
STATS_PER_CLASS = 6
SEMANTIC_DIM = NUM_CLASSES * STATS_PER_CLASS
