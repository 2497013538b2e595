DEFAULT_LOG_LEVEL = "WARNING"

DEFAULT_SUBGROUP_GUARD = 512
DEFAULT_CHAIN_GUARD = 5_000_000
DEFAULT_PARTITION_GUARD = 9
DEFAULT_TREE_GUARD = 7
DEFAULT_LIE_GUARD = 7
DEFAULT_TREE_MODULE_GUARD = 6
DEFAULT_WEYL_GUARD = 8
DEFAULT_ISO_NODE_CAP = 200_000
DEFAULT_ZIGZAG_GUARD = 5
DEFAULT_FIBRE_GUARD = 6
DEFAULT_SIMPLEX_GUARD = 2_000_000
DEFAULT_SURJECTION_ORACLE_POINTS = 5
DEFAULT_MAP_RANK_FACES = 600
DEFAULT_LATTICE_ORDER_GUARD = 0
MUL_TABLE_MAX_ORDER = 720

DEFAULT_SAMPLES = 100
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1

VERDICT_PASS = "PASS"
VERDICT_FAIL = "FAIL"
VERDICT_REPORT_ONLY = "REPORT-ONLY"
VERDICT_SKIPPED = "SKIPPED"

CHECK_NAMES = (
    "partition-homology",
    "fixed-point-equivalence",
    "tree-fixed-points",
    "tree-homeo-roundtrip",
    "finality",
    "initiality",
    "zigzag-betti",
    "nonisovariant-acyclic",
    "isovariant-wedge",
    "weyl-identity",
    "subgroup-lattice",
    "psl27-lattice",
    "lie-character",
    "solvable-wedge",
)
