"""srcvul: vulnerable code clone detection via variable-level slice vectors."""

from .detector import CloneMatch, ScanReport, detect_clones, recommend_patch, slice_target
from .diff_analysis import (
    DiffDocument,
    VrStatements,
    VrVariables,
    extract_vr_stmts,
    extract_vr_vars,
    parse_unified_diff,
)
from .lsh import LshIndex, LshParams, build_index, cosine_similarity, query
from .metrics import (
    SliceMetrics,
    SlicingVector,
    compute_metrics,
    encode_vector,
    generate_vs_vectors,
)
from .slicer import (
    CompleteSlice,
    SliceProfile,
    compose_complete_slice,
    compute_slice_profiles,
    final_pass,
)
from .source_model import FunctionUnit, SourceUnit, VarOccurrence, parse_source
from .vulndb import VulnCategory, VulnRecord, VulnStore, categorize, make_record

__version__ = "0.1.0"

__all__ = [
    "CloneMatch",
    "CompleteSlice",
    "DiffDocument",
    "FunctionUnit",
    "LshIndex",
    "LshParams",
    "ScanReport",
    "SliceMetrics",
    "SliceProfile",
    "SlicingVector",
    "SourceUnit",
    "VarOccurrence",
    "VrStatements",
    "VrVariables",
    "VulnCategory",
    "VulnRecord",
    "VulnStore",
    "build_index",
    "categorize",
    "compose_complete_slice",
    "compute_metrics",
    "compute_slice_profiles",
    "cosine_similarity",
    "detect_clones",
    "encode_vector",
    "extract_vr_stmts",
    "extract_vr_vars",
    "final_pass",
    "generate_vs_vectors",
    "make_record",
    "parse_source",
    "parse_unified_diff",
    "query",
    "recommend_patch",
    "slice_target",
    "__version__",
]
