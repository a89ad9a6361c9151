"""Random-hyperplane LSH over slicing vectors.

Buckets candidate vectors for sublinear retrieval under cosine
similarity; exact verification stays with the caller.  Each band hashes
a vector to the sign pattern of its projections onto seeded Gaussian
hyperplanes, so vectors with high cosine similarity collide in at least
one band with high probability.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import SlicingVector

logger = logging.getLogger(__name__)

DEFAULT_BANDS = 8
DEFAULT_PLANES = 4
DEFAULT_SEED = 42


class ZeroVectorError(ValueError):
    """Cosine similarity is undefined for the zero vector."""


@dataclass(frozen=True)
class LshParams:
    hyperplanes_per_band: int = DEFAULT_PLANES
    bands: int = DEFAULT_BANDS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.hyperplanes_per_band < 1 or self.bands < 1:
            raise ValueError("bands and hyperplanes_per_band must be >= 1")
        if self.bands * self.hyperplanes_per_band > 256:
            raise ValueError("total hash bits capped at 256")


def cosine_similarity(a: SlicingVector | tuple, b: SlicingVector | tuple) -> float:
    """dot(a, b) / (|a| |b|); in [0, 1] for non-negative components."""
    av = a.dims if isinstance(a, SlicingVector) else tuple(a)
    bv = b.dims if isinstance(b, SlicingVector) else tuple(b)
    dot = sum(x * y for x, y in zip(av, bv))
    na = math.sqrt(sum(x * x for x in av))
    nb = math.sqrt(sum(y * y for y in bv))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("similarity undefined for zero vector")
    return dot / (na * nb)


@dataclass
class LshIndex:
    params: LshParams
    dim: int
    hyperplanes: np.ndarray  # (bands, planes, dim)
    tables: list[dict[int, set[str]]] = field(default_factory=list)
    vectors: dict[str, SlicingVector] = field(default_factory=dict)

    def signatures(self, vector: SlicingVector | tuple) -> list[int]:
        dims = vector.dims if isinstance(vector, SlicingVector) else tuple(vector)
        v = np.asarray(dims, dtype=float)
        sigs = []
        for band in range(self.params.bands):
            bits = self.hyperplanes[band] @ v >= 0.0
            sig = 0
            for bit in bits:
                sig = (sig << 1) | int(bit)
            sigs.append(sig)
        return sigs


def _draw_hyperplanes(params: LshParams, dim: int) -> np.ndarray:
    rng = np.random.default_rng(params.seed)
    return rng.standard_normal((params.bands, params.hyperplanes_per_band, dim))


def build_index(
    entries: dict[str, SlicingVector], params: LshParams | None = None
) -> LshIndex:
    """Deterministic for a fixed seed; rejects empty input and zero vectors."""
    if not entries:
        raise ValueError("cannot index an empty entry map")
    params = params or LshParams()
    dim = len(next(iter(entries.values())).dims)
    index = LshIndex(
        params=params,
        dim=dim,
        hyperplanes=_draw_hyperplanes(params, dim),
        tables=[{} for _ in range(params.bands)],
    )
    for record_id in sorted(entries):
        vector = entries[record_id]
        if all(c == 0 for c in vector.dims):
            raise ZeroVectorError(f"zero vector for record {record_id!r}")
        index.vectors[record_id] = vector
        for band, sig in enumerate(index.signatures(vector)):
            index.tables[band].setdefault(sig, set()).add(record_id)
    return index


def query(index: LshIndex, probe: SlicingVector | tuple) -> set[str]:
    """Union of the probe's bucket in every band: candidates only."""
    dims = probe.dims if isinstance(probe, SlicingVector) else tuple(probe)
    if all(c == 0 for c in dims):
        raise ZeroVectorError("cannot query with a zero vector")
    candidates: set[str] = set()
    for band, sig in enumerate(index.signatures(probe)):
        candidates |= index.tables[band].get(sig, set())
    return candidates


def cobucket_probability(cos_sim: float, params: LshParams) -> float:
    """Theoretical chance two vectors with this cosine share >= 1 band."""
    cos_sim = min(1.0, max(-1.0, cos_sim))
    p_plane = 1.0 - math.acos(cos_sim) / math.pi
    p_band = p_plane ** params.hyperplanes_per_band
    return 1.0 - (1.0 - p_band) ** params.bands
