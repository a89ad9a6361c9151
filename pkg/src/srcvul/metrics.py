"""Slice-based metrics and the 4-dimensional slicing vector.

Five metrics summarize a complete slice against its function's module
size: slice count (profiles combined), slice size (statement lines),
slice coverage, slice identifiers and slice spatial.  Four of them form
the vector <SC, SCvg, SI, SS>; slice size is absorbed into coverage.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .slicer import CompleteSlice, Criterion

logger = logging.getLogger(__name__)


class MetricsError(ValueError):
    pass


class DegenerateModuleError(MetricsError):
    pass


class EmptySliceError(MetricsError):
    pass


@dataclass(frozen=True)
class SliceMetrics:
    sc: float  # contributing profiles / module size
    sz: int  # distinct statement lines in the slice
    scvg: float  # sz / module size
    si: float  # unique identifiers / module size
    ss: float  # criterion def-to-last-use span / module size


@dataclass(frozen=True)
class SlicingVector:
    dims: tuple[float, float, float, float]  # <SC, SCvg, SI, SS>

    def __post_init__(self):
        if len(self.dims) != 4:
            raise MetricsError(f"expected 4 dimensions, got {len(self.dims)}")
        if any(not math.isfinite(c) or c < 0 for c in self.dims):
            raise MetricsError(f"vector components must be finite and >= 0: {self.dims}")
        if all(c == 0 for c in self.dims):
            raise MetricsError("all-zero slicing vector rejected")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.dims


def compute_metrics(slice_: CompleteSlice, module_size: int) -> SliceMetrics:
    if module_size <= 0:
        raise DegenerateModuleError(
            f"module size {module_size} for {slice_.criterion!r}"
        )
    if not slice_.lines:
        raise EmptySliceError(f"empty slice for {slice_.criterion!r}")
    sz = len(slice_.lines)
    # spatial span: slice lines restricted to the criterion's own def/use
    # extent, so cross-function growth cannot blow up the span
    window = [ln for ln in slice_.lines if slice_.span_first <= ln <= slice_.span_last]
    if not window:
        window = [slice_.span_first, slice_.span_last]
    first, last = min(window), max(window)
    return SliceMetrics(
        sc=slice_.contributing_profiles / module_size,
        sz=sz,
        scvg=sz / module_size,
        si=len(slice_.unique_identifiers) / module_size,
        ss=(last - first) / module_size,
    )


def encode_vector(metrics: SliceMetrics) -> SlicingVector:
    return SlicingVector(dims=(metrics.sc, metrics.scvg, metrics.si, metrics.ss))


def vector_for(slice_: CompleteSlice, module_size: int) -> SlicingVector:
    return encode_vector(compute_metrics(slice_, module_size))


def generate_vs_vectors(
    slices: dict[Criterion, CompleteSlice] | list[CompleteSlice],
    module_sizes: dict[Criterion, int],
) -> dict[CompleteSlice, SlicingVector]:
    """Vectorize every slice; invalid ones are skipped with a diagnostic."""
    items = slices.values() if isinstance(slices, dict) else slices
    out: dict[CompleteSlice, SlicingVector] = {}
    for slice_ in items:
        size = module_sizes.get(slice_.criterion)
        if size is None:
            logger.warning("no module size for %r; slice skipped", slice_.criterion)
            continue
        try:
            out[slice_] = vector_for(slice_, size)
        except MetricsError as exc:
            logger.warning("slice %r skipped: %s", slice_.criterion, exc)
    return out
