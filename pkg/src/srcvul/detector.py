"""End-to-end clone detection over a target source tree.

Slices every variable of the target, vectorizes the slices, pulls
candidate records from the LSH index (or scans exhaustively), verifies
each candidate with exact cosine similarity at the configured threshold
and attaches the stored patch to every surviving match.

A match is demoted from ``vulnerable`` to ``likely-patched`` when the
scanned system expresses the same CVE's added-side (fixed) pattern at a
similarity at least as high as the match itself: a system that already
contains the fix would otherwise keep flagging itself.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

from . import lsh as lsh_mod
from .lsh import LshParams, cosine_similarity
from .metrics import SlicingVector, generate_vs_vectors
from .slicer import CompleteSlice, Criterion, slice_all
from .source_model import SourceUnit, read_source
from .vulndb import VulnRecord, VulnStore

logger = logging.getLogger(__name__)

SOURCE_SUFFIXES = (".c", ".h", ".cc", ".cpp", ".cxx", ".hpp", ".hh")

STATUS_VULNERABLE = "vulnerable"
STATUS_LIKELY_PATCHED = "likely-patched"

DEFAULT_THRESHOLD = 0.8
DEFAULT_REVIEW_BAND = 0.05


class ScanError(Exception):
    pass


@dataclass(frozen=True)
class CloneMatch:
    target_criterion: Criterion
    target_vector: SlicingVector
    record: VulnRecord
    similarity: float
    status: str = STATUS_VULNERABLE
    needs_review: bool = False

    @property
    def recommended_patch(self) -> str:
        return self.record.patch_text


@dataclass
class ScanStats:
    files_parsed: int = 0
    functions: int = 0
    slices: int = 0
    vectors: int = 0
    candidates_examined: int = 0
    matches: int = 0


@dataclass
class ScanReport:
    matches: list[CloneMatch] = field(default_factory=list)
    stats: ScanStats = field(default_factory=ScanStats)
    config_echo: dict = field(default_factory=dict)

    def vulnerable_matches(self) -> list[CloneMatch]:
        return [m for m in self.matches if m.status == STATUS_VULNERABLE]

    def to_json_obj(self) -> dict:
        return {
            "matches": [
                {
                    "target": {
                        "file": m.target_criterion[0],
                        "function": m.target_criterion[1],
                        "variable": m.target_criterion[2],
                        "vector": list(m.target_vector.dims),
                    },
                    "cve_id": m.record.cve_id,
                    "similarity": m.similarity,
                    "patch": m.record.patch_text,
                    "status": m.status,
                    "needs_review": m.needs_review,
                    "record_id": m.record.record_id,
                    "category": m.record.category.value,
                }
                for m in self.matches
            ],
            "stats": {
                "files_parsed": self.stats.files_parsed,
                "functions": self.stats.functions,
                "slices": self.stats.slices,
                "vectors": self.stats.vectors,
                "candidates_examined": self.stats.candidates_examined,
                "matches": self.stats.matches,
                "config": self.config_echo,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"scanned {self.stats.files_parsed} files, "
            f"{self.stats.functions} functions, {self.stats.slices} slices",
            f"config: {self.config_echo}",
            "",
        ]
        if not self.matches:
            lines.append("no clone matches")
        for m in self.matches:
            lines.append(recommend_patch(m))
            lines.append("")
        return "\n".join(lines)


def collect_source_files(root: str) -> list[str]:
    if not os.path.isdir(root):
        raise ScanError(f"target root is not a directory: {root}")
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if name.endswith(SOURCE_SUFFIXES):
                found.append(os.path.join(dirpath, name))
    return found


def parse_tree(root: str) -> list[SourceUnit]:
    units = []
    for path in collect_source_files(root):
        rel = os.path.relpath(path, root)
        try:
            unit = read_source(path)
        except Exception as exc:  # unparseable file: skip, never abort a scan
            logger.warning("skipping unparseable file %s: %s", rel, exc)
            continue
        unit.path = rel
        if not unit.functions:
            logger.warning("no functions found in %s", rel)
        units.append(unit)
    return units


def slice_target(root: str) -> dict[Criterion, tuple[CompleteSlice, int]]:
    """Slice every variable of every function under ``root``."""
    units = parse_tree(root)
    if not units:
        raise ScanError(f"no parseable C/C++ files under {root}")
    slices, sizes = slice_all(units)
    return {key: (sl, sizes[key]) for key, sl in slices.items()}


def detect_clones(
    target: str,
    db: VulnStore,
    threshold: float = DEFAULT_THRESHOLD,
    params: LshParams | None = None,
    brute_force: bool = False,
    review_band: float = DEFAULT_REVIEW_BAND,
) -> ScanReport:
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    params = params or db.lsh_params or LshParams()
    stats = ScanStats()
    report = ScanReport(
        stats=stats,
        config_echo={
            "threshold": threshold,
            "bands": params.bands,
            "planes": params.hyperplanes_per_band,
            "seed": params.seed,
            "brute_force": brute_force,
            "review_band": review_band,
        },
    )

    units = parse_tree(target)
    stats.files_parsed = len(units)
    stats.functions = sum(len(u.functions) for u in units)
    if not units:
        logger.warning("nothing to scan under %s", target)
        return report
    slices, sizes = slice_all(units)
    stats.slices = len(slices)
    vectors = generate_vs_vectors(slices, sizes)
    by_criterion: dict[Criterion, SlicingVector] = {
        sl.criterion: vec for sl, vec in vectors.items()
    }
    stats.vectors = len(by_criterion)

    if len(db) == 0:
        logger.warning("vulnerability database is empty; nothing can match")
        return report

    deleted = {rec.record_id: rec for rec in db.deleted_side()}
    index = None
    if deleted and not brute_force:
        index = lsh_mod.build_index(
            {rid: rec.vector for rid, rec in deleted.items()}, params
        )

    raw_matches: list[tuple[Criterion, SlicingVector, VulnRecord, float]] = []
    for criterion in sorted(by_criterion):
        probe = by_criterion[criterion]
        if index is not None:
            candidate_ids = sorted(lsh_mod.query(index, probe))
        else:
            candidate_ids = sorted(deleted)
        stats.candidates_examined += len(candidate_ids)
        for rid in candidate_ids:
            rec = deleted[rid]
            sim = cosine_similarity(probe, rec.vector)
            if sim >= threshold:
                raw_matches.append((criterion, probe, rec, sim))

    # patched-pattern evidence per CVE: best similarity between any target
    # slice and any added-side record of that CVE
    cves_needing_check = {rec.cve_id for _c, _v, rec, _s in raw_matches}
    max_added_sim: dict[str, float] = {}
    for cve_id in cves_needing_check:
        best = 0.0
        for added in db.added_side(cve_id):
            for vec in by_criterion.values():
                best = max(best, cosine_similarity(vec, added.vector))
        max_added_sim[cve_id] = best

    for criterion, probe, rec, sim in raw_matches:
        demoted = max_added_sim.get(rec.cve_id, 0.0) >= sim
        report.matches.append(
            CloneMatch(
                target_criterion=criterion,
                target_vector=probe,
                record=rec,
                similarity=sim,
                status=STATUS_LIKELY_PATCHED if demoted else STATUS_VULNERABLE,
                needs_review=threshold <= sim < threshold + review_band,
            )
        )
    report.matches.sort(
        key=lambda m: (-m.similarity, m.record.record_id, m.target_criterion)
    )
    stats.matches = len(report.matches)
    return report


def recommend_patch(match: CloneMatch) -> str:
    """Stored patch verbatim plus context a human needs to adapt it."""
    rec = match.record
    header = (
        f"[{match.status}] {rec.cve_id}  similarity {match.similarity:.4f}"
        + ("  [needs review]" if match.needs_review else "")
    )
    target = "::".join(match.target_criterion)
    origin = "::".join(rec.criterion)
    body = [
        header,
        f"  target:   {target}",
        f"  record:   {origin}  ({rec.origin}-side, {rec.category.value})",
        f"  project:  {rec.project} {rec.version}".rstrip(),
    ]
    if rec.description:
        body.append(f"  note:     {rec.description}")
    if rec.patch_text.strip():
        # verbatim, so the block can be fed straight to `patch -p1`
        body.append("  recommended patch:")
        body.append(rec.patch_text.rstrip("\n"))
    else:
        body.append("  recommended patch: no-patch-available")
    return "\n".join(body)
