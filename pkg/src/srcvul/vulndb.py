"""Persistent store of vulnerability records.

One JSON object per line, preceded by a one-line header.  Records bind a
slicing vector to CVE metadata, the vulnerable slice, the patch text and
a keyword-derived category.  Record ids are content hashes, so
re-ingesting the same diff is idempotent.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .lsh import LshParams
from .metrics import SlicingVector

logger = logging.getLogger(__name__)

DB_FORMAT = "srcvul-db"
DB_VERSION = 1

ORIGIN_DELETED = "deleted"
ORIGIN_ADDED = "added"


class DbFormatError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class VulnCategory(Enum):
    MEMORY_MANAGEMENT = "MemoryManagement"
    API_MISUSE = "ApiMisuse"
    INPUT_HANDLING = "InputHandling"
    AUTHORIZATION_FLAW = "AuthorizationFlaw"
    ARITHMETIC_LOGIC = "ArithmeticLogic"
    CONCURRENCY = "Concurrency"
    UNCATEGORIZED = "Uncategorized"


_keyword_table: list[tuple[VulnCategory, list[str]]] | None = None


def _load_keyword_table() -> list[tuple[VulnCategory, list[str]]]:
    global _keyword_table
    if _keyword_table is None:
        raw = json.loads(
            resources.files("srcvul").joinpath("data/vuln_keywords.json").read_text()
        )
        _keyword_table = [
            (VulnCategory(entry["category"]), [k.lower() for k in entry["keywords"]])
            for entry in raw
        ]
    return _keyword_table


def categorize(description: str, patch_text: str = "") -> VulnCategory:
    """First matching keyword wins, in table order; no hit is Uncategorized.

    The description is consulted first; patch text only breaks ties when
    the description says nothing, since raw code matches keywords by
    accident far more often than prose does.
    """
    table = _load_keyword_table()
    for text in (description.lower(), patch_text.lower()):
        if not text:
            continue
        for category, keywords in table:
            if any(k in text for k in keywords):
                return category
    return VulnCategory.UNCATEGORIZED


def _fmt(value: float) -> str:
    return format(value, ".17g")


@dataclass(frozen=True)
class VulnRecord:
    record_id: str
    vector: SlicingVector
    cve_id: str
    description: str
    project: str
    version: str
    criterion: tuple[str, str, str]  # (file, function, variable)
    slice_lines: frozenset[int]
    patch_text: str
    origin: str  # "deleted" | "added"
    category: VulnCategory

    def to_json_line(self) -> str:
        """Canonical field order, floats at 17 significant digits."""
        vec = ", ".join(_fmt(c) for c in self.vector.dims)
        lines = ", ".join(str(n) for n in sorted(self.slice_lines))
        parts = [
            f'"record_id": {json.dumps(self.record_id)}',
            f'"vector": [{vec}]',
            f'"cve_id": {json.dumps(self.cve_id)}',
            f'"description": {json.dumps(self.description)}',
            f'"project": {json.dumps(self.project)}',
            f'"version": {json.dumps(self.version)}',
            '"criterion": {'
            + f'"file": {json.dumps(self.criterion[0])}, '
            + f'"function": {json.dumps(self.criterion[1])}, '
            + f'"variable": {json.dumps(self.criterion[2])}'
            + "}",
            f'"slice_lines": [{lines}]',
            f'"patch": {json.dumps(self.patch_text)}',
            f'"origin": {json.dumps(self.origin)}',
            f'"category": {json.dumps(self.category.value)}',
        ]
        return "{" + ", ".join(parts) + "}"

    @classmethod
    def from_json_obj(cls, obj: dict) -> "VulnRecord":
        crit = obj["criterion"]
        return cls(
            record_id=obj["record_id"],
            vector=SlicingVector(dims=tuple(float(c) for c in obj["vector"])),
            cve_id=obj["cve_id"],
            description=obj["description"],
            project=obj["project"],
            version=obj["version"],
            criterion=(crit["file"], crit["function"], crit["variable"]),
            slice_lines=frozenset(int(n) for n in obj["slice_lines"]),
            patch_text=obj["patch"],
            origin=obj["origin"],
            category=VulnCategory(obj["category"]),
        )


def derive_record_id(
    vector: SlicingVector, cve_id: str, criterion: tuple[str, str, str], origin: str
) -> str:
    payload = "|".join(
        [cve_id, origin, *criterion, *(_fmt(c) for c in vector.dims)]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def make_record(
    vector: SlicingVector,
    cve_id: str,
    description: str,
    project: str,
    version: str,
    criterion: tuple[str, str, str],
    slice_lines,
    patch_text: str,
    origin: str,
) -> VulnRecord:
    return VulnRecord(
        record_id=derive_record_id(vector, cve_id, criterion, origin),
        vector=vector,
        cve_id=cve_id,
        description=description,
        project=project,
        version=version,
        criterion=tuple(criterion),
        slice_lines=frozenset(slice_lines),
        patch_text=patch_text,
        origin=origin,
        category=categorize(description, patch_text),
    )


class VulnStore:
    """In-memory multi-map of records with JSON-lines persistence.

    Single writer during build; treat as immutable once loaded.
    """

    def __init__(self, lsh_params: LshParams | None = None):
        self._records: list[VulnRecord] = []
        self._by_id: dict[str, VulnRecord] = {}
        self.lsh_params = lsh_params

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def insert(self, record: VulnRecord) -> str:
        """Idempotent: re-inserting an identical record keeps one copy."""
        existing = self._by_id.get(record.record_id)
        if existing is not None:
            return existing.record_id
        self._records.append(record)
        self._by_id[record.record_id] = record
        return record.record_id

    def get(self, record_id: str) -> VulnRecord | None:
        return self._by_id.get(record_id)

    def records_for_cve(self, cve_id: str) -> list[VulnRecord]:
        return [r for r in self._records if r.cve_id == cve_id]

    def deleted_side(self) -> list[VulnRecord]:
        return [r for r in self._records if r.origin == ORIGIN_DELETED]

    def added_side(self, cve_id: str | None = None) -> list[VulnRecord]:
        return [
            r
            for r in self._records
            if r.origin == ORIGIN_ADDED and (cve_id is None or r.cve_id == cve_id)
        ]

    def lookup_by_vector(
        self, vector: SlicingVector, tolerance: float = 0.0
    ) -> list[VulnRecord]:
        """Records within component-wise tolerance, nearest (L2) first."""
        if tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        hits = []
        for rec in self._records:
            if all(
                abs(a - b) <= tolerance for a, b in zip(rec.vector.dims, vector.dims)
            ):
                dist = math.sqrt(
                    sum((a - b) ** 2 for a, b in zip(rec.vector.dims, vector.dims))
                )
                hits.append((dist, rec.record_id, rec))
        hits.sort(key=lambda t: (t[0], t[1]))
        return [rec for _d, _i, rec in hits]

    # -- persistence ---------------------------------------------------------

    def header_line(self) -> str:
        head = f'{{"format": "{DB_FORMAT}", "version": {DB_VERSION}'
        if self.lsh_params is not None:
            p = self.lsh_params
            head += (
                f', "lsh": {{"bands": {p.bands}, '
                f'"planes": {p.hyperplanes_per_band}, "seed": {p.seed}}}'
            )
        return head + "}"

    def dumps(self) -> str:
        out = [self.header_line()]
        out.extend(rec.to_json_line() for rec in self._records)
        return "\n".join(out) + "\n"

    def save(self, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(self.dumps())
        except OSError as exc:
            raise OSError(f"cannot write database {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "VulnStore":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read database {path}: {exc}") from exc
        return cls.loads(text)

    @classmethod
    def loads(cls, text: str) -> "VulnStore":
        lines = text.splitlines()
        if not lines:
            raise DbFormatError("empty database file", 1)
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise DbFormatError(f"unreadable header: {exc.msg}", 1) from exc
        if not isinstance(header, dict) or header.get("format") != DB_FORMAT:
            raise DbFormatError(f"not a {DB_FORMAT} file", 1)
        if header.get("version") != DB_VERSION:
            raise DbFormatError(f"unsupported version {header.get('version')!r}", 1)
        params = None
        if "lsh" in header:
            raw = header["lsh"]
            params = LshParams(
                hyperplanes_per_band=int(raw["planes"]),
                bands=int(raw["bands"]),
                seed=int(raw["seed"]),
            )
        store = cls(lsh_params=params)
        for idx, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                record = VulnRecord.from_json_obj(obj)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise DbFormatError(f"bad record: {exc}", idx) from exc
            store.insert(record)
        return store
