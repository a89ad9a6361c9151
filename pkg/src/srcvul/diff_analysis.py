"""Unified-diff parsing and extraction of vulnerability-related statements.

A fix diff is the ground truth for what changed between a vulnerable
version and its patch: every deleted line points at the root cause,
every added line at the corrected behavior.  Both sides become
vulnerability-related statements; the variables occurring on them become
the slicing criteria.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from . import source_model
from .source_model import SourceUnit

logger = logging.getLogger(__name__)

_CVE_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")
UNTRACKED = "UNTRACKED"

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")

FILE_SCOPE = "<file-scope>"


class DiffFormatError(Exception):
    """Malformed diff input; the message names the offending hunk/line."""


@dataclass(frozen=True)
class HunkLine:
    tag: str  # ' ', '-', '+'
    text: str


@dataclass
class Hunk:
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    lines: list[HunkLine] = field(default_factory=list)

    def deleted(self) -> list[tuple[int, str]]:
        """(old-file line number, text) for every '-' line."""
        out = []
        old = self.old_start
        for hl in self.lines:
            if hl.tag == "-":
                out.append((old, hl.text))
                old += 1
            elif hl.tag == " ":
                old += 1
        return out

    def added(self) -> list[tuple[int, str]]:
        """(new-file line number, text) for every '+' line."""
        out = []
        new = self.new_start
        for hl in self.lines:
            if hl.tag == "+":
                out.append((new, hl.text))
                new += 1
            elif hl.tag == " ":
                new += 1
        return out

    def apply(self, old_lines: list[str], cursor: int, out: list[str]) -> int:
        """Replay this hunk against ``old_lines``; returns the new cursor."""
        target = self.old_start - 1
        while cursor < target:
            out.append(old_lines[cursor])
            cursor += 1
        for hl in self.lines:
            if hl.tag == " ":
                out.append(old_lines[cursor])
                cursor += 1
            elif hl.tag == "-":
                cursor += 1
            else:
                out.append(hl.text)
        return cursor


@dataclass
class FileDiff:
    old_path: str
    new_path: str
    hunks: list[Hunk] = field(default_factory=list)

    @property
    def source_path(self) -> str:
        """Logical path with the a/ b/ diff prefixes stripped."""
        return strip_diff_prefix(self.new_path if self.new_path != "/dev/null" else self.old_path)


@dataclass
class DiffDocument:
    cve_id: str
    file_diffs: list[FileDiff] = field(default_factory=list)
    description: str = ""
    commit_ref: str | None = None
    project: str = ""
    version: str = ""


@dataclass
class VrStatements:
    """Added/deleted diff lines, with unchanged-but-moved lines tracked."""

    deleted: set[tuple[str, int, str]] = field(default_factory=set)
    added: set[tuple[str, int, str]] = field(default_factory=set)
    # (file, old_line, new_line, stripped_text) for lines deleted and
    # re-added verbatim elsewhere; such a statement counts once.
    moved: set[tuple[str, int, int, str]] = field(default_factory=set)

    def distinct_count(self) -> int:
        return len(self.deleted) + len(self.added) - len(self.moved)


@dataclass
class VrVariables:
    # (file, function, variable, origin) with origin in {deleted-side, added-side}
    entries: set[tuple[str, str, str, str]] = field(default_factory=set)

    def names(self) -> set[str]:
        return {e[2] for e in self.entries}


def strip_diff_prefix(path: str) -> str:
    if path.startswith(("a/", "b/")):
        return path[2:]
    return path


def parse_unified_diff(text: str, cve_meta: dict | None = None) -> DiffDocument:
    """Parse unified-diff text plus optional sidecar metadata.

    ``cve_meta`` is the sidecar object: ``{"cve_id", "description",
    "project", "version", "commit_ref"?}``.  Unknown fields are ignored.
    """
    meta = cve_meta or {}
    cve_id = meta.get("cve_id", UNTRACKED)
    if not _CVE_RE.match(cve_id) and cve_id != UNTRACKED:
        raise DiffFormatError(f"bad cve_id {cve_id!r}: expected CVE-YYYY-NNNN or {UNTRACKED}")
    doc = DiffDocument(
        cve_id=cve_id,
        description=meta.get("description", ""),
        commit_ref=meta.get("commit_ref"),
        project=meta.get("project", ""),
        version=meta.get("version", ""),
    )
    lines = text.splitlines()
    i = 0
    current: FileDiff | None = None
    pending_old: str | None = None
    while i < len(lines):
        line = lines[i]
        if line.startswith("Binary files") or line.startswith("GIT binary patch"):
            logger.warning("binary file entry skipped: %s", line.strip())
            if current is not None and not current.hunks:
                doc.file_diffs.remove(current)
            current = None
            i += 1
            continue
        if line.startswith("--- "):
            pending_old = line[4:].split("\t")[0].strip()
            i += 1
            continue
        if line.startswith("+++ "):
            new_path = line[4:].split("\t")[0].strip()
            current = FileDiff(old_path=pending_old or new_path, new_path=new_path)
            doc.file_diffs.append(current)
            pending_old = None
            i += 1
            continue
        if line.startswith("@@"):
            m = _HUNK_RE.match(line)
            if not m:
                raise DiffFormatError(f"malformed hunk header: {line!r}")
            if current is None:
                raise DiffFormatError(f"hunk header before any file header: {line!r}")
            hunk = Hunk(
                old_start=int(m.group(1)),
                old_count=int(m.group(2) or "1"),
                new_start=int(m.group(3)),
                new_count=int(m.group(4) or "1"),
            )
            i += 1
            seen_old = seen_new = 0
            while i < len(lines) and (seen_old < hunk.old_count or seen_new < hunk.new_count):
                raw = lines[i]
                if raw.startswith("\\"):  # "\ No newline at end of file"
                    i += 1
                    continue
                tag = raw[:1] or " "
                if tag not in (" ", "-", "+"):
                    break
                body = raw[1:]
                hunk.lines.append(HunkLine(tag, body))
                if tag in (" ", "-"):
                    seen_old += 1
                if tag in (" ", "+"):
                    seen_new += 1
                i += 1
            if seen_old != hunk.old_count or seen_new != hunk.new_count:
                raise DiffFormatError(
                    f"hunk @@ -{hunk.old_start},{hunk.old_count} "
                    f"+{hunk.new_start},{hunk.new_count} @@ is truncated"
                )
            current.hunks.append(hunk)
            continue
        i += 1
    for fd in doc.file_diffs:
        fd.hunks.sort(key=lambda h: h.old_start)
        for a, b in zip(fd.hunks, fd.hunks[1:]):
            if a.old_start + a.old_count > b.old_start:
                raise DiffFormatError(
                    f"overlapping hunks in {fd.old_path} at old line {b.old_start}"
                )
    return doc


def load_sidecar(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _is_code_line(text: str) -> bool:
    stripped = text.strip()
    if not stripped:
        return False
    if stripped.startswith("//"):
        return False
    if stripped.startswith("/*") and (stripped.endswith("*/") or "*/" not in stripped):
        return False
    # block-comment continuation lines look like "* words" or "*/";
    # dereference statements look like "*p = ..." with no space after '*'
    if stripped == "*" or stripped == "*/" or stripped.startswith("* "):
        return False
    return True


def extract_vr_stmts(doc: DiffDocument) -> VrStatements:
    """Collect added/deleted code lines; blank and comment-only lines drop out."""
    stmts = VrStatements()
    for fd in doc.file_diffs:
        old_logical = strip_diff_prefix(fd.old_path)
        new_logical = strip_diff_prefix(fd.new_path)
        for hunk in fd.hunks:
            for line_no, text in hunk.deleted():
                if _is_code_line(text):
                    stmts.deleted.add((old_logical, line_no, text))
            for line_no, text in hunk.added():
                if _is_code_line(text):
                    stmts.added.add((new_logical, line_no, text))
    # pair up moved lines (deleted and re-added with identical stripped text)
    added_pool: dict[tuple[str, str], list[int]] = {}
    for f, ln, text in sorted(stmts.added):
        added_pool.setdefault((f, text.strip()), []).append(ln)
    for f, ln, text in sorted(stmts.deleted):
        key = (f, text.strip())
        pool = added_pool.get(key)
        if pool:
            stmts.moved.add((f, ln, pool.pop(0), text.strip()))
    return stmts


def apply_file_diff(fd: FileDiff, old_text: str) -> str:
    """Replay hunks over the old file content (round-trip validation)."""
    old_lines = old_text.splitlines()
    out: list[str] = []
    cursor = 0
    for hunk in fd.hunks:
        cursor = hunk.apply(old_lines, cursor, out)
    out.extend(old_lines[cursor:])
    text = "\n".join(out)
    if old_text.endswith("\n"):
        text += "\n"
    return text


def extract_vr_vars(
    stmts: VrStatements,
    vulnerable: SourceUnit,
    patched: SourceUnit,
    old_path: str | None = None,
    new_path: str | None = None,
) -> VrVariables:
    """Resolve statement lines to variables via the parsed units.

    Deleted lines resolve against the vulnerable unit, added lines against
    the patched one.  Identifiers that only appear as call targets are not
    variables; they surface later through the slice profiles' cfuncs.
    ``old_path``/``new_path`` restrict each side to one file of a
    multi-file diff.
    """
    vr = VrVariables()
    for side, unit, origin, path_filter in (
        ("deleted", vulnerable, "deleted-side", old_path),
        ("added", patched, "added-side", new_path),
    ):
        entries = stmts.deleted if side == "deleted" else stmts.added
        for file_path, line_no, text in sorted(entries):
            if path_filter is not None and file_path != path_filter:
                continue
            fn = _enclosing_function(unit, line_no)
            if fn is None:
                logger.warning(
                    "%s line %d lies outside any function; attributed to %s",
                    file_path, line_no, FILE_SCOPE,
                )
                for name in _line_identifiers(text):
                    vr.entries.add((file_path, FILE_SCOPE, name, origin))
                continue
            for occ in fn.variable_occurrences:
                if occ.line != line_no:
                    continue
                vr.entries.add((file_path, fn.name, occ.name, origin))
    return vr


def _enclosing_function(unit: SourceUnit, line_no: int):
    for fn in unit.functions:
        if fn.start_line <= line_no <= fn.end_line:
            return fn
    return None


def _line_identifiers(text: str) -> list[str]:
    """Variable-looking identifiers on a bare line (file-scope fallback)."""
    toks = source_model._tokenize(text, [])
    out: list[str] = []
    for i, tok in enumerate(toks):
        if tok.kind != "id":
            continue
        if tok.text in source_model._KEYWORDS or tok.text in source_model._TYPE_KEYWORDS:
            continue
        if source_model._MACRO_CONST.match(tok.text):
            continue
        if i + 1 < len(toks) and toks[i + 1].text == "(":
            continue  # call target
        if i > 0 and toks[i - 1].text in ("->", ".", "struct", "union", "enum"):
            continue
        if tok.text not in out:
            out.append(tok.text)
    return out
