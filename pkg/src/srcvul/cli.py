"""Command-line entry point: build-db, scan, inspect.

Configuration precedence: flags > SRCVUL_* environment > ./srcvul.toml >
defaults.  Diagnostics go to stderr; machine output to stdout.
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import diff_analysis, vulndb
from .detector import (
    DEFAULT_REVIEW_BAND,
    DEFAULT_THRESHOLD,
    ScanError,
    detect_clones,
)
from .lsh import DEFAULT_BANDS, DEFAULT_PLANES, DEFAULT_SEED, LshParams
from .metrics import MetricsError, vector_for
from .slicer import slice_all
from .source_model import SourceUnit
from .vulndb import DbFormatError, VulnStore, make_record

logger = logging.getLogger(__name__)

EXIT_CLEAN = 0
EXIT_MATCHES = 1
EXIT_ERROR = 2

CONFIG_FILE = "srcvul.toml"
ENV_PREFIX = "SRCVUL_"


@dataclass
class Config:
    threshold: float = DEFAULT_THRESHOLD
    lsh: LshParams = field(default_factory=LshParams)
    db_path: str = "srcvul-db.jsonl"
    brute_force: bool = False
    review_band: float = DEFAULT_REVIEW_BAND
    output_format: str = "text"  # text | json
    # True when bands/planes/seed came from a flag, env var or config file;
    # otherwise a scan defers to the parameters stored in the db header
    lsh_explicit: bool = False

    def validate(self) -> None:
        if not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.review_band < 0:
            raise ValueError(f"review band must be >= 0, got {self.review_band}")
        if self.output_format not in ("text", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")


_FIELD_TYPES = {
    "threshold": float,
    "bands": int,
    "planes": int,
    "seed": int,
    "brute_force": bool,
    "review_band": float,
    "format": str,
    "db": str,
}


def _coerce(name: str, value):
    want = _FIELD_TYPES[name]
    if want is bool and isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return want(value)


def _layered_settings(cli_values: dict) -> dict:
    settings: dict = {}
    config_path = os.path.join(os.getcwd(), CONFIG_FILE)
    if os.path.exists(config_path):
        with open(config_path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ValueError(f"{CONFIG_FILE}: {exc}") from exc
        for key, value in raw.items():
            if key in _FIELD_TYPES:
                settings[key] = _coerce(key, value)
            else:
                logger.warning("%s: unknown setting %r ignored", CONFIG_FILE, key)
    for key in _FIELD_TYPES:
        env_name = ENV_PREFIX + key.upper()
        if env_name in os.environ:
            settings[key] = _coerce(key, os.environ[env_name])
    for key, value in cli_values.items():
        if value is not None:
            settings[key] = value
    return settings


def build_config(args: argparse.Namespace) -> Config:
    cli_values = {
        "threshold": getattr(args, "threshold", None),
        "bands": getattr(args, "bands", None),
        "planes": getattr(args, "planes", None),
        "seed": getattr(args, "seed", None),
        "brute_force": True if getattr(args, "brute_force", False) else None,
        "review_band": getattr(args, "review_band", None),
        "format": getattr(args, "format", None),
        "db": getattr(args, "db", None),
    }
    settings = _layered_settings(cli_values)
    config = Config(
        threshold=settings.get("threshold", DEFAULT_THRESHOLD),
        lsh=LshParams(
            hyperplanes_per_band=settings.get("planes", DEFAULT_PLANES),
            bands=settings.get("bands", DEFAULT_BANDS),
            seed=settings.get("seed", DEFAULT_SEED),
        ),
        db_path=settings.get("db", "srcvul-db.jsonl"),
        brute_force=settings.get("brute_force", False),
        review_band=settings.get("review_band", DEFAULT_REVIEW_BAND),
        output_format=settings.get("format", "text"),
        lsh_explicit=any(k in settings for k in ("bands", "planes", "seed")),
    )
    config.validate()
    return config


# -- build-db -----------------------------------------------------------------


def cmd_build_db(
    diff_dir: str, vulnerable_src: str, patched_src: str, out: str, config: Config
) -> int:
    diff_paths = sorted(
        glob.glob(os.path.join(diff_dir, "*.diff"))
        + glob.glob(os.path.join(diff_dir, "*.patch"))
    )
    if not diff_paths:
        print("no records: no .diff/.patch files found", file=sys.stderr)
        return EXIT_ERROR

    vuln_units = _parse_tree_relative(vulnerable_src)
    patched_units = _parse_tree_relative(patched_src)
    vuln_slices, vuln_sizes = slice_all(vuln_units)
    patched_slices, patched_sizes = slice_all(patched_units)
    sides = {
        "deleted-side": (vuln_slices, vuln_sizes, vulndb.ORIGIN_DELETED),
        "added-side": (patched_slices, patched_sizes, vulndb.ORIGIN_ADDED),
    }

    store = VulnStore(lsh_params=config.lsh)
    vul_by_path = {u.path: u for u in vuln_units}
    pat_by_path = {u.path: u for u in patched_units}
    n_cves = 0
    n_stmts = 0
    n_vars = 0
    for diff_path in diff_paths:
        sidecar_path = os.path.splitext(diff_path)[0] + ".json"
        if not os.path.exists(sidecar_path):
            logger.warning("skipping %s: sidecar %s missing", diff_path, sidecar_path)
            continue
        meta = diff_analysis.load_sidecar(sidecar_path)
        with open(diff_path, encoding="utf-8") as fh:
            diff_text = fh.read()
        try:
            doc = diff_analysis.parse_unified_diff(diff_text, meta)
        except diff_analysis.DiffFormatError as exc:
            logger.warning("skipping %s: %s", diff_path, exc)
            continue
        n_cves += 1
        stmts = diff_analysis.extract_vr_stmts(doc)
        n_stmts += stmts.distinct_count()
        for fd in doc.file_diffs:
            old_logical = diff_analysis.strip_diff_prefix(fd.old_path)
            new_logical = diff_analysis.strip_diff_prefix(fd.new_path)
            vuln_unit = vul_by_path.get(old_logical)
            patched_unit = pat_by_path.get(new_logical)
            if vuln_unit is None and patched_unit is None:
                logger.warning(
                    "%s: no source for %s or %s", doc.cve_id, old_logical, new_logical
                )
                continue
            vr = diff_analysis.extract_vr_vars(
                stmts,
                vuln_unit or _EMPTY_UNIT,
                patched_unit or _EMPTY_UNIT,
                old_path=old_logical,
                new_path=new_logical,
            )
            n_vars += len(vr.entries)
            for file_path, fn_name, var, vr_origin in sorted(vr.entries):
                slices, sizes, origin = sides[vr_origin]
                criterion = (file_path, fn_name, var)
                slice_ = slices.get(criterion)
                if slice_ is None:
                    logger.warning("%s: no slice for %r", doc.cve_id, criterion)
                    continue
                try:
                    vector = vector_for(slice_, sizes[criterion])
                except MetricsError as exc:
                    logger.warning("%s: %r skipped: %s", doc.cve_id, criterion, exc)
                    continue
                record = make_record(
                    vector=vector,
                    cve_id=doc.cve_id,
                    description=doc.description,
                    project=doc.project,
                    version=doc.version,
                    criterion=criterion,
                    slice_lines=slice_.lines,
                    patch_text=diff_text,
                    origin=origin,
                )
                store.insert(record)

    print(
        f"CVEs: {n_cves}  vr_stmts: {n_stmts}  vr_vars: {n_vars}  records: {len(store)}"
    )
    if len(store) == 0:
        print("no records", file=sys.stderr)
        return EXIT_ERROR
    store.save(out)
    print(f"database written to {out}")
    return EXIT_CLEAN


_EMPTY_UNIT = SourceUnit(path="<missing>")


def _parse_tree_relative(root: str):
    from .detector import parse_tree

    if not os.path.isdir(root):
        raise ScanError(f"source tree missing: {root}")
    return parse_tree(root)


# -- scan ---------------------------------------------------------------------


def cmd_scan(target: str, config: Config) -> int:
    try:
        store = VulnStore.load(config.db_path)
    except (DbFormatError, OSError) as exc:
        print(f"cannot load database: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = detect_clones(
        target,
        store,
        threshold=config.threshold,
        params=config.lsh if config.lsh_explicit else None,
        brute_force=config.brute_force,
        review_band=config.review_band,
    )
    if config.output_format == "json":
        print(report.to_json())
    else:
        print(report.to_text())
    return EXIT_MATCHES if report.vulnerable_matches() else EXIT_CLEAN


# -- inspect ------------------------------------------------------------------


def cmd_inspect(selector: str, config: Config) -> int:
    try:
        store = VulnStore.load(config.db_path)
    except (DbFormatError, OSError) as exc:
        print(f"cannot load database: {exc}", file=sys.stderr)
        return EXIT_ERROR
    hits = [
        rec
        for rec in store
        if rec.record_id == selector or rec.cve_id == selector
    ]
    if not hits:
        print(f"no record matches {selector!r}", file=sys.stderr)
        return EXIT_MATCHES
    for rec in hits:
        vec = ", ".join(f"{c:.3f}" for c in rec.vector.dims)
        print(f"record {rec.record_id}  {rec.cve_id}  [{rec.origin}-side]")
        print(f"  vector:    <{vec}>")
        print(f"  criterion: {'::'.join(rec.criterion)}")
        print(f"  category:  {rec.category.value}")
        print(f"  project:   {rec.project} {rec.version}".rstrip())
        if rec.description:
            print(f"  summary:   {rec.description}")
        print(f"  slice:     {sorted(rec.slice_lines)}")
        if rec.patch_text.strip():
            print("  patch:")
            for line in rec.patch_text.splitlines():
                print(f"    {line}")
        else:
            print("  patch:     (none stored)")
    return EXIT_CLEAN


# -- argument parsing ----------------------------------------------------------


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--db",
        help="path of the vulnerability database file (default: srcvul-db.jsonl)",
    )
    parser.add_argument(
        "--threshold",
        type=float,
        help="cosine similarity cutoff for reporting a clone; 0.8 by default, "
        "the empirical balance point between missed renamed/edited clones "
        "(higher values) and noisy reports (lower values)",
    )
    parser.add_argument(
        "--bands", type=int, help=f"LSH bands (default {DEFAULT_BANDS})"
    )
    parser.add_argument(
        "--planes",
        type=int,
        help=f"hyperplanes per LSH band (default {DEFAULT_PLANES})",
    )
    parser.add_argument(
        "--seed", type=int, help=f"seed for the LSH hyperplanes (default {DEFAULT_SEED})"
    )
    parser.add_argument(
        "--brute-force",
        action="store_true",
        help="skip the LSH index and compare against every record (exact mode)",
    )
    parser.add_argument(
        "--review-band",
        type=float,
        help="matches within [threshold, threshold+band) are tagged for "
        f"human review (default {DEFAULT_REVIEW_BAND})",
    )
    parser.add_argument(
        "--format", choices=("text", "json"), help="report format (default text)"
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcvul",
        description="Detect vulnerable code clones by variable-level slice "
        "vectors and recommend the known patch for each match.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser(
        "build-db",
        help="build the vulnerability database from fix diffs and source trees",
    )
    p_build.add_argument("diff_dir", help="directory of .diff/.patch files with JSON sidecars")
    p_build.add_argument("vulnerable_src", help="source tree the diffs apply to")
    p_build.add_argument("patched_src", help="source tree with the fixes applied")
    _add_common_flags(p_build)

    p_scan = sub.add_parser("scan", help="scan a target tree against the database")
    p_scan.add_argument("target", help="root of the C/C++ tree to scan")
    _add_common_flags(p_scan)

    p_inspect = sub.add_parser("inspect", help="pretty-print records by CVE or record id")
    p_inspect.add_argument("selector", help="CVE id or record id")
    _add_common_flags(p_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
    except ValueError as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.command == "build-db":
            return cmd_build_db(
                args.diff_dir,
                args.vulnerable_src,
                args.patched_src,
                config.db_path,
                config,
            )
        if args.command == "scan":
            return cmd_scan(args.target, config)
        if args.command == "inspect":
            return cmd_inspect(args.selector, config)
    except (ScanError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
