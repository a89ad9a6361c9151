#!/usr/bin/env python3
"""Self-contained walkthrough of the whole pipeline.

Writes a tiny corpus (a vulnerable module, its fixed version, the fix
diff with metadata, and a target tree containing a renamed clone) into a
scratch directory, builds the vulnerability database, scans the target
and prints the report.

Usage: python scripts/demo_end_to_end.py [--keep DIR]
"""

import argparse
import difflib
import json
import os
import sys
import tempfile

from srcvul import cli

VULNERABLE = """\
/* string table append */
static int table_append(int used, char *name)
{
\tint slot;
\tslot = used + 1;
\tstore_name(name, slot);
\treturn slot;
}
"""

PATCHED = """\
/* string table append */
static int table_append(int used, char *name)
{
\tint slot;
\tslot = used + 1;
\tif (slot < TABLE_MAX && name_ok(name)) {
\t\tstore_name_checked(name, slot);
\t\tmark_dirty(slot);
\t}
\treturn slot;
}
"""

# a Type-2 clone: same shape, renamed identifiers
TARGET = """\
/* label registry append (cloned) */
static int registry_add(int filled, char *label)
{
\tint pos;
\tpos = filled + 1;
\tstore_name(label, pos);
\treturn pos;
}
"""

SIDECAR = {
    "cve_id": "CVE-2024-31337",
    "description": "buffer overflow: the table index is stored without a bounds check",
    "project": "demo",
    "version": "1.0",
    "commit_ref": "demo-fix",
}


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def lay_out(base):
    rel = "src/table.c"
    write(os.path.join(base, "vulnerable", rel), VULNERABLE)
    write(os.path.join(base, "patched", rel), PATCHED)
    diff = "".join(
        difflib.unified_diff(
            VULNERABLE.splitlines(keepends=True),
            PATCHED.splitlines(keepends=True),
            fromfile=f"a/{rel}",
            tofile=f"b/{rel}",
        )
    )
    write(os.path.join(base, "diffs", "CVE-2024-31337.diff"), diff)
    write(os.path.join(base, "diffs", "CVE-2024-31337.json"), json.dumps(SIDECAR, indent=1))
    write(os.path.join(base, "target", "src/registry.c"), TARGET)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--keep", metavar="DIR", help="lay the corpus out here and keep it")
    args = parser.parse_args(argv)

    base = args.keep or tempfile.mkdtemp(prefix="srcvul-demo-")
    lay_out(base)
    db = os.path.join(base, "demo-db.jsonl")

    print(f"== corpus in {base}\n")
    print("== build-db")
    rc = cli.main(
        [
            "build-db",
            os.path.join(base, "diffs"),
            os.path.join(base, "vulnerable"),
            os.path.join(base, "patched"),
            "--db",
            db,
        ]
    )
    if rc != 0:
        return rc
    print("\n== scan (expect one vulnerable match: the renamed clone)")
    rc = cli.main(["scan", os.path.join(base, "target"), "--db", db])
    print(f"\n== scan exit code {rc} (1 means vulnerable matches found)")
    print("\n== inspect CVE-2024-31337")
    cli.main(["inspect", "CVE-2024-31337", "--db", db])
    return 0


if __name__ == "__main__":
    sys.exit(main())
