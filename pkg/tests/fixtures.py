"""Shared fixture corpus: a kernel-style sound/core/info.c pair.

The vulnerable file places `snd_info_create_entry` at lines 696-719
(module size 24) and `snd_info_free_entry` at 788-809 (module size 22);
the fix moves them to 696-722 (27) and 791-817 (27).  The fix diff
deletes lines 716 and 795 and adds 716/717/719/720 and 798-803, with the
`list_del` line moving unchanged.  The target file clones the vulnerable
`snd_info_create_entry` at 707-728 (module size 22) minus the `module`
parameter.
"""

from __future__ import annotations

import difflib
import json
import os

CVE_ID = "CVE-2019-15214"
DESCRIPTION = (
    "A use after free in the sound subsystem core allows a race condition "
    "between disconnection events to corrupt memory or crash the system."
)
SIDECAR = {
    "cve_id": CVE_ID,
    "description": DESCRIPTION,
    "project": "linux",
    "version": "5.1.0",
    "commit_ref": "fixture-commit",
}

INFO_C = "sound/core/info.c"


def _header() -> list[str]:
    return [
        "/*",
        " * Sound core information interface (fixture).",
        " */",
        "#include <linux/init.h>",
        "#include <linux/time.h>",
        "#include <linux/mm.h>",
        "#include <linux/string.h>",
        "#include <sound/core.h>",
        "",
        "static struct snd_info_entry *snd_seq_root;",
        "static int info_users;",
        "",
        "static int snd_info_version_update(int users)",
        "{",
        "\tinfo_users = users + 1;",
        "\treturn info_users;",
        "}",
        "",
    ]


def _pad(count: int, start: int = 1) -> list[str]:
    return [f"/* layout pad {i:04d} */" for i in range(start, start + count)]


_CREATE_VULN = [
    "static struct snd_info_entry *snd_info_create_entry(const char *name,",  # 696
    "\t\t\t\t\t\t     struct snd_info_entry *parent,",  # 697
    "\t\t\t\t\t\t     struct module *module)",  # 698
    "{",  # 699
    "\tstruct snd_info_entry *entry;",  # 700
    "\tentry = kzalloc(sizeof(*entry), GFP_KERNEL);",  # 701
    "\tif (entry == NULL)",  # 702
    "\t\treturn NULL;",  # 703
    "\tentry->name = kstrdup(name, GFP_KERNEL);",  # 704
    "\tif (entry->name == NULL) {",  # 705
    "\t\tkfree(entry);",  # 706
    "\t\treturn NULL;",  # 707
    "\t}",  # 708
    "\tentry->mode = S_IFREG | 0444;",  # 709
    "\tentry->content = SNDRV_INFO_CONTENT_TEXT;",  # 710
    "\tmutex_init(&entry->access);",  # 711
    "\tINIT_LIST_HEAD(&entry->children);",  # 712
    "\tINIT_LIST_HEAD(&entry->list);",  # 713
    "\tentry->parent = parent;",  # 714
    "\tentry->module = module;",  # 715
    "\tif (parent)",  # 716
    "\t\tlist_add_tail(&entry->list, &parent->children);",  # 717
    "\treturn entry;",  # 718
    "}",  # 719
]

_CREATE_PATCHED = [
    "static struct snd_info_entry *snd_info_create_entry(const char *name,",  # 696
    "\t\t\t\t\t\t     struct snd_info_entry *parent,",  # 697
    "\t\t\t\t\t\t     struct module *module)",  # 698
    "{",  # 699
    "\tstruct snd_info_entry *entry;",  # 700
    "\tentry = kzalloc(sizeof(*entry), GFP_KERNEL);",  # 701
    "\tif (entry == NULL)",  # 702
    "\t\treturn NULL;",  # 703
    "\tentry->name = kstrdup(name, GFP_KERNEL);",  # 704
    "\tif (entry->name == NULL) {",  # 705
    "\t\tkfree(entry);",  # 706
    "\t\treturn NULL;",  # 707
    "\t}",  # 708
    "\tentry->mode = S_IFREG | 0444;",  # 709
    "\tentry->content = SNDRV_INFO_CONTENT_TEXT;",  # 710
    "\tmutex_init(&entry->access);",  # 711
    "\tINIT_LIST_HEAD(&entry->children);",  # 712
    "\tINIT_LIST_HEAD(&entry->list);",  # 713
    "\tentry->parent = parent;",  # 714
    "\tentry->module = module;",  # 715
    "\tif (parent) {",  # 716  (added)
    "\t\tmutex_lock(&parent->access);",  # 717  (added)
    "\t\tlist_add_tail(&entry->list, &parent->children);",  # 718
    "\t\tmutex_unlock(&parent->access);",  # 719  (added)
    "\t}",  # 720  (added)
    "\treturn entry;",  # 721
    "}",  # 722
]

_FREE_VULN = [
    "void snd_info_free_entry(struct snd_info_entry * entry)",  # 788
    "{",  # 789
    "\tstruct snd_info_entry *p, *n;",  # 790
    "",  # 791
    "\tif (entry == NULL)",  # 792
    "\t\treturn;",  # 793
    "",  # 794
    "\tlist_del(&entry->list);",  # 795  (deleted)
    "\tif (entry->p)",  # 796
    "\t\tproc_remove(entry->p);",  # 797
    "",  # 798
    "\t/* free all children at first */",  # 799
    "\tlist_for_each_entry_safe(p, n, &entry->children, list)",  # 800
    "\t\tsnd_info_free_entry(p);",  # 801
    "",  # 802
    "\tmutex_lock(&info_mutex);",  # 803
    "\tkfree(entry->name);",  # 804
    "\tif (entry->private_free)",  # 805
    "\t\tentry->private_free(entry);",  # 806
    "\tkfree(entry);",  # 807
    "\tmutex_unlock(&info_mutex);",  # 808
    "}",  # 809
]

_FREE_PATCHED = [
    "void snd_info_free_entry(struct snd_info_entry * entry)",  # 791
    "{",  # 792
    "\tstruct snd_info_entry *p, *n;",  # 793
    "",  # 794
    "\tif (entry == NULL)",  # 795
    "\t\treturn;",  # 796
    "",  # 797
    "\tp = entry->parent;",  # 798  (added)
    "\tif (p) {",  # 799  (added)
    "\t\tmutex_lock(&p->access);",  # 800  (added)
    "\t\tlist_del(&entry->list);",  # 801  (added; moved from old 795)
    "\t\tmutex_unlock(&p->access);",  # 802  (added)
    "\t}",  # 803  (added)
    "\tif (entry->p)",  # 804
    "\t\tproc_remove(entry->p);",  # 805
    "",  # 806
    "\t/* free all children at first */",  # 807
    "\tlist_for_each_entry_safe(p, n, &entry->children, list)",  # 808
    "\t\tsnd_info_free_entry(p);",  # 809
    "",  # 810
    "\tmutex_lock(&info_mutex);",  # 811
    "\tkfree(entry->name);",  # 812
    "\tif (entry->private_free)",  # 813
    "\t\tentry->private_free(entry);",  # 814
    "\tkfree(entry);",  # 815
    "\tmutex_unlock(&info_mutex);",  # 816
    "}",  # 817
]

_TARGET_FN = [
    "static struct snd_info_entry *snd_info_create_entry(const char *name,",  # 707
    "\t\t\t\t\t\t     struct snd_info_entry *parent)",  # 708
    "{",  # 709
    "\tstruct snd_info_entry *entry;",  # 710
    "\tentry = kzalloc(sizeof(*entry), GFP_KERNEL);",  # 711
    "\tif (entry == NULL)",  # 712
    "\t\treturn NULL;",  # 713
    "\tentry->name = kstrdup(name, GFP_KERNEL);",  # 714
    "\tif (entry->name == NULL) {",  # 715
    "\t\tkfree(entry);",  # 716
    "\t\treturn NULL;",  # 717
    "\t}",  # 718
    "\tentry->mode = S_IFREG | S_IRUGO;",  # 719
    "\tentry->content = SNDRV_INFO_CONTENT_TEXT;",  # 720
    "\tmutex_init(&entry->access);",  # 721
    "\tINIT_LIST_HEAD(&entry->children);",  # 722
    "\tINIT_LIST_HEAD(&entry->list);",  # 723
    "\tentry->parent = parent;",  # 724
    "\tif (parent)",  # 725
    "\t\tlist_add_tail(&entry->list, &parent->children);",  # 726
    "\treturn entry;",  # 727
    "}",  # 728
]


def _assemble(create: list[str], free: list[str], free_start: int) -> str:
    lines = _header()  # lines 1-18
    lines += _pad(695 - 18)  # 19-695
    assert len(lines) == 695
    lines += create
    end_create = len(lines)
    lines.append("")  # blank after the function
    gap = free_start - end_create - 2  # identical pad block in both versions
    lines += _pad(gap, start=1000)
    assert len(lines) == free_start - 1, (len(lines), free_start)
    lines += free
    lines += ["", "/* end of fixture */"]
    return "\n".join(lines) + "\n"


def vulnerable_info_c() -> str:
    return _assemble(_CREATE_VULN, _FREE_VULN, free_start=788)


def patched_info_c() -> str:
    return _assemble(_CREATE_PATCHED, _FREE_PATCHED, free_start=791)


def target_info_c() -> str:
    lines = _header()  # 1-18
    lines += _pad(706 - 18)  # 19-706
    assert len(lines) == 706
    lines += _TARGET_FN  # 707-728
    lines += ["", "/* end of fixture */"]
    return "\n".join(lines) + "\n"


def fix_diff() -> str:
    old = vulnerable_info_c().splitlines(keepends=True)
    new = patched_info_c().splitlines(keepends=True)
    diff = difflib.unified_diff(
        old, new, fromfile=f"a/{INFO_C}", tofile=f"b/{INFO_C}", n=3
    )
    return "".join(diff)


def write_build_tree(base) -> tuple[str, str, str]:
    """Lay out diffs/ + vulnerable/ + patched/ under ``base``; returns the roots."""
    base = str(base)
    diff_dir = os.path.join(base, "diffs")
    vuln_root = os.path.join(base, "vulnerable")
    patched_root = os.path.join(base, "patched")
    os.makedirs(diff_dir, exist_ok=True)
    _write(os.path.join(diff_dir, f"{CVE_ID}.diff"), fix_diff())
    _write(os.path.join(diff_dir, f"{CVE_ID}.json"), json.dumps(SIDECAR, indent=1))
    _write(os.path.join(vuln_root, INFO_C), vulnerable_info_c())
    _write(os.path.join(patched_root, INFO_C), patched_info_c())
    return diff_dir, vuln_root, patched_root


def write_target_tree(base) -> str:
    base = str(base)
    root = os.path.join(base, "target")
    _write(os.path.join(root, INFO_C), target_info_c())
    return root


def write_patched_target_tree(base) -> str:
    base = str(base)
    root = os.path.join(base, "patched-target")
    _write(os.path.join(root, INFO_C), patched_info_c())
    return root


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# Pinned expectations, derived by hand from the layouts above.
PARENT_CRITERION = (INFO_C, "snd_info_create_entry", "parent")
ENTRY_FREE_CRITERION = (INFO_C, "snd_info_free_entry", "entry")
PARENT_SLICE_LINES = frozenset({697, 714, 716, 717})
PARENT_MODULE_SIZE = 24
PARENT_VECTOR = (1 / 24, 4 / 24, 1 / 24, 20 / 24)
TARGET_PARENT_VECTOR = (1 / 22, 4 / 22, 1 / 22, 18 / 22)
ROUNDED_PARENT_VECTOR = (0.042, 0.167, 0.042, 0.833)
ROUNDED_TARGET_VECTOR = (0.045, 0.182, 0.045, 0.818)
EXPECTED_SIMILARITY = 0.9994
