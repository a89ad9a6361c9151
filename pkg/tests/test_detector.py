import logging
import os

import fixtures
import pytest

import srcvul.cli as cli
from srcvul.detector import (
    STATUS_LIKELY_PATCHED,
    STATUS_VULNERABLE,
    ScanError,
    detect_clones,
    recommend_patch,
    slice_target,
)
from srcvul.lsh import LshParams
from srcvul.metrics import SlicingVector
from srcvul.vulndb import VulnStore, make_record


@pytest.fixture(scope="module")
def info_db(tmp_path_factory):
    base = tmp_path_factory.mktemp("infodb")
    diff_dir, vuln, patched = fixtures.write_build_tree(base)
    db_path = os.path.join(str(base), "db.jsonl")
    rc = cli.cmd_build_db(diff_dir, vuln, patched, db_path, cli.Config(db_path=db_path))
    assert rc == 0
    return VulnStore.load(db_path)


@pytest.fixture(scope="module")
def clone_target(tmp_path_factory):
    return fixtures.write_target_tree(tmp_path_factory.mktemp("infotarget"))


@pytest.fixture(scope="module")
def vuln_tree(tmp_path_factory):
    base = tmp_path_factory.mktemp("vulntree")
    _diffs, vuln, _patched = fixtures.write_build_tree(base)
    return vuln


class TestSliceTarget:
    def test_clone_target_contains_parent_vector(self, clone_target):
        result = slice_target(clone_target)
        sl, module_size = result[fixtures.PARENT_CRITERION]
        assert module_size == 22
        assert sl.lines == frozenset({708, 724, 725, 726})
        from srcvul.metrics import vector_for

        vec = vector_for(sl, module_size)
        for got, printed in zip(vec.dims, fixtures.ROUNDED_TARGET_VECTOR):
            assert abs(got - printed) <= 5e-4

    def test_missing_root_fatal(self, tmp_path):
        with pytest.raises(ScanError) as exc:
            slice_target(str(tmp_path / "nope"))
        assert "nope" in str(exc.value)

    def test_empty_file_yields_empty_map_and_diagnostic(self, tmp_path, caplog):
        (tmp_path / "empty.c").write_text("")
        with caplog.at_level(logging.WARNING):
            result = slice_target(str(tmp_path))
        assert result == {}
        assert any("no functions" in r.message for r in caplog.records)

    def test_five_file_tree_matches_hand_count(self, tmp_path):
        files = {
            "a.c": "int f(int x)\n{\n\treturn x;\n}\n",
            "b.c": "int g(void)\n{\n\tint y = 1;\n\treturn y;\n}\n",
            "c.c": "void h(int a, int b)\n{\n\tint c;\n\tc = a + b;\n\tuse(c);\n}\n",
            "d.c": "int e(){}\n",
            "e.c": "int p(int m)\n{\n\treturn m;\n}\nint q(int n)\n{\n\treturn n;\n}\n",
        }
        for name, text in files.items():
            (tmp_path / name).write_text(text)
        result = slice_target(str(tmp_path))
        # hand count: x | y | a,b,c | (none) | m,n  ->  7 slices
        assert len(result) == 7


class TestDetectClones:
    def test_info_fixture_single_vulnerable_parent_match(self, info_db, clone_target):
        report = detect_clones(clone_target, info_db)
        vulnerable = report.vulnerable_matches()
        assert len(vulnerable) == 1
        match = vulnerable[0]
        assert match.target_criterion == fixtures.PARENT_CRITERION
        assert match.record.cve_id == fixtures.CVE_ID
        assert abs(match.similarity - fixtures.EXPECTED_SIMILARITY) <= 1e-3
        assert match.recommended_patch == match.record.patch_text
        assert match.status == STATUS_VULNERABLE

    def test_self_scan_matches_at_similarity_one(self, info_db, vuln_tree):
        report = detect_clones(vuln_tree, info_db)
        self_matches = [
            m
            for m in report.vulnerable_matches()
            if m.target_criterion == fixtures.PARENT_CRITERION
        ]
        assert self_matches
        assert abs(self_matches[0].similarity - 1.0) <= 1e-12

    def test_patched_source_fully_demoted(self, info_db, tmp_path_factory):
        patched_target = fixtures.write_patched_target_tree(
            tmp_path_factory.mktemp("ptarget")
        )
        report = detect_clones(patched_target, info_db)
        assert report.vulnerable_matches() == []
        demoted = [m for m in report.matches if m.record.cve_id == fixtures.CVE_ID]
        assert demoted
        assert all(m.status == STATUS_LIKELY_PATCHED for m in demoted)

    def test_brute_force_supersets_lsh_matches(self, info_db, clone_target):
        lsh_report = detect_clones(clone_target, info_db, brute_force=False)
        bf_report = detect_clones(clone_target, info_db, brute_force=True)
        key = lambda m: (m.target_criterion, m.record.record_id)
        lsh_set = {key(m) for m in lsh_report.matches}
        bf_set = {key(m) for m in bf_report.matches}
        assert lsh_set <= bf_set
        assert len(lsh_set) >= 0.95 * len(bf_set)

    def test_threshold_monotonicity(self, info_db, clone_target):
        low = detect_clones(clone_target, info_db, threshold=0.8)
        high = detect_clones(clone_target, info_db, threshold=0.95)
        key = lambda m: (m.target_criterion, m.record.record_id)
        assert {key(m) for m in high.matches} <= {key(m) for m in low.matches}

    def test_report_deterministic(self, info_db, clone_target):
        a = detect_clones(clone_target, info_db, params=LshParams(seed=42))
        b = detect_clones(clone_target, info_db, params=LshParams(seed=42))
        assert a.to_json() == b.to_json()

    def test_empty_db_warns_not_errors(self, clone_target, caplog):
        with caplog.at_level(logging.WARNING):
            report = detect_clones(clone_target, VulnStore())
        assert report.matches == []
        assert any("empty" in r.message for r in caplog.records)

    def test_bad_threshold_rejected(self, info_db, clone_target):
        with pytest.raises(ValueError):
            detect_clones(clone_target, info_db, threshold=0.0)
        with pytest.raises(ValueError):
            detect_clones(clone_target, info_db, threshold=1.5)

    def test_review_band_tagging(self, info_db, clone_target):
        report = detect_clones(clone_target, info_db, review_band=0.2)
        for m in report.matches:
            assert m.needs_review == (0.8 <= m.similarity < 1.0)

    def test_stats_consistency(self, info_db, clone_target):
        report = detect_clones(clone_target, info_db)
        assert report.stats.matches == len(report.matches)
        assert report.stats.files_parsed == 1
        assert report.stats.vectors == report.stats.slices
        assert report.stats.candidates_examined >= len(report.matches)

    def test_json_schema_keys(self, info_db, clone_target):
        obj = detect_clones(clone_target, info_db).to_json_obj()
        assert set(obj) == {"matches", "stats"}
        for m in obj["matches"]:
            assert {"target", "cve_id", "similarity", "patch", "status"} <= set(m)
            assert m["status"] in ("vulnerable", "likely-patched")
            assert {"file", "function", "variable"} <= set(m["target"])


class TestRecommendPatch:
    def _match(self, patch_text):
        rec = make_record(
            vector=SlicingVector(dims=(0.1, 0.2, 0.1, 0.5)),
            cve_id="CVE-2021-1234",
            description="race on list",
            project="p",
            version="1",
            criterion=("a.c", "f", "v"),
            slice_lines={1, 2},
            patch_text=patch_text,
            origin="deleted",
        )
        from srcvul.detector import CloneMatch

        return CloneMatch(
            target_criterion=("t.c", "g", "w"),
            target_vector=SlicingVector(dims=(0.1, 0.2, 0.1, 0.5)),
            record=rec,
            similarity=0.93,
        )

    def test_rendered_patch_byte_equals_stored(self):
        for i in range(10):
            patch = f"--- a/x{i}.c\n+++ b/x{i}.c\n@@ -1,1 +1,1 @@\n-a{i}\n+b{i}\n"
            rendered = recommend_patch(self._match(patch))
            assert patch.rstrip("\n") in rendered
            assert self._match(patch).recommended_patch == patch

    def test_context_block_present(self):
        rendered = recommend_patch(self._match("--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n"))
        assert "CVE-2021-1234" in rendered
        assert "t.c::g::w" in rendered
        assert "0.93" in rendered
        assert "Concurrency" in rendered

    def test_missing_patch_flagged(self):
        rendered = recommend_patch(self._match(""))
        assert "no-patch-available" in rendered
