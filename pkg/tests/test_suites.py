import pytest

from src import config
from src.errors import BudgetExceeded, UnknownSuite
from src.suites import (
    MAX_RECORDED_COUNTEREXAMPLES,
    SUITES,
    SuiteReport,
    _check_parallel,
    _run,
    refl_valid_suite,
    smax_existence_suite,
    translation_embedding_suite,
    verify_theorem_suite,
)


class TestSharding:
    def test_results_follow_item_order(self, monkeypatch):
        monkeypatch.setattr(config, "SUITE_SHARD_SIZE", 3)
        found = _check_parallel(list(range(20)), lambda i: [{"i": i}] if i % 2 else [])
        assert [c["i"] for c in found] == list(range(1, 20, 2))

    def test_shard_errors_propagate(self):
        def check(item):
            raise ValueError(item)

        with pytest.raises(ValueError):
            _check_parallel([1, 2], check)

    def test_recorded_counterexamples_are_capped(self):
        report = _run(SuiteReport("demo", 1), list(range(50)), lambda i: [{"i": i}])
        assert report.failures == 50
        assert len(report.counterexamples) == MAX_RECORDED_COUNTEREXAMPLES
        assert not report.passed


class TestTheoremSuites:
    @pytest.mark.parametrize(
        "name, cap",
        [
            ("casari", 3),
            ("bd_depth", 3),
            ("class_transfer", 3),
            ("claim_product_refl", 2),
            ("product_commutativity", 2),
            ("gl_height", 3),
            ("product_membership", 3),
        ],
    )
    def test_suite_passes(self, name, cap):
        report = verify_theorem_suite(name, cap)
        assert report.checked > 0
        assert report.passed, report.counterexamples

    def test_refl_valid_on_a_small_corpus(self):
        report = refl_valid_suite(2, corpus_size=10)
        assert report.passed
        assert report.notes[0] == "15 formulas"

    def test_translation_embedding_on_a_small_corpus(self):
        report = translation_embedding_suite(2, corpus_size=10)
        assert report.checked == 15
        assert report.passed

    def test_smax_existence_is_empirical(self):
        report = smax_existence_suite(2)
        assert not report.theorem_backed
        assert report.checked > 0
        assert report.to_dict()["theorem_backed"] is False


class TestRegistry:
    def test_unknown_suite(self):
        with pytest.raises(UnknownSuite):
            verify_theorem_suite("nope")

    @pytest.mark.parametrize("cap", [0, 6])
    def test_cap_out_of_range(self, cap):
        with pytest.raises(BudgetExceeded):
            verify_theorem_suite("casari", cap)

    def test_every_suite_is_registered(self):
        assert len(SUITES) == 10

    def test_report_dict(self):
        data = verify_theorem_suite("casari", 2).to_dict()
        assert data["suite"] == "casari"
        assert data["passed"] is True
        assert data["counterexamples"] == []
