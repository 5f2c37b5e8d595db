import pytest

from src import cache_utils, config
from src.decision import enumerate_frames
from src.errors import FrameError, UnknownWorld
from src.export_utils import (
    filtration_to_markdown,
    format_suite_summary,
    frame_to_dot,
    frames_to_csv,
    suite_to_markdown,
)
from src.frame import TwoFrame
from src.io_utils import (
    counterexample_to_dict,
    frame_from_dict,
    frame_to_dict,
    load_counterexample,
    load_frame,
    load_model,
    read_formula_arg,
)
from src.pdf_utils import report_to_pdf
from src.semantics import Refutation


class TestFiles:
    def test_frame_round_trip(self, sm4, write_json):
        data = frame_to_dict(sm4)
        assert data["E"] == [["a", "b"], ["c", "d"]]
        assert load_frame(write_json("sm4.json", data)) == sm4

    def test_extra_keys_are_rejected(self, write_json):
        with pytest.raises(FrameError):
            load_frame(write_json("bad.json", {"worlds": ["a"], "R": [], "Q": []}))

    def test_empty_carrier_is_rejected(self):
        with pytest.raises(FrameError):
            frame_from_dict({"worlds": []})

    def test_bad_variable_name(self, write_json):
        with pytest.raises(FrameError):
            load_model(write_json("m.json", {"worlds": ["a"], "valuation": {"q": ["a"]}}))

    def test_valuation_outside_the_carrier(self, write_json):
        with pytest.raises(UnknownWorld):
            load_model(write_json("m.json", {"worlds": ["a"], "valuation": {"p": ["b"]}}))

    def test_counterexample(self, d2, write_json):
        data = counterexample_to_dict(d2, Refutation({"p": ("y",)}, "x"))
        model, world = load_counterexample(write_json("cx.json", data))
        assert world == "x"
        assert model.valuation["p"] == frozenset({"y"})

    def test_counterexample_world_must_exist(self, d2, write_json):
        data = dict(counterexample_to_dict(d2, Refutation({"p": ()}, "x")), world="q")
        with pytest.raises(UnknownWorld):
            load_counterexample(write_json("cx.json", data))

    def test_formula_argument(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("  <>p\n", encoding="utf-8")
        assert read_formula_arg(f"@{path}") == "<>p"
        assert read_formula_arg("<>p") == "<>p"
        with pytest.raises(FrameError):
            read_formula_arg(f"@{tmp_path / 'missing.txt'}")


class TestExport:
    def test_dot_groups_clusters(self, sm4):
        source = frame_to_dot(sm4, valuation={"p": ["c"]}, highlight="a")
        assert source.count("rank=same") == 2
        assert "a -> d" in source
        assert "a -> a" not in source
        assert "penwidth=2" in source

    def test_dot_keeps_loops_when_r_is_not_reflexive(self, gl_product):
        frame = TwoFrame.from_pairs(["x", "y"], [("x", "x"), ("x", "y")])
        assert "x -> x" in frame_to_dot(frame)
        assert '"(0,a)" -> "(1,a)"' in frame_to_dot(gl_product)

    def test_csv(self, d2):
        text = frames_to_csv([dict(frame_to_dict(d2), depth=2)])
        lines = text.splitlines()
        assert lines[0] == "index,size,worlds,R,E,depth"
        assert lines[1] == "1,2,x y,x>x; x>y; y>y,x~y,2"
        assert frames_to_csv([]) == ""

    def test_suite_markdown(self):
        payload = {"suite": "casari", "size_cap": 2, "checked": 7, "failures": 0, "passed": True,
                   "theorem_backed": True, "counterexamples": [], "notes": []}
        assert suite_to_markdown(payload).startswith("# Suite casari")
        assert format_suite_summary(payload) == "casari: passed • 7 checked • 0 counterexamples"

    def test_filtration_markdown(self):
        payload = {"variant": "MGrz", "formula": "p", "worlds": ["w"], "checks": {"passed": True},
                   "points": [{"world": "w", "tag": "initial", "round": 0}],
                   "log": [{"round": 0, "inner": 0, "step": "initial", "formula": "~p", "point": "w", "new_point": True}]}
        text = filtration_to_markdown(payload)
        assert "- r0.0 initial `~p` -> `w` new" in text
        assert "- passed: True" in text

    def test_pdf(self):
        pdf = report_to_pdf("# Title\n\n- **a**: `b`\n" + "line\n" * 80, title="Report")
        assert pdf.startswith(b"%PDF")


class TestCache:
    @pytest.fixture
    def cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setattr(config, "CACHE_ENABLED", True)
        monkeypatch.setattr(config, "CACHE_DIR", str(tmp_path / "cache"))
        return tmp_path / "cache"

    def test_enumeration_is_cached(self, cache_dir):
        first = list(enumerate_frames(2, "MGrzB"))
        assert len(list(cache_dir.glob("frames_*.json"))) == 1
        assert list(enumerate_frames(2, "MGrzB")) == first
        assert cache_utils.get_cached_frames("MGrzB", 2, False) == first
        assert cache_utils.get_cached_frames("MGrzB", 2, True) is None

    def test_corrupt_entry_is_ignored(self, cache_dir):
        list(enumerate_frames(1, "MGrz"))
        for path in cache_dir.glob("*.json"):
            path.write_text("[]", encoding="utf-8")
        assert cache_utils.get_cached_frames("MGrz", 1, False) is None

    def test_clear(self, cache_dir):
        list(enumerate_frames(1, "MGrz"))
        cache_utils.clear_cache()
        assert list(cache_dir.glob("*.json")) == []

    def test_disabled(self, d2, tmp_path, monkeypatch):
        monkeypatch.setattr(config, "CACHE_ENABLED", False)
        monkeypatch.setattr(config, "CACHE_DIR", str(tmp_path / "off"))
        cache_utils.save_frames_to_cache([d2], "MGrzB", 2, False)
        assert cache_utils.get_cached_frames("MGrzB", 2, False) is None
        assert not (tmp_path / "off").exists()
