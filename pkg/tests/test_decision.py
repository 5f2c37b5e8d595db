import itertools

import numpy as np
import pytest

from src.decision import (
    SearchStatus,
    bell,
    canonical_key,
    candidate_count,
    check_enumeration,
    countermodel,
    crosscheck_translation,
    enumerate_frames,
    pad_frame,
    relation_count,
    set_partitions,
    translation_corpus,
)
from src.errors import BudgetExceeded
from src.formula import mk_bd, mk_named, parse
from src.frame import LogicBase, TwoFrame, frame_class_check
from src.semantics import frame_validates, satisfies


def naive_frames(n, logic):
    """Every (R, E) on n points, by brute force over all bit patterns."""
    worlds = tuple(f"w{i}" for i in range(n))
    found = set()
    for bits in itertools.product([False, True], repeat=n * n):
        r = np.array(bits, dtype=bool).reshape(n, n)
        for labels in set_partitions(n):
            arr = np.asarray(labels)
            frame = TwoFrame(worlds, r, arr[:, None] == arr[None, :])
            if frame_class_check(frame, logic):
                found.add((frame.r.tobytes(), frame.e.tobytes()))
    return found


ALL_LOGICS = [
    f"{base.value}{barcan}{bound}" for base in LogicBase for barcan in ("", "B") for bound in ("", "[1]", "[2]")
]


class TestPartitions:
    def test_bell_numbers(self):
        assert [bell(n) for n in range(1, 6)] == [1, 2, 5, 15, 52]

    def test_restricted_growth_order(self):
        assert list(set_partitions(3)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]


class TestRelationCounts:
    @pytest.mark.parametrize(
        "base, expected",
        [(LogicBase.MS4, 29), (LogicBase.MGRZ, 19), (LogicBase.MPLUSGRZ, 19), (LogicBase.MGL, 19)],
    )
    def test_three_points(self, base, expected):
        assert relation_count(3, base) == expected

    def test_mk_is_counted_without_generating(self):
        assert relation_count(5, LogicBase.MK) == 2 ** 25
        assert candidate_count(3, LogicBase.MK) == 512 * 5


class TestEnumeration:
    @pytest.mark.parametrize("logic", ALL_LOGICS)
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_brute_force(self, logic, n):
        frames = list(enumerate_frames(n, logic))
        keys = {(f.r.tobytes(), f.e.tobytes()) for f in frames}
        assert len(keys) == len(frames)
        assert keys == naive_frames(n, logic)

    def test_two_point_mgrzb(self):
        assert len(list(enumerate_frames(2, "MGrzB"))) == 6
        assert len(list(enumerate_frames(2, "MGrzB", modulo_iso=True))) == 4

    def test_iso_classes_are_distinct(self):
        frames = list(enumerate_frames(3, "MGrz", modulo_iso=True))
        assert len({canonical_key(f) for f in frames}) == len(frames)

    def test_relabeling_has_the_same_key(self, d2):
        flipped = TwoFrame.from_pairs(["x", "y"], [("x", "x"), ("y", "x"), ("y", "y")], [("x", "y")])
        assert canonical_key(flipped) == canonical_key(d2)

    def test_size_limits(self):
        with pytest.raises(BudgetExceeded):
            check_enumeration(0, LogicBase.MGRZ)
        with pytest.raises(BudgetExceeded):
            check_enumeration(6, LogicBase.MGRZ)

    def test_candidate_budget(self):
        with pytest.raises(BudgetExceeded) as err:
            list(enumerate_frames(3, "MK", budget=100))
        assert err.value.to_dict()["type"] == "budget_exceeded"

    def test_pad_frame(self, d2):
        padded = pad_frame(d2)
        assert padded.worlds == ("x", "y", "w2")
        assert padded.r[2, 2] and not padded.r[0, 2] and not padded.e[0, 2]
        assert not pad_frame(d2, reflexive=False).r[2, 2]

    @pytest.mark.parametrize("logic", ["MS4", "MGrz", "MGrzB", "MPlusGrzB", "MGLB"])
    @pytest.mark.parametrize("name", ["casari", "com_l", "com_r"])
    def test_isomorphism_pruning_keeps_verdicts(self, logic, name):
        phi = mk_named(name)
        for n in (1, 2, 3):
            labeled = all(frame_validates(f, phi).valid for f in enumerate_frames(n, logic))
            pruned = all(frame_validates(f, phi).valid for f in enumerate_frames(n, logic, modulo_iso=True))
            assert labeled == pruned


class TestCountermodel:
    def test_casari_fails_on_two_points(self):
        outcome = countermodel(mk_named("casari"), "MGrz", 3)
        assert outcome.status is SearchStatus.REFUTED
        assert outcome.witness_frame.size == 2
        ref = outcome.refutation
        assert not satisfies(ref.model(outcome.witness_frame), ref.world, mk_named("casari"))
        assert outcome.padding == {"checked": True, "size": 3, "still_refuted": True}

    def test_casari_holds_on_clean_frames(self):
        outcome = countermodel(mk_named("casari"), "MPlusGrzB", 3)
        assert outcome.status is SearchStatus.VALID_UP_TO_BOUND
        assert outcome.witness_frame is None
        assert outcome.frames_examined > 0
        assert outcome.padding is None

    def test_bd_2_needs_three_points(self):
        outcome = countermodel(mk_bd(2), "MGrzB", 3)
        assert outcome.refuted
        assert outcome.witness_frame.size == 3

    def test_padding_leaves_strict_classes(self):
        outcome = countermodel(parse("p"), "MGLB", 2)
        assert outcome.witness_frame.size == 1
        assert outcome.padding == {"checked": False, "excluded": "MGLB"}
        assert outcome.to_dict()["padding"] == outcome.padding

    def test_padded_witness_stays_refuted_on_every_reflexive_class(self):
        for logic in ("MK", "MS4B", "MGrz[2]", "MPlusGrzB"):
            outcome = countermodel(mk_bd(1), logic, 2)
            assert outcome.refuted
            assert outcome.padding["checked"] and outcome.padding["still_refuted"]

    def test_com_r(self):
        assert countermodel(mk_named("com_r"), "MGrz", 3).refuted
        assert not countermodel(mk_named("com_r"), "MGrzB", 3).refuted

    def test_to_dict(self):
        data = countermodel(parse("p"), "MGrz", 1).to_dict()
        assert data["status"] == "refuted"
        assert data["witness"]["world"] == "w0"
        assert data["witness"]["valuation"] == {"p": []}


class TestTranslation:
    @pytest.mark.parametrize("name", ["casari", "com_l", "com_r"])
    def test_named_formulas_agree(self, name):
        check = crosscheck_translation(mk_named(name), 3)
        assert check.agrees
        assert [s for s, _, _ in check.statuses] == [1, 2, 3]

    def test_depth_formula_agrees(self):
        check = crosscheck_translation(mk_bd(1), 2)
        assert check
        assert check.statuses[-1][1:] == ("refuted", "refuted")

    def test_corpus(self):
        corpus = translation_corpus()
        assert len(corpus) == 205
        assert corpus[:2] == [mk_named("com_l"), mk_named("com_r")]
        assert translation_corpus(10, seed=1) == translation_corpus(10, seed=1)
