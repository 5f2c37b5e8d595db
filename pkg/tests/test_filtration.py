from dataclasses import replace

import numpy as np
import pytest

from src.errors import BudgetExceeded, NotRefuted, SourceClassMismatch, WitnessNotFound
from src.filtration import (
    FiltrationVariant,
    dia_step,
    exists_step,
    run_filtration,
    select_initial,
    verify_report,
)
from src.formula import mk_bd, mk_named, parse
from src.frame import TwoFrame
from src.semantics import Model

V = FiltrationVariant

PRODUCT_GUARD = "p2 -> E<>p1 -> <>p1"
PRODUCT_RC = "~(~p1 & <>(p1 & Ep2))"


def single_point(reflexive: bool) -> Model:
    frame = TwoFrame.from_pairs(["w"], [("w", "w")] if reflexive else [])
    return Model(frame)


def run(model, formula, variant):
    phi = parse(formula) if isinstance(formula, str) else formula
    return run_filtration(model, phi, variant)


class TestCorpus:
    def test_d2_casari(self, d2):
        for variant in (V.MGRZB, V.MGRZ):
            report = run(Model(d2, {"p": {"y"}}), mk_named("casari"), variant)
            assert report.checks.passed
            assert report.frame.worlds == ("y", "x")
            assert set(report.frame.r_pairs()) == set(d2.r_pairs())
            assert report.frame.e.all()
            assert [p.tag for p in report.points] == ["initial", "exists-witness"]

    def test_com_r_model_is_reproduced(self, com_r_model):
        report = run(com_r_model, mk_named("com_r"), V.MGRZ)
        assert report.checks.passed
        assert report.frame == com_r_model.frame
        assert report.subformula_count == 6
        assert [r.tag for r in report.log] == ["initial", "vertical-dia-witness", "exists-witness"]

    @pytest.mark.parametrize("variant", [V.MGRZ, V.MGRZB, V.MPLUSGRZB])
    def test_reflexive_point(self, variant):
        report = run(single_point(True), "p", variant)
        assert report.checks.passed
        assert report.frame.worlds == ("w",)

    def test_irreflexive_point(self):
        report = run(single_point(False), "p", V.MGLB)
        assert report.checks.passed
        assert not report.frame.r.any()

    @pytest.mark.parametrize("variant", [V.MGRZB, V.MPLUSGRZB])
    def test_product_depth_formula(self, grz_product, variant):
        model = Model(grz_product, {"p1": {"(1,a)", "(1,b)"}})
        report = run(model, mk_bd(1), variant)
        assert report.checks.passed
        assert report.frame.worlds == ("(0,a)", "(1,a)")
        assert set(report.frame.r_pairs()) == {("(0,a)", "(0,a)"), ("(0,a)", "(1,a)"), ("(1,a)", "(1,a)")}
        assert report.depth == 2

    @pytest.mark.parametrize("variant", [V.MGRZB, V.MPLUSGRZB, V.MGRZ])
    def test_product_left_commutativity_repair(self, grz_product, variant):
        model = Model(grz_product, {"p1": {"(1,b)"}, "p2": {"(0,a)", "(0,b)"}})
        report = run(model, PRODUCT_GUARD, variant)
        assert report.checks.passed
        assert set(report.frame.worlds) == set(grz_product.worlds)
        assert set(report.frame.r_pairs()) == set(grz_product.r_pairs())
        assert "left-commutativity" in [p.tag for p in report.points]

    @pytest.mark.parametrize("variant", [V.MGRZB, V.MPLUSGRZB])
    def test_product_right_commutativity_repair(self, grz_product, variant):
        model = Model(grz_product, {"p1": {"(1,a)"}, "p2": {"(1,b)"}})
        report = run(model, PRODUCT_RC, variant)
        assert report.checks.passed
        assert report.frame.worlds == ("(0,a)", "(1,a)", "(1,b)")
        assert ("(0,a)", "(1,b)") in report.frame.r_pairs()
        assert "right-commutativity" in [r.tag for r in report.log]

    def test_product_without_barcan_skips_right_commutativity(self, grz_product):
        model = Model(grz_product, {"p1": {"(1,a)"}, "p2": {"(1,b)"}})
        report = run(model, PRODUCT_RC, V.MGRZ)
        assert report.checks.passed
        assert report.frame.worlds == ("(0,a)", "(1,a)", "(1,b)")
        assert ("(0,a)", "(1,b)") not in report.frame.r_pairs()

    def test_gl_product_single_witness(self, gl_product):
        model = Model(gl_product, {"p": {"(1,a)"}})
        report = run(model, "<>p -> p", V.MGLB)
        assert report.checks.passed
        assert report.frame.worlds == ("(0,a)", "(1,a)")
        assert report.frame.r_pairs() == [("(0,a)", "(1,a)")]

    def test_gl_product_right_commutativity(self, gl_product):
        model = Model(gl_product, {"p1": {"(1,a)"}, "p2": {"(1,b)"}})
        report = run(model, PRODUCT_RC, V.MGLB)
        assert report.checks.passed
        assert set(report.frame.r_pairs()) == {("(0,a)", "(1,a)"), ("(0,a)", "(1,b)")}


class TestFailures:
    def test_dirty_source_for_clean_variant(self, d2):
        with pytest.raises(SourceClassMismatch):
            run(Model(d2, {"p": {"y"}}), mk_named("casari"), V.MPLUSGRZB)

    def test_no_vertical_witness_inside_one_cluster(self, d2):
        state = select_initial(Model(d2, {"p": {"y"}}), mk_named("casari"), V.MPLUSGRZB)
        exists_step(state)
        with pytest.raises(WitnessNotFound) as err:
            dia_step(state)
        assert err.value.world == "x"

    def test_not_refuted(self, d2):
        with pytest.raises(NotRefuted):
            run(Model(d2, {"p": {"x", "y"}}), "p", V.MGRZB)

    def test_budget(self, com_r_model):
        with pytest.raises(BudgetExceeded):
            run_filtration(com_r_model, mk_named("com_r"), V.MGRZ, budget=1)

    def test_budget_counts_every_logged_step(self, com_r_model):
        steps = len(run(com_r_model, mk_named("com_r"), V.MGRZ).log)
        assert run_filtration(com_r_model, mk_named("com_r"), V.MGRZ, budget=steps).checks.passed
        with pytest.raises(BudgetExceeded) as err:
            run_filtration(com_r_model, mk_named("com_r"), V.MGRZ, budget=steps - 1)
        assert err.value.budget == steps - 1


class TestReport:
    def test_initial_point_is_strongly_maximal(self, d2):
        state = select_initial(Model(d2, {"p": {"y"}}), mk_named("casari"))
        assert [p.world for p in state.points] == ["y"]
        assert state.points[0].provenance == ("x", "y")

    def test_tampered_valuation_fails_truth_lemma(self, com_r_model):
        report = run(com_r_model, mk_named("com_r"), V.MGRZ)
        tampered = replace(report, valuation={"p": ("y",)})
        checks = verify_report(com_r_model, tampered)
        assert not checks.truth_lemma
        assert not checks.passed

    def test_tampered_edge_fails_provenance(self, com_r_model):
        report = run(com_r_model, mk_named("com_r"), V.MGRZ)
        r = np.array(report.frame.r)
        r[report.frame.index("z"), report.frame.index("x")] = True
        tampered = replace(report, frame=report.frame.with_relations(r=r))
        checks = verify_report(com_r_model, tampered)
        assert not checks.r_within_q
        assert not checks.passed

    def test_deleted_e_pair_fails_provenance(self, d2):
        model = Model(d2, {"p": {"y"}})
        report = run(model, mk_named("casari"), V.MGRZB)
        e = np.array(report.frame.e)
        e[0, 1] = e[1, 0] = False
        tampered = replace(report, frame=report.frame.with_relations(e=e))
        checks = verify_report(model, tampered)
        assert not checks.e_matches_source
        assert not checks.provenance_ok
        assert not checks.passed

    def test_depth_bounds(self, com_r_model):
        report = run(com_r_model, mk_named("com_r"), V.MGRZ)
        assert report.depth_bound == 2 ** 13
        assert report.checks.depth == 2
        assert report.checks.skeleton_depth == 2
        assert report.checks.cluster_chain == 1

    def test_to_dict(self, com_r_model):
        data = run(com_r_model, mk_named("com_r"), V.MGRZ).to_dict()
        assert data["worlds"] == ["x", "y", "z"]
        assert data["valuation"] == {"p": ["z"]}
        assert data["variant"] == "MGrz"
        assert data["checks"]["passed"] is True
        assert data["log"][1]["step"] == "vertical-dia-witness"
        assert data["log"][1]["R_pairs"] == [["x", "y"]]
