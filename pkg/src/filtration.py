"""Selective filtration over finite source models.

Starting from a strongly maximal refutation point, the engine keeps selecting
source worlds as hatted points until every E-formula and <>-formula of the
subformula set has a witness in the hatted frame and the hatted relations
commute. Hatted points reuse their source world ids; R_hat and E_hat are kept
as |X| x |X| matrices over the source carrier, restricted to selected points.

Rounds run the E step, the <> step and then an inner loop that alternates
left and right commutativity (left only for MGrz) until nothing changes.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import config
from src.errors import BudgetExceeded, NonTransitive, NotRefuted, SmaxNotFound, SourceClassMismatch, WitnessNotFound
from src.formula import Dia, Exists, Formula, Not, SubformulaSet, expand_abbreviations, subformulas, to_text
from src.frame import (
    LogicId,
    TwoFrame,
    depth,
    e_skeleton,
    frame_class_check,
    is_antisymmetric,
    q_relation,
    satisfies_commutativity,
    transitive_closure,
)
from src.io_utils import model_to_dict
from src.semantics import Model, max_mask, smax_mask, truth_table, truth_vector

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


class FiltrationVariant(str, Enum):
    MGRZ = "MGrz"
    MGRZB = "MGrzB"
    MPLUSGRZB = "MPlusGrzB"
    MGLB = "MGLB"

    @property
    def barcan(self) -> bool:
        return self is not FiltrationVariant.MGRZ

    @property
    def horizontal(self) -> bool:
        return self in (FiltrationVariant.MGRZ, FiltrationVariant.MGRZB)

    @property
    def strict(self) -> bool:
        return self is FiltrationVariant.MGLB

    @property
    def logic(self) -> LogicId:
        """Frame class of both the source model and the result."""
        return LogicId.parse(self.value)

    def depth_bound(self, subformula_count: int) -> int:
        if self in (FiltrationVariant.MPLUSGRZB, FiltrationVariant.MGLB):
            return 2 ** (subformula_count + 1)
        return 2 ** (2 * subformula_count + 1)


@dataclass(frozen=True)
class HatPoint:
    source: int
    world: str
    tag: str
    provenance: Tuple[str, ...]  # the set the source world was strongly maximal in
    round: int


@dataclass(frozen=True)
class StepRecord:
    round: int
    inner: int
    tag: str
    formula: Optional[str]
    point: str
    new_point: bool
    r_pairs: Tuple[Pair, ...] = ()
    e_pairs: Tuple[Pair, ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {
            "round": self.round,
            "inner": self.inner,
            "step": self.tag,
            "formula": self.formula,
            "point": self.point,
            "new_point": self.new_point,
            "R_pairs": [list(p) for p in self.r_pairs],
            "E_pairs": [list(p) for p in self.e_pairs],
        }


@dataclass
class SelectionState:
    model: Model
    formula: Formula
    variant: FiltrationVariant
    subformulas: SubformulaSet
    table: Dict[Formula, np.ndarray]
    q: np.ndarray
    r_hat: np.ndarray
    e_hat: np.ndarray
    budget: int
    points: List[HatPoint] = field(default_factory=list)
    log: List[StepRecord] = field(default_factory=list)
    worklists: Dict[str, List[str]] = field(default_factory=dict)
    steps: int = 0
    round_index: int = 0
    inner_index: int = 0

    @property
    def frame(self) -> TwoFrame:
        return self.model.frame

    @property
    def selected(self) -> np.ndarray:
        mask = np.zeros(self.frame.size, dtype=bool)
        mask[[p.source for p in self.points]] = True
        return mask

    def point_at(self, source: int) -> HatPoint:
        for point in self.points:
            if point.source == source:
                return point
        raise KeyError(source)

    def provenance_mask(self, source: int) -> np.ndarray:
        return self.frame.mask(self.point_at(source).provenance)

    def fingerprint(self) -> Tuple[int, int, int]:
        # Growth is monotone, so sizes identify the state between two checks
        return (len(self.points), int(self.r_hat.sum()), int(self.e_hat.sum()))

    def add_point(self, source: int, tag: str, provenance: np.ndarray) -> bool:
        """Select a source world; returns False when it is already selected."""
        if self.selected[source]:
            return False
        self.points.append(
            HatPoint(source, self.frame.worlds[source], tag, self.frame.names(provenance), self.round_index)
        )
        self._close()
        return True

    def link(self, r: Sequence[Tuple[int, int]] = (), e: Sequence[Tuple[int, int]] = ()) -> None:
        for a, b in r:
            self.r_hat[a, b] = True
        for a, b in e:
            self.e_hat[a, b] = True
        self._close()

    def _close(self) -> None:
        sel = self.selected
        diagonal = np.diag(sel)
        r_hat = transitive_closure(self.r_hat)
        if not self.variant.strict:
            r_hat |= diagonal
        self.r_hat = r_hat
        self.e_hat = transitive_closure(self.e_hat | self.e_hat.T | diagonal)

    def record(self, tag: str, formula: Optional[Formula], point: int, new: bool,
               r: Sequence[Tuple[int, int]] = (), e: Sequence[Tuple[int, int]] = ()) -> None:
        """Log one engine step; every witness or repair counts against the budget."""
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded("Filtration", self.steps, self.budget)
        names = self.frame.worlds
        self.log.append(
            StepRecord(
                round=self.round_index,
                inner=self.inner_index,
                tag=tag,
                formula=str(formula) if formula is not None else None,
                point=names[point],
                new_point=new,
                r_pairs=tuple((names[a], names[b]) for a, b in r),
                e_pairs=tuple((names[a], names[b]) for a, b in e),
            )
        )


def _least(mask: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(mask)
    return int(hits[0]) if len(hits) else None


def _prefer_selected(mask: np.ndarray, selected: np.ndarray) -> Optional[int]:
    choice = _least(mask & selected)
    return choice if choice is not None else _least(mask)


def _e_image(frame: TwoFrame, mask: np.ndarray) -> np.ndarray:
    return frame.e[mask].any(axis=0)


# -------------------------------
# Steps
# -------------------------------


def select_initial(
    model: Model,
    phi: Formula,
    variant: FiltrationVariant = FiltrationVariant.MGRZB,
    budget: Optional[int] = None,
) -> SelectionState:
    """Pick the least strongly maximal point refuting phi.

    Raises:
        NotRefuted: If phi holds at every world of the model
        SmaxNotFound: If the refutation set has no strongly maximal point
    """
    variant = FiltrationVariant(variant)
    frame = model.frame
    refuted = ~truth_vector(model, phi)
    if not refuted.any():
        raise NotRefuted(f"{phi} holds everywhere in the source model")
    top = smax_mask(frame, refuted, variant.strict)
    x = _least(top)
    if x is None:
        raise SmaxNotFound(f"No strongly maximal point refutes {phi}", refuted=list(frame.names(refuted)))

    sub = subformulas(expand_abbreviations(phi))
    n = frame.size
    state = SelectionState(
        model=model,
        formula=phi,
        variant=variant,
        subformulas=sub,
        table=truth_table(model, sub),
        q=q_relation(frame),
        r_hat=np.zeros((n, n), dtype=bool),
        e_hat=np.zeros((n, n), dtype=bool),
        budget=config.FILTRATION_BUDGET_FACTOR * n * n if budget is None else budget,
    )
    state.points.append(HatPoint(x, frame.worlds[x], "initial", frame.names(refuted), 0))
    state._close()
    state.record("initial", Not(phi), x, True)
    logger.info("[filtration] %s: initial point %s for %s", variant.value, frame.worlds[x], phi)
    return state


def exists_step(state: SelectionState) -> SelectionState:
    """Give every hatted point an E_hat-witness for each E-formula it needs."""
    frame, table = state.frame, state.table
    strict = state.variant.strict
    formulas = state.subformulas.of_kind(Exists)
    state.worklists["exists"] = [p.world for p in state.points]

    i = 0
    while i < len(state.points):
        point = state.points[i]
        t = point.source
        for phi in formulas:
            body = table[phi.body]
            if not table[phi][t] or body[t]:
                continue
            if (state.e_hat[t] & body).any():
                continue
            region = _e_image(frame, state.provenance_mask(t)) & body
            w = _least(smax_mask(frame, region, strict) & frame.e[t])
            if w is None:
                raise WitnessNotFound("exists", str(phi), point.world)
            new = state.add_point(w, "exists-witness", region)
            state.link(e=[(t, w)])
            state.record("exists-witness", phi, w, new, e=[(t, w)])
        i += 1
    return state


def dia_step(state: SelectionState) -> SelectionState:
    """Give every point present at the start of the step its <>-witnesses.

    A horizontal witness (same E-cluster, reached by R) is preferred when the
    variant allows one; otherwise a vertical witness in a different cluster is
    taken and merged into the E_hat-cluster of any selected E-mate.
    Among the candidates an already selected world is reused first, otherwise
    the least one in carrier order is taken.
    """
    frame, table, variant = state.frame, state.table, state.variant
    strict = variant.strict
    formulas = state.subformulas.of_kind(Dia)
    snapshot = list(state.points)
    state.worklists["dia"] = [p.world for p in snapshot]

    for point in snapshot:
        y = point.source
        false_dias = [alpha for alpha in formulas if not table[alpha][y]]
        for phi in formulas:
            body = table[phi.body]
            if not table[phi][y] or (body[y] and not strict):
                continue
            if (state.r_hat[y] & body).any():
                continue

            if strict:
                region = body.copy()
                for alpha in false_dias:
                    region &= ~table[alpha] & ~table[alpha.body]
            else:
                region = table[phi].copy()
                for alpha in false_dias:
                    region &= ~table[alpha]
            good = smax_mask(frame, region, strict) & max_mask(frame, body)

            if variant.horizontal:
                u = _prefer_selected(good & frame.r[y] & frame.e[y], state.selected)
                if u is not None:
                    new = state.add_point(u, "horizontal-dia-witness", region)
                    state.link(r=[(y, u)], e=[(y, u)])
                    state.record("horizontal-dia-witness", phi, u, new, r=[(y, u)], e=[(y, u)])
                    continue

            vertical = good & state.q[y] & ~frame.e[y]
            for alpha in false_dias:
                vertical &= ~table[alpha.body]
            z = _prefer_selected(vertical, state.selected)
            if z is None:
                raise WitnessNotFound("dia", str(phi), point.world)
            new = state.add_point(z, "vertical-dia-witness", region)
            mates = [(z, int(t)) for t in np.flatnonzero(state.selected & frame.e[z]) if t != z]
            state.link(r=[(y, z)], e=mates)
            state.record("vertical-dia-witness", phi, z, new, r=[(y, z)], e=mates)
    return state


def lc_step(state: SelectionState) -> SelectionState:
    """Repair t E_hat u R_hat w with no s such that t R_hat s E_hat w."""
    frame, strict = state.frame, state.variant.strict
    snapshot = [p.source for p in state.points]
    state.worklists["lc"] = [frame.worlds[i] for i in snapshot]

    for t in snapshot:
        for u in snapshot:
            if not state.e_hat[t, u]:
                continue
            for w in snapshot:
                if not state.r_hat[u, w] or state.e_hat[u, w]:
                    continue
                if (state.r_hat[t] & state.e_hat[w]).any():
                    continue
                region = _e_image(frame, state.provenance_mask(w))
                s = _least(smax_mask(frame, region, strict) & frame.r[t] & frame.e[w])
                if s is None:
                    names = frame.worlds
                    raise WitnessNotFound(
                        "left-commutativity", "LC", names[t], instance=f"{names[t]} E {names[u]} R {names[w]}"
                    )
                new = state.add_point(s, "left-commutativity", region)
                state.link(r=[(t, s)], e=[(s, w)])
                state.record("left-commutativity", None, s, new, r=[(t, s)], e=[(s, w)])
    return state


def rc_step(state: SelectionState) -> SelectionState:
    """Repair t R_hat w E_hat u with no s such that t E_hat s R_hat u."""
    frame, table, strict = state.frame, state.table, state.variant.strict
    formulas = state.subformulas.of_kind(Dia)
    snapshot = [p.source for p in state.points]
    state.worklists["rc"] = [frame.worlds[i] for i in snapshot]

    for t in snapshot:
        for w in snapshot:
            if not state.r_hat[t, w] or state.e_hat[t, w]:
                continue
            for u in snapshot:
                if not state.e_hat[w, u]:
                    continue
                if (state.e_hat[t] & state.r_hat[:, u]).any():
                    continue
                keep = np.ones(frame.size, dtype=bool)
                for phi in formulas:
                    if table[phi][u] or (strict and table[phi.body][u]):
                        keep &= table[phi]
                region = _e_image(frame, state.provenance_mask(t)) & keep
                s = _least(smax_mask(frame, region, strict) & state.q[:, u] & frame.e[t])
                if s is None:
                    names = frame.worlds
                    raise WitnessNotFound(
                        "right-commutativity", "RC", names[t], instance=f"{names[t]} R {names[w]} E {names[u]}"
                    )
                new = state.add_point(s, "right-commutativity", region)
                state.link(r=[(s, u)], e=[(t, s)])
                state.record("right-commutativity", None, s, new, r=[(s, u)], e=[(t, s)])
    return state


def commutativity_loop(state: SelectionState) -> SelectionState:
    """Alternate lc (odd j) and rc (even j) until a full lc/rc pair changes nothing."""
    quiet_needed = 2 if state.variant.barcan else 1
    quiet = 0
    j = 0
    while quiet < quiet_needed:
        j += 1
        state.inner_index = j
        before = state.fingerprint()
        if state.variant.barcan and (j - 1) % 2 == 1:
            rc_step(state)
        else:
            lc_step(state)
        quiet = quiet + 1 if state.fingerprint() == before else 0
    state.inner_index = 0
    return state


# -------------------------------
# Driver and report
# -------------------------------


@dataclass(frozen=True)
class ReportChecks:
    truth_lemma: bool
    truth_lemma_failures: Tuple[Tuple[str, str], ...]
    target_class: bool
    left_commutativity: bool
    right_commutativity: bool
    skeleton_depth: Optional[int]
    skeleton_depth_ok: bool
    skeleton_antisymmetric: bool
    cluster_chain: Optional[int]
    cluster_chain_ok: bool
    depth: Optional[int]
    depth_ok: bool
    e_matches_source: bool
    r_within_q: bool
    r_edge_kinds: bool
    injective: bool

    @property
    def provenance_ok(self) -> bool:
        return self.e_matches_source and self.r_within_q and self.r_edge_kinds and self.injective

    @property
    def passed(self) -> bool:
        return (
            self.truth_lemma
            and self.target_class
            and self.skeleton_depth_ok
            and self.skeleton_antisymmetric
            and self.cluster_chain_ok
            and self.depth_ok
            and self.provenance_ok
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "truth_lemma": self.truth_lemma,
            "truth_lemma_failures": [list(f) for f in self.truth_lemma_failures],
            "target_class": self.target_class,
            "left_commutativity": self.left_commutativity,
            "right_commutativity": self.right_commutativity,
            "skeleton_depth": self.skeleton_depth,
            "skeleton_depth_ok": self.skeleton_depth_ok,
            "skeleton_antisymmetric": self.skeleton_antisymmetric,
            "cluster_chain": self.cluster_chain,
            "cluster_chain_ok": self.cluster_chain_ok,
            "depth": self.depth,
            "depth_ok": self.depth_ok,
            "e_matches_source": self.e_matches_source,
            "r_within_q": self.r_within_q,
            "r_edge_kinds": self.r_edge_kinds,
            "injective": self.injective,
        }


@dataclass(frozen=True)
class FiltrationReport:
    variant: FiltrationVariant
    formula: Formula
    frame: TwoFrame
    valuation: Dict[str, Tuple[str, ...]]
    points: Tuple[HatPoint, ...]
    log: Tuple[StepRecord, ...]
    depth: int
    subformula_count: int
    depth_bound: int
    rounds: int
    checks: Optional[ReportChecks] = None

    @property
    def model(self) -> Model:
        return Model(self.frame, {name: frozenset(ws) for name, ws in self.valuation.items()})

    def to_dict(self) -> Dict[str, object]:
        data = model_to_dict(self.model)
        data.update(
            variant=self.variant.value,
            formula=to_text(self.formula),
            points=[
                {"world": p.world, "tag": p.tag, "round": p.round, "provenance": list(p.provenance)}
                for p in self.points
            ],
            log=[record.to_dict() for record in self.log],
            depth=self.depth,
            subformula_count=self.subformula_count,
            depth_bound=self.depth_bound,
            rounds=self.rounds,
            checks=self.checks.to_dict() if self.checks else None,
        )
        return data


def run_filtration(
    model: Model,
    phi: Formula,
    variant: FiltrationVariant = FiltrationVariant.MGRZB,
    budget: Optional[int] = None,
) -> FiltrationReport:
    """Filtrate a finite refuting model of phi and verify the result.

    Args:
        model: Finite source model whose frame belongs to the variant's class
        phi: Formula refuted somewhere in the model
        variant: Which logic the result must belong to
        budget: Maximum number of engine steps (default factor * |X|^2)

    Returns:
        A report holding the hatted model, the step log and every check

    Raises:
        SourceClassMismatch: If the source frame is outside the variant's class
        NotRefuted, SmaxNotFound, WitnessNotFound, BudgetExceeded: From the steps
    """
    variant = FiltrationVariant(variant)
    if not frame_class_check(model.frame, variant.logic):
        raise SourceClassMismatch(f"Source frame is not a {variant.logic} frame", variant=variant.value)

    state = select_initial(model, phi, variant, budget)
    while True:
        state.round_index += 1
        before = state.fingerprint()
        exists_step(state)
        dia_step(state)
        commutativity_loop(state)
        if state.fingerprint() == before:
            break

    order = [p.source for p in state.points]
    source = model.frame
    hatted = TwoFrame(
        tuple(source.worlds[i] for i in order),
        state.r_hat[np.ix_(order, order)],
        state.e_hat[np.ix_(order, order)],
    )
    valuation = {
        name: tuple(w for w in hatted.worlds if w in worlds)
        for name, worlds in model.valuation.items()
    }
    count = state.subformulas.size
    report = FiltrationReport(
        variant=variant,
        formula=phi,
        frame=hatted,
        valuation=valuation,
        points=tuple(state.points),
        log=tuple(state.log),
        depth=depth(hatted),
        subformula_count=count,
        depth_bound=variant.depth_bound(count),
        rounds=state.round_index,
    )
    logger.info(
        "[filtration] %s: %d of %d source worlds selected in %d rounds",
        variant.value, hatted.size, source.size, state.round_index,
    )
    return replace(report, checks=verify_report(model, report))


def _safe_depth(frame: TwoFrame) -> Optional[int]:
    try:
        return depth(frame)
    except NonTransitive:
        return None


def verify_report(
    model: Model,
    report: FiltrationReport,
    sub: Optional[SubformulaSet] = None,
    variant: Optional[FiltrationVariant] = None,
) -> ReportChecks:
    """Re-check a report from scratch against its source model."""
    variant = FiltrationVariant(variant or report.variant)
    sub = sub or subformulas(expand_abbreviations(report.formula))
    hatted = report.frame
    source = model.frame
    s = sub.size

    # truth lemma
    source_table = truth_table(model, sub)
    hatted_table = truth_table(report.model, sub)
    idx = [source.index(w) for w in hatted.worlds]
    failures = []
    for phi in sub:
        mismatch = hatted_table[phi] != source_table[phi][idx]
        failures.extend((hatted.worlds[int(i)], str(phi)) for i in np.flatnonzero(mismatch))

    # depth bounds
    skeleton = e_skeleton(hatted)
    skeleton_depth = _safe_depth(skeleton.as_frame())
    chains = [_safe_depth(hatted.restrict(c)) for c in hatted.e_classes()]
    cluster_chain = None if any(c is None for c in chains) else max(chains)
    total_depth = _safe_depth(hatted)

    # provenance
    sub_r = source.r[np.ix_(idx, idx)]
    sub_e = source.e[np.ix_(idx, idx)]
    sub_q = q_relation(source)[np.ix_(idx, idx)]
    points_ok = [p.world for p in report.points] == list(hatted.worlds)

    return ReportChecks(
        truth_lemma=not failures,
        truth_lemma_failures=tuple(failures),
        target_class=frame_class_check(hatted, variant.logic),
        left_commutativity=satisfies_commutativity(hatted, "left"),
        right_commutativity=satisfies_commutativity(hatted, "right"),
        skeleton_depth=skeleton_depth,
        skeleton_depth_ok=skeleton_depth is not None and skeleton_depth <= 2 * 2 ** s,
        skeleton_antisymmetric=skeleton.well_defined and is_antisymmetric(skeleton.r0),
        cluster_chain=cluster_chain,
        cluster_chain_ok=cluster_chain is not None and cluster_chain <= 2 ** s,
        depth=total_depth,
        depth_ok=total_depth is not None and total_depth <= variant.depth_bound(s),
        e_matches_source=bool(np.array_equal(hatted.e, sub_e)),
        r_within_q=not (hatted.r & ~sub_q).any(),
        r_edge_kinds=not (hatted.r & ~((sub_r & sub_e) | (sub_q & ~sub_e))).any(),
        injective=points_ok and len(set(idx)) == len(idx),
    )

