"""Exhaustive checks of the frame-class theorems on small frames.

Each suite enumerates every frame of its family up to a size cap, checks a
correspondence on each, and reports the frames where it fails. Work is split
into shards that run on a thread pool; shard results are merged in shard
order so reports do not depend on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from src import config
from src.decision import (
    check_enumeration,
    crosscheck_translation,
    enumerate_frames,
    kripke_frames,
    translation_corpus,
    two_frames,
    unique_up_to_iso,
)
from src.errors import BudgetExceeded, UnknownSuite
from src.formula import boxplus_translate, mk_bd, mk_height, mk_named, to_text
from src.frame import (
    KripkeFrame,
    LogicBase,
    LogicId,
    TwoFrame,
    clean_clusters,
    depth,
    frame_class_check,
    identity,
    irreflexivize,
    product,
    reflexivize,
    relation_depth,
    satisfies_commutativity,
)
from src.io_utils import frame_to_dict
from src.semantics import frame_validates, smax_existence_failures

logger = logging.getLogger(__name__)

Counterexample = Dict[str, Any]

MAX_RECORDED_COUNTEREXAMPLES = 20
PRODUCT_FACTOR_CAP = 3


@dataclass
class SuiteReport:
    name: str
    size_cap: int
    checked: int = 0
    failures: int = 0
    counterexamples: List[Counterexample] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    theorem_backed: bool = True

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "size_cap": self.size_cap,
            "theorem_backed": self.theorem_backed,
            "checked": self.checked,
            "failures": self.failures,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
            "notes": self.notes,
        }


# -------------------------------
# Sharded execution
# -------------------------------


def _process_shard(shard: Sequence[Any], check: Callable[[Any], List[Counterexample]]) -> List[Counterexample]:
    found: List[Counterexample] = []
    for item in shard:
        found.extend(check(item))
    return found


def _check_parallel(items: Sequence[Any], check: Callable[[Any], List[Counterexample]]) -> List[Counterexample]:
    """Run check over items in shards of config.SUITE_SHARD_SIZE.

    Returns:
        Counterexamples in item order
    """
    size = config.SUITE_SHARD_SIZE
    shards = [items[i:i + size] for i in range(0, len(items), size)]
    results: Dict[int, List[Counterexample]] = {}

    with ThreadPoolExecutor(max_workers=config.MAX_PARALLEL_WORKERS) as executor:
        future_to_shard = {executor.submit(_process_shard, shard, check): idx for idx, shard in enumerate(shards)}

        for future in as_completed(future_to_shard):
            shard_idx = future_to_shard[future]
            try:
                results[shard_idx] = future.result()
            except Exception as e:
                logger.error("[suite] Shard %d of %d failed: %s", shard_idx + 1, len(shards), e)
                raise
            logger.debug("[suite] Shard %d of %d done", shard_idx + 1, len(shards))

    return [c for idx in range(len(shards)) for c in results[idx]]


def _run(report: SuiteReport, items: Sequence[Any], check: Callable[[Any], List[Counterexample]]) -> SuiteReport:
    found = _check_parallel(items, check)
    report.checked += len(items)
    report.failures += len(found)
    room = MAX_RECORDED_COUNTEREXAMPLES - len(report.counterexamples)
    report.counterexamples.extend(found[:max(room, 0)])
    return report


def _labelled(cap: int, logic: str) -> List[TwoFrame]:
    return [f for size in range(1, cap + 1) for f in enumerate_frames(size, logic)]


def _up_to_iso(cap: int, logic: str) -> List[TwoFrame]:
    return [f for size in range(1, cap + 1) for f in enumerate_frames(size, logic, modulo_iso=True)]


def _reflexive_kripke(frame: KripkeFrame) -> KripkeFrame:
    return KripkeFrame(frame.worlds, frame.r | identity(frame.size))


def _factor_pairs(cap: int, base: LogicBase) -> List[Tuple[KripkeFrame, KripkeFrame]]:
    cap = min(cap, PRODUCT_FACTOR_CAP)
    clusters = [KripkeFrame.cluster(m) for m in range(1, cap + 1)]
    return [(f, g) for size in range(1, cap + 1) for f in kripke_frames(size, base) for g in clusters]


# -------------------------------
# Suites
# -------------------------------


def casari_suite(cap: int) -> SuiteReport:
    """Casari's formula is valid on a finite MGrz-frame iff its E-clusters are clean."""
    casari = mk_named("casari")

    def check(frame: TwoFrame) -> List[Counterexample]:
        valid = bool(frame_validates(frame, casari))
        clean = clean_clusters(frame)
        if valid == clean:
            return []
        return [{"frame": frame_to_dict(frame), "casari_valid": valid, "clean_clusters": clean}]

    return _run(SuiteReport("casari", cap), _labelled(cap, "MGrz"), check)


def bd_depth_suite(cap: int) -> SuiteReport:
    """bd_n is valid on a transitive MK-frame iff its depth is at most n."""
    report = SuiteReport("bd_depth", cap, notes=["frames checked up to isomorphism"])
    bounds = range(1, max(1, cap - 1) + 1)
    formulas = {n: mk_bd(n) for n in bounds}
    frames: List[TwoFrame] = []
    for size in range(1, cap + 1):
        check_enumeration(size, LogicBase.MK, transitive=True)
        lc = two_frames(size, LogicBase.MK, keep=lambda f: satisfies_commutativity(f, "left"), transitive=True)
        frames.extend(unique_up_to_iso(lc))

    def check(frame: TwoFrame) -> List[Counterexample]:
        d = depth(frame)
        found = []
        for n, bd in formulas.items():
            valid = bool(frame_validates(frame, bd))
            if valid != (d <= n):
                found.append({"frame": frame_to_dict(frame), "n": n, "depth": d, "bd_valid": valid})
        return found

    return _run(report, frames, check)


def refl_valid_suite(cap: int, corpus_size: int = 200) -> SuiteReport:
    """F validates phi+ iff the reflexive closure of F validates phi."""
    corpus = [(phi, boxplus_translate(phi)) for phi in translation_corpus(corpus_size)]
    report = SuiteReport("refl_valid", cap, notes=[f"{len(corpus)} formulas", "frames checked up to isomorphism"])

    def check(frame: TwoFrame) -> List[Counterexample]:
        closed = reflexivize(frame)
        found = []
        for phi, plus in corpus:
            left = bool(frame_validates(frame, plus))
            right = bool(frame_validates(closed, phi))
            if left != right:
                found.append({"frame": frame_to_dict(frame), "formula": to_text(phi),
                              "translation_valid": left, "reflexive_valid": right})
        return found

    return _run(report, _up_to_iso(cap, "MK"), check)


def class_transfer_suite(cap: int) -> SuiteReport:
    """Reflexive and irreflexive closures move frames between MGLB[n] and MPlusGrzB[n]."""
    report = SuiteReport("class_transfer", cap)
    items: List[Tuple[str, int, TwoFrame]] = []
    for n in range(1, min(cap, 3) + 1):
        items.extend(("to_plus_grz", n, f) for f in _labelled(cap, f"MGLB[{n}]"))
        items.extend(("to_gl", n, f) for f in _labelled(cap, f"MPlusGrzB[{n}]"))
    for size in range(1, cap + 1):
        items.extend(("round_trip", 0, f) for f in two_frames(size, LogicBase.MGRZ))

    def check(item: Tuple[str, int, TwoFrame]) -> List[Counterexample]:
        kind, n, frame = item
        if kind == "to_plus_grz":
            ok = frame_class_check(reflexivize(frame), f"MPlusGrzB[{n}]")
        elif kind == "to_gl":
            ok = frame_class_check(irreflexivize(frame), f"MGLB[{n}]")
        else:
            ok = reflexivize(irreflexivize(frame, check_clean=False)) == frame
        return [] if ok else [{"check": kind, "n": n, "frame": frame_to_dict(frame)}]

    return _run(report, items, check)


def claim_product_refl_suite(cap: int) -> SuiteReport:
    """Reflexivizing a product equals the product of the reflexivized factor."""
    report = SuiteReport("claim_product_refl", cap, notes=[f"factors of at most {min(cap, PRODUCT_FACTOR_CAP)} worlds"])

    def check(pair: Tuple[KripkeFrame, KripkeFrame]) -> List[Counterexample]:
        f, g = pair
        if reflexivize(product(f, g)) == product(_reflexive_kripke(f), g):
            return []
        return [{"F": frame_to_dict(TwoFrame(f.worlds, f.r, identity(f.size))), "cluster_size": g.size}]

    return _run(report, _factor_pairs(cap, LogicBase.MK), check)


def product_commutativity_suite(cap: int) -> SuiteReport:
    """Every product of a Kripke frame with an S5 cluster validates com_l and com_r."""
    report = SuiteReport("product_commutativity", cap, notes=[f"factors of at most {min(cap, PRODUCT_FACTOR_CAP)} worlds"])
    formulas = {name: mk_named(name) for name in ("com_l", "com_r")}

    def check(pair: Tuple[KripkeFrame, KripkeFrame]) -> List[Counterexample]:
        f, g = pair
        frame = product(f, g)
        return [
            {"product": frame_to_dict(frame), "formula": name}
            for name, phi in formulas.items()
            if not frame_validates(frame, phi)
        ]

    return _run(report, _factor_pairs(cap, LogicBase.MK), check)


def gl_height_suite(cap: int) -> SuiteReport:
    """On MGL-frames, the height formula of n is valid iff the depth is at most n."""
    report = SuiteReport("gl_height", cap)
    formulas = {n: mk_height(n) for n in range(1, cap + 1)}

    def check(frame: TwoFrame) -> List[Counterexample]:
        d = depth(frame)
        return [
            {"frame": frame_to_dict(frame), "n": n, "depth": d}
            for n, phi in formulas.items()
            if bool(frame_validates(frame, phi)) != (d <= n)
        ]

    return _run(report, _labelled(cap, "MGL"), check)


def product_membership_suite(cap: int) -> SuiteReport:
    """Products of posets (strict orders) with clusters land in MPlusGrzB[d] (MGLB[d])."""
    report = SuiteReport("product_membership", cap, notes=[f"factors of at most {min(cap, PRODUCT_FACTOR_CAP)} worlds"])
    items = [(LogicBase.MPLUSGRZ, f, g) for f, g in _factor_pairs(cap, LogicBase.MGRZ)]
    items += [(LogicBase.MGL, f, g) for f, g in _factor_pairs(cap, LogicBase.MGL)]

    def check(item: Tuple[LogicBase, KripkeFrame, KripkeFrame]) -> List[Counterexample]:
        base, f, g = item
        d = relation_depth(f.r)
        frame = product(f, g)
        logic = LogicId(base, barcan=True, depth_bound=d)
        if frame_class_check(frame, logic) and depth(frame) == d:
            return []
        return [{"logic": str(logic), "product": frame_to_dict(frame)}]

    return _run(report, items, check)


def translation_embedding_suite(cap: int, corpus_size: int = 200) -> SuiteReport:
    """phi is refutable on M+GrzB frames iff phi+ is refutable on MGLB frames, size by size."""
    corpus = translation_corpus(corpus_size)
    report = SuiteReport("translation_embedding", cap, notes=[f"{len(corpus)} formulas"])

    def check(phi) -> List[Counterexample]:
        result = crosscheck_translation(phi, cap)
        return [] if result else [result.to_dict()]

    return _run(report, corpus, check)


def smax_existence_suite(cap: int) -> SuiteReport:
    """Every point of a nonempty U Q-sees a strongly maximal point of U (empirical)."""
    report = SuiteReport(
        "smax_existence", cap, theorem_backed=False,
        notes=["MS4B frames up to isomorphism, every nonempty subset"],
    )

    def check(frame: TwoFrame) -> List[Counterexample]:
        found = []
        for bits in range(1, 1 << frame.size):
            mask = np.array([(bits >> i) & 1 for i in range(frame.size)], dtype=bool)
            failing = smax_existence_failures(frame, mask)
            if failing:
                found.append({
                    "frame": frame_to_dict(frame),
                    "U": list(frame.names(mask)),
                    "points": [frame.worlds[i] for i in failing],
                })
        return found

    return _run(report, _up_to_iso(cap, "MS4B"), check)


SUITES: Dict[str, Callable[[int], SuiteReport]] = {
    "casari": casari_suite,
    "bd_depth": bd_depth_suite,
    "refl_valid": refl_valid_suite,
    "class_transfer": class_transfer_suite,
    "claim_product_refl": claim_product_refl_suite,
    "product_commutativity": product_commutativity_suite,
    "gl_height": gl_height_suite,
    "product_membership": product_membership_suite,
    "translation_embedding": translation_embedding_suite,
    "smax_existence": smax_existence_suite,
}


def verify_theorem_suite(name: str, size_cap: int = 3) -> SuiteReport:
    """Run one named suite over all frames of at most size_cap worlds.

    Raises:
        UnknownSuite: If name is not a registered suite
        BudgetExceeded: If the cap is outside 1..config.MAX_FRAME_SIZE or a
            family is too large to enumerate
    """
    if name not in SUITES:
        raise UnknownSuite(f"Unknown suite: {name!r}", suite=name, known=sorted(SUITES))
    if not 1 <= size_cap <= config.MAX_FRAME_SIZE:
        raise BudgetExceeded("Suite size cap", size_cap, config.MAX_FRAME_SIZE)
    report = SUITES[name](size_cap)
    logger.info(
        "[suite] %s (cap %d): %d checked, %d counterexamples",
        name, size_cap, report.checked, report.failures,
    )
    return report
